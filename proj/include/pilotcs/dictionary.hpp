// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------
// Quantized AoA / AoD / delay grids and the dictionaries of the virtual
// channel representation h ~ (B (x) A_t^* (x) A_r) alpha.
//
// Grid points and flat column indices are 0-based. The flat index of the
// tuple (tau, phi, theta) is theta + G_theta * (phi + G_phi * tau): AoA
// varies fastest, delay slowest, matching the Kronecker ordering.

#ifndef PILOTCS_DICTIONARY_HPP
#define PILOTCS_DICTIONARY_HPP

#include "pilotcs/channel_model.hpp"

namespace pilotcs
{

struct GridSpec
{
    int g_theta = 16;
    int g_phi = 64;
    int g_tau = 32;

    int total() const { return g_theta * g_phi * g_tau; }
    void validate() const;
};

struct Grids
{
    std::vector<double> theta; // AoA, radians
    std::vector<double> phi;   // AoD, radians
    std::vector<double> tau;   // seconds
};

struct GridIndex
{
    int tau = 0;
    int phi = 0;
    int theta = 0;

    bool operator==(const GridIndex &) const = default;
};

int encode_index(const GridIndex &idx, const GridSpec &spec);
GridIndex decode_index(int g, const GridSpec &spec);

/// theta_g = asin(-1 + 2 g / G_theta), likewise for phi; tau_g = max_delay * g / (G_tau - 1).
/// The angle grids start at -pi/2 and stop one step short of +pi/2.
Grids make_grids(const GridSpec &spec, const SystemConfig &config);

struct DictionarySet
{
    SystemConfig config;
    GridSpec spec;
    Grids grids;
    Eigen::MatrixXcd rx; // Nr x G_theta, columns a_r(theta_g)
    Eigen::MatrixXcd tx; // Nt x G_phi,   columns a_t(phi_g)
    Eigen::MatrixXcd delay; // K x G_tau, columns b(tau_g)

    int num_columns() const { return spec.total(); }
    int num_omega_columns() const { return spec.g_phi * spec.g_tau; }
};

DictionarySet build_dictionaries(const GridSpec &spec, const SystemConfig &config);

/// Dictionaries on caller-supplied grid values (used for on-grid experiments and tests).
DictionarySet build_dictionaries(const Grids &grids, const SystemConfig &config);

/// Column g of B (x) A_t^* (x) A_r, length Nr * Nt * K.
Eigen::VectorXcd kronecker_column(const DictionarySet &dicts, int g);

/// (B (x) A_t^* (x) A_r) alpha without forming the Kronecker matrix.
Eigen::VectorXcd virtual_channel(const DictionarySet &dicts, const Eigen::VectorXcd &alpha);

/// Realization whose paths sit exactly on the given grid points.
ChannelRealization on_grid_realization(const DictionarySet &dicts, const std::vector<int> &columns,
                                       const std::vector<cplx> &gains);

} // namespace pilotcs

#endif
