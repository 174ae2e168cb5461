// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------
// Frequency-selective MIMO channel: array/delay responses, Rician path
// sampling and channel assembly.
//
// Vectorization is column-major everywhere: vec(H_k) stacks the Nr-long
// columns of H_k, and the stacked channel h concatenates vec(H_1) .. vec(H_K),
// so element (rx, tx, k) sits at rx + Nr * (tx + Nt * k).

#ifndef PILOTCS_CHANNEL_MODEL_HPP
#define PILOTCS_CHANNEL_MODEL_HPP

#include "pilotcs/common.hpp"

#include <vector>

namespace pilotcs
{

struct SystemConfig
{
    double carrier_freq_hz = 3.5e9;
    double bandwidth_hz = 1.92e6;
    int num_subcarriers = 64;
    int num_tx = 32;
    int num_rx = 8;
    int seq_len = 8;
    double tx_spacing = 0.5; // wavelengths
    double rx_spacing = 0.5; // wavelengths
    double total_power = 1.0;
    int num_delay_taps = 16;

    /// Throws std::invalid_argument naming the first violated invariant.
    void validate() const;

    /// Baseband offset of subcarrier k (0-based): -B/2 + k B / K.
    double subcarrier_offset(int k) const;

    /// Largest path delay (Ntap - 1) / B.
    double max_delay() const;
};

struct ChannelRealization
{
    std::vector<double> aoa;   // radians
    std::vector<double> aod;   // radians
    std::vector<double> delay; // seconds
    std::vector<cplx> gain;

    int num_paths() const { return static_cast<int>(gain.size()); }
};

struct ChannelVector
{
    std::vector<Eigen::MatrixXcd> per_subcarrier; // K matrices, Nr x Nt
    Eigen::VectorXcd stacked;                     // Nr * Nt * K
};

/// ULA response: element i equals exp(j 2 pi spacing i sin(angle)).
Eigen::VectorXcd steering_vector(double angle, int n, double spacing);

/// Per-subcarrier phase ramp exp(-j 2 pi df_k delay), length K.
Eigen::VectorXcd delay_response(double delay, const SystemConfig &config);

/// Draws L paths: angles uniform on [-pi/2, pi/2), delays uniform on
/// [0, max_delay], path 0 is the LoS component of the Rician gain split.
/// With L = 1 the single path carries unit variance.
ChannelRealization sample_channel(const SystemConfig &config, int num_paths, double rician_k_db,
                                  std::uint64_t seed);

/// Builds every H_k = A_r diag(alpha .* b_k) A_t^H and the stacked vector via
/// the Khatri-Rao product (B o A_t^* o A_r) alpha. The two are computed
/// independently; use stack_subcarriers() to compare them.
ChannelVector assemble_channel(const ChannelRealization &realization, const SystemConfig &config);

/// Column-major concatenation of per-subcarrier matrices.
Eigen::VectorXcd stack_subcarriers(const std::vector<Eigen::MatrixXcd> &per_subcarrier);

/// Inverse of stack_subcarriers for an Nr x Nt x K layout.
std::vector<Eigen::MatrixXcd> unstack_subcarriers(const Eigen::VectorXcd &stacked, int num_rx, int num_tx,
                                                  int num_subcarriers);

void check_realization(const ChannelRealization &realization, const SystemConfig &config);

} // namespace pilotcs

#endif
