// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------

#include "pilotcs/dictionary.hpp"

#include <cmath>

namespace pilotcs
{

void GridSpec::validate() const
{
    if (g_theta < 1 || g_phi < 1)
        throw std::invalid_argument("grid sizes must be >= 1");
    if (g_tau < 2)
        throw std::invalid_argument("g_tau must be >= 2");
}

int encode_index(const GridIndex &idx, const GridSpec &spec)
{
    if (idx.tau < 0 || idx.tau >= spec.g_tau || idx.phi < 0 || idx.phi >= spec.g_phi || idx.theta < 0 ||
        idx.theta >= spec.g_theta)
        throw std::invalid_argument("encode_index: grid index out of range");
    return idx.theta + spec.g_theta * (idx.phi + spec.g_phi * idx.tau);
}

GridIndex decode_index(int g, const GridSpec &spec)
{
    if (g < 0 || g >= spec.total())
        throw std::invalid_argument("decode_index: column index out of range");
    GridIndex idx;
    idx.theta = g % spec.g_theta;
    idx.phi = (g / spec.g_theta) % spec.g_phi;
    idx.tau = g / (spec.g_theta * spec.g_phi);
    return idx;
}

Grids make_grids(const GridSpec &spec, const SystemConfig &config)
{
    spec.validate();
    config.validate();
    Grids g;
    g.theta.resize(spec.g_theta);
    g.phi.resize(spec.g_phi);
    g.tau.resize(spec.g_tau);
    for (int i = 0; i < spec.g_theta; ++i)
        g.theta[i] = std::asin(-1.0 + 2.0 * i / spec.g_theta);
    for (int i = 0; i < spec.g_phi; ++i)
        g.phi[i] = std::asin(-1.0 + 2.0 * i / spec.g_phi);
    for (int i = 0; i < spec.g_tau; ++i)
        g.tau[i] = config.max_delay() * i / (spec.g_tau - 1);
    return g;
}

DictionarySet build_dictionaries(const Grids &grids, const SystemConfig &config)
{
    config.validate();
    if (grids.theta.empty() || grids.phi.empty() || grids.tau.empty())
        throw std::invalid_argument("build_dictionaries: empty grid");
    DictionarySet d;
    d.config = config;
    d.spec = {static_cast<int>(grids.theta.size()), static_cast<int>(grids.phi.size()),
              static_cast<int>(grids.tau.size())};
    d.grids = grids;
    d.rx.resize(config.num_rx, d.spec.g_theta);
    d.tx.resize(config.num_tx, d.spec.g_phi);
    d.delay.resize(config.num_subcarriers, d.spec.g_tau);
    for (int i = 0; i < d.spec.g_theta; ++i)
        d.rx.col(i) = steering_vector(grids.theta[i], config.num_rx, config.rx_spacing);
    for (int i = 0; i < d.spec.g_phi; ++i)
        d.tx.col(i) = steering_vector(grids.phi[i], config.num_tx, config.tx_spacing);
    for (int i = 0; i < d.spec.g_tau; ++i)
        d.delay.col(i) = delay_response(grids.tau[i], config);
    return d;
}

DictionarySet build_dictionaries(const GridSpec &spec, const SystemConfig &config)
{
    return build_dictionaries(make_grids(spec, config), config);
}

Eigen::VectorXcd kronecker_column(const DictionarySet &dicts, int g)
{
    const GridIndex idx = decode_index(g, dicts.spec);
    const int Nr = dicts.config.num_rx, Nt = dicts.config.num_tx, K = dicts.config.num_subcarriers;
    Eigen::VectorXcd col(static_cast<Eigen::Index>(Nr) * Nt * K);
    for (int k = 0; k < K; ++k)
        for (int t = 0; t < Nt; ++t)
            col.segment(static_cast<Eigen::Index>(Nr) * (t + Nt * k), Nr) =
                dicts.delay(k, idx.tau) * std::conj(dicts.tx(t, idx.phi)) * dicts.rx.col(idx.theta);
    return col;
}

Eigen::VectorXcd virtual_channel(const DictionarySet &dicts, const Eigen::VectorXcd &alpha)
{
    const int Gth = dicts.spec.g_theta, Gph = dicts.spec.g_phi, Gta = dicts.spec.g_tau;
    if (alpha.size() != dicts.num_columns())
        throw std::invalid_argument("virtual_channel: coefficient length must equal G");
    const int Nr = dicts.config.num_rx, Nt = dicts.config.num_tx;

    // alpha viewed as G_theta x (G_phi G_tau); contract AoA first.
    const Eigen::MatrixXcd rx_part = dicts.rx * alpha.reshaped(Gth, Gph * Gta); // Nr x (Gphi Gtau)
    // For each delay column block, contract AoD with conj(A_t).
    Eigen::MatrixXcd tx_part(static_cast<Eigen::Index>(Nr) * Nt, Gta);
    for (int tau = 0; tau < Gta; ++tau) {
        const Eigen::MatrixXcd m = rx_part.middleCols(static_cast<Eigen::Index>(Gph) * tau, Gph) *
                                   dicts.tx.adjoint(); // Nr x Nt
        tx_part.col(tau) = m.reshaped();
    }
    const Eigen::MatrixXcd h = tx_part * dicts.delay.transpose(); // (Nr Nt) x K
    return h.reshaped();
}

ChannelRealization on_grid_realization(const DictionarySet &dicts, const std::vector<int> &columns,
                                       const std::vector<cplx> &gains)
{
    if (columns.size() != gains.size() || columns.empty())
        throw std::invalid_argument("on_grid_realization: need one gain per grid column");
    ChannelRealization r;
    for (std::size_t i = 0; i < columns.size(); ++i) {
        const GridIndex idx = decode_index(columns[i], dicts.spec);
        r.aoa.push_back(dicts.grids.theta[idx.theta]);
        r.aod.push_back(dicts.grids.phi[idx.phi]);
        r.delay.push_back(dicts.grids.tau[idx.tau]);
        r.gain.push_back(gains[i]);
    }
    return r;
}

} // namespace pilotcs
