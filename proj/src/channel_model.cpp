// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------

#include "pilotcs/channel_model.hpp"

#include <cmath>
#include <string>

namespace pilotcs
{

namespace
{
void require(bool ok, const char *what)
{
    if (!ok)
        throw std::invalid_argument(what);
}
} // namespace

void SystemConfig::validate() const
{
    require(num_subcarriers >= 1, "num_subcarriers must be >= 1");
    require(num_tx >= 1, "num_tx must be >= 1");
    require(num_rx >= 1, "num_rx must be >= 1");
    require(seq_len >= 1, "seq_len must be >= 1");
    require(total_power > 0.0, "total_power must be > 0");
    require(tx_spacing > 0.0 && rx_spacing > 0.0, "antenna spacings must be > 0");
    require(bandwidth_hz > 0.0, "bandwidth_hz must be > 0");
    require(num_delay_taps >= 1 && num_delay_taps <= num_subcarriers,
            "num_delay_taps must lie in [1, num_subcarriers]");
}

double SystemConfig::subcarrier_offset(int k) const
{
    return -bandwidth_hz / 2.0 + k * bandwidth_hz / num_subcarriers;
}

double SystemConfig::max_delay() const
{
    return (num_delay_taps - 1) / bandwidth_hz;
}

Eigen::VectorXcd steering_vector(double angle, int n, double spacing)
{
    if (n < 1)
        throw std::invalid_argument("steering_vector: antenna count must be >= 1");
    if (!std::isfinite(angle))
        throw std::invalid_argument("steering_vector: angle must be finite");
    Eigen::VectorXcd a(n);
    const double step = 2.0 * kPi * spacing * std::sin(angle);
    for (int i = 0; i < n; ++i)
        a[i] = std::polar(1.0, step * i);
    return a;
}

Eigen::VectorXcd delay_response(double delay, const SystemConfig &config)
{
    if (!(delay >= 0.0))
        throw std::invalid_argument("delay_response: delay must be non-negative");
    const int K = config.num_subcarriers;
    Eigen::VectorXcd b(K);
    for (int k = 0; k < K; ++k)
        b[k] = std::polar(1.0, -2.0 * kPi * config.subcarrier_offset(k) * delay);
    return b;
}

ChannelRealization sample_channel(const SystemConfig &config, int num_paths, double rician_k_db,
                                  std::uint64_t seed)
{
    if (num_paths < 1)
        throw std::invalid_argument("sample_channel: num_paths must be >= 1");
    config.validate();

    Rng rng(seed);
    std::uniform_real_distribution<double> angle(-kPi / 2.0, kPi / 2.0);
    std::uniform_real_distribution<double> delay(0.0, config.max_delay());

    const double kf = std::pow(10.0, rician_k_db / 10.0);
    ChannelRealization r;
    r.aoa.resize(num_paths);
    r.aod.resize(num_paths);
    r.delay.resize(num_paths);
    r.gain.resize(num_paths);
    for (int l = 0; l < num_paths; ++l) {
        r.aoa[l] = angle(rng);
        r.aod[l] = angle(rng);
        r.delay[l] = config.max_delay() > 0.0 ? delay(rng) : 0.0;
    }
    for (int l = 0; l < num_paths; ++l) {
        double var = 1.0;
        if (num_paths > 1)
            var = (l == 0) ? kf / (kf + 1.0) : 1.0 / ((kf + 1.0) * (num_paths - 1));
        r.gain[l] = complex_normal(rng, var);
    }
    return r;
}

void check_realization(const ChannelRealization &r, const SystemConfig &config)
{
    const auto L = r.gain.size();
    if (L == 0 || r.aoa.size() != L || r.aod.size() != L || r.delay.size() != L)
        throw std::invalid_argument("channel realization: path arrays must be non-empty and of equal length");
    for (double t : r.delay)
        if (!(t >= 0.0))
            throw std::invalid_argument("channel realization: negative delay");
    config.validate();
}

ChannelVector assemble_channel(const ChannelRealization &r, const SystemConfig &config)
{
    check_realization(r, config);
    const int L = r.num_paths();
    const int Nr = config.num_rx, Nt = config.num_tx, K = config.num_subcarriers;

    Eigen::MatrixXcd Ar(Nr, L), At(Nt, L), B(K, L);
    for (int l = 0; l < L; ++l) {
        Ar.col(l) = steering_vector(r.aoa[l], Nr, config.rx_spacing);
        At.col(l) = steering_vector(r.aod[l], Nt, config.tx_spacing);
        B.col(l) = delay_response(r.delay[l], config);
    }
    const Eigen::Map<const Eigen::VectorXcd> alpha(r.gain.data(), L);

    ChannelVector out;
    out.per_subcarrier.reserve(K);
    for (int k = 0; k < K; ++k) {
        const Eigen::VectorXcd weights = alpha.cwiseProduct(B.row(k).transpose());
        out.per_subcarrier.push_back(Ar * weights.asDiagonal() * At.adjoint());
    }

    // Khatri-Rao route: column l is b(tau_l) (x) a_t^*(phi_l) (x) a_r(theta_l).
    out.stacked = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(Nr) * Nt * K);
    for (int l = 0; l < L; ++l) {
        for (int k = 0; k < K; ++k) {
            for (int t = 0; t < Nt; ++t) {
                const cplx s = alpha[l] * B(k, l) * std::conj(At(t, l));
                out.stacked.segment(static_cast<Eigen::Index>(Nr) * (t + Nt * k), Nr) += s * Ar.col(l);
            }
        }
    }
    return out;
}

Eigen::VectorXcd stack_subcarriers(const std::vector<Eigen::MatrixXcd> &per_subcarrier)
{
    Eigen::Index total = 0;
    for (const auto &H : per_subcarrier)
        total += H.size();
    Eigen::VectorXcd h(total);
    Eigen::Index off = 0;
    for (const auto &H : per_subcarrier) {
        h.segment(off, H.size()) = H.reshaped();
        off += H.size();
    }
    return h;
}

std::vector<Eigen::MatrixXcd> unstack_subcarriers(const Eigen::VectorXcd &stacked, int num_rx, int num_tx,
                                                  int num_subcarriers)
{
    const Eigen::Index block = static_cast<Eigen::Index>(num_rx) * num_tx;
    if (stacked.size() != block * num_subcarriers)
        throw std::invalid_argument("unstack_subcarriers: length does not match Nr * Nt * K");
    std::vector<Eigen::MatrixXcd> out;
    out.reserve(num_subcarriers);
    for (int k = 0; k < num_subcarriers; ++k)
        out.push_back(stacked.segment(block * k, block).reshaped(num_rx, num_tx));
    return out;
}

} // namespace pilotcs
