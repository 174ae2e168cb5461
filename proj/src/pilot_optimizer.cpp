// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------

#include "pilotcs/pilot_optimizer.hpp"
#include "pilotcs/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace pilotcs
{

void OptimizerConfig::validate() const
{
    check_even_p(p);
    if (!(q > 0.0 && q <= 1.0))
        throw std::invalid_argument("optimizer: q must lie in (0, 1]");
    if (!(lambda_bar >= 0.0))
        throw std::invalid_argument("optimizer: lambda_bar must be >= 0");
    if (!(learning_rate > 0.0))
        throw std::invalid_argument("optimizer: learning_rate must be > 0");
    if (iterations < 0)
        throw std::invalid_argument("optimizer: iterations must be >= 0");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
        throw std::invalid_argument("optimizer: beta1 and beta2 must lie in (0, 1)");
    if (!(eps > 0.0))
        throw std::invalid_argument("optimizer: eps must be > 0");
    if (!(zero_threshold_rel > 0.0 && zero_threshold_rel < 1.0))
        throw std::invalid_argument("optimizer: zero_threshold_rel must lie in (0, 1)");
    if (trace_every < 1)
        throw std::invalid_argument("optimizer: trace_every must be >= 1");
}

double block_penalty(const Eigen::MatrixXcd &x, int seq_len, double q)
{
    if (!(q > 0.0 && q <= 1.0))
        throw std::invalid_argument("block_penalty: q must lie in (0, 1]");
    const Eigen::VectorXd n = block_norms(x, seq_len);
    if (q == 1.0)
        return n.sum();
    double s = 0.0;
    for (Eigen::Index k = 0; k < n.size(); ++k)
        s += std::pow(n[k], q);
    return std::pow(s, 1.0 / q);
}

PilotObjective::PilotObjective(const DictionarySet &dicts, const OptimizerConfig &config)
    : gram_(dicts), seq_len_(dicts.config.seq_len), config_(config)
{
    config_.validate();
}

LossTerms PilotObjective::evaluate(const Eigen::MatrixXcd &xbar) const
{
    const double n2 = xbar.squaredNorm();
    if (n2 == 0.0)
        throw DegenerateInputError("loss: pilot matrix is zero");
    const double n = std::sqrt(n2);
    LossTerms t;
    t.f_term = std::pow(gram_.power_sum(xbar, config_.p), 1.0 / config_.p) / n2;
    t.g_term = config_.lambda_bar > 0.0 ? config_.lambda_bar * block_penalty(xbar, seq_len_, config_.q) / n : 0.0;
    t.loss = t.f_term + t.g_term;
    return t;
}

LossTerms PilotObjective::evaluate(const Eigen::MatrixXcd &xbar, Eigen::MatrixXcd &grad) const
{
    const double n2 = xbar.squaredNorm();
    if (n2 == 0.0)
        throw DegenerateInputError("loss: pilot matrix is zero");
    const double n = std::sqrt(n2);
    const int p = config_.p;

    // f / ||X||^2:  (1/||X||^2) (1/p) v^(1/p - 1) dv/dX^*  -  f / ||X||^4 X
    Eigen::MatrixXcd dv;
    const double v = gram_.power_sum_gradient(xbar, p, dv);
    const double f = std::pow(v, 1.0 / p);
    LossTerms t;
    t.f_term = f / n2;
    const double df_scale = v > 0.0 ? f / (p * v) / n2 : 0.0;
    grad = df_scale * dv - (f / (n2 * n2)) * xbar;

    if (config_.lambda_bar > 0.0) {
        const double q = config_.q;
        const Eigen::VectorXd bn = block_norms(xbar, seq_len_);
        double gsum = 0.0;
        for (Eigen::Index k = 0; k < bn.size(); ++k)
            gsum += q == 1.0 ? bn[k] : std::pow(bn[k], q);
        const double g = q == 1.0 ? gsum : std::pow(gsum, 1.0 / q);
        t.g_term = config_.lambda_bar * g / n;

        // d(g/||X||)/dX_k^* = g / (2||X||) [ -1/||X||^2 + ||X_k||^(q-2) g^(-q) ] X_k;
        // exactly-zero blocks take the zero subgradient.
        if (g > 0.0) {
            const double g_pow_q = std::pow(g, -q);
            for (Eigen::Index k = 0; k < bn.size(); ++k) {
                if (bn[k] == 0.0)
                    continue;
                const double nk = std::max(bn[k], kPenaltySmoothingFloor);
                const double local = (q == 1.0 ? 1.0 / nk : std::pow(nk, q - 2.0)) * g_pow_q;
                const double coeff = config_.lambda_bar * g / (2.0 * n) * (local - 1.0 / n2);
                grad.middleCols(k * seq_len_, seq_len_) += coeff * xbar.middleCols(k * seq_len_, seq_len_);
            }
        }
    }
    t.loss = t.f_term + t.g_term;
    return t;
}

LossTerms loss(const Eigen::MatrixXcd &xbar, const DictionarySet &dicts, const OptimizerConfig &config)
{
    return PilotObjective(dicts, config).evaluate(xbar);
}

Eigen::MatrixXcd loss_gradient(const Eigen::MatrixXcd &xbar, const DictionarySet &dicts,
                               const OptimizerConfig &config)
{
    Eigen::MatrixXcd grad;
    PilotObjective(dicts, config).evaluate(xbar, grad);
    return grad;
}

Eigen::MatrixXcd gaussian_pilots(int num_tx, int seq_len, int num_subcarriers, std::uint64_t seed)
{
    if (num_tx < 1 || seq_len < 1 || num_subcarriers < 1)
        throw std::invalid_argument("gaussian_pilots: dimensions must be >= 1");
    Rng rng(seed);
    Eigen::MatrixXcd x(num_tx, static_cast<Eigen::Index>(seq_len) * num_subcarriers);
    // Fill column by column so the draw order does not depend on Eigen's storage.
    for (Eigen::Index c = 0; c < x.cols(); ++c)
        for (Eigen::Index r = 0; r < x.rows(); ++r)
            x(r, c) = complex_normal(rng, 1.0);
    return x;
}

std::vector<int> extract_allocation(const Eigen::MatrixXcd &x, int seq_len, double threshold_rel)
{
    const Eigen::VectorXd n = block_norms(x, seq_len);
    if (!n.allFinite())
        throw std::invalid_argument("extract_allocation: non-finite pilot block");
    const double peak = n.size() ? n.maxCoeff() : 0.0;
    if (!(peak > 0.0))
        throw DegenerateInputError("extract_allocation: every pilot block is zero");
    std::vector<int> q;
    for (Eigen::Index k = 0; k < n.size(); ++k)
        if (n[k] > threshold_rel * peak)
            q.push_back(static_cast<int>(k));
    return q;
}

PilotDesign finalize_design(const Eigen::MatrixXcd &xbar, int seq_len, double total_power, double threshold_rel)
{
    if (!(total_power > 0.0))
        throw std::invalid_argument("finalize_design: total power must be > 0");
    PilotDesign d;
    d.seq_len = seq_len;
    d.total_power = total_power;
    d.allocation = extract_allocation(xbar, seq_len, threshold_rel);
    d.x = Eigen::MatrixXcd::Zero(xbar.rows(), xbar.cols());
    for (int k : d.allocation)
        d.block(k) = xbar.middleCols(static_cast<Eigen::Index>(k) * seq_len, seq_len);
    d.x *= std::sqrt(total_power) / d.x.norm();
    return d;
}

OptimizationResult optimize(const Eigen::MatrixXcd &xbar0, const DictionarySet &dicts, const OptimizerConfig &config)
{
    config.validate();
    if (xbar0.squaredNorm() == 0.0)
        throw std::invalid_argument("optimize: initial pilot matrix is zero");
    const PilotObjective objective(dicts, config);
    const auto start = std::chrono::steady_clock::now();

    OptimizationResult out;
    Eigen::MatrixXcd x = xbar0;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(x.rows(), x.cols());
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(x.rows(), x.cols());
    Eigen::MatrixXcd grad;

    const auto check = [](const LossTerms &t, const Eigen::MatrixXcd &g, long it) {
        if (!std::isfinite(t.loss) || !g.allFinite())
            throw NumericalError("optimize: non-finite loss or gradient", it);
    };

    double b1 = 1.0, b2 = 1.0;
    for (long it = 0; it <= config.iterations; ++it) {
        const LossTerms t = objective.evaluate(x, grad);
        check(t, grad, it);
        if (it % config.trace_every == 0 || it == config.iterations)
            out.trace.rows.push_back({it, t.loss, t.f_term, t.g_term, grad.norm()});
        if (it == config.iterations)
            break;

        m = config.beta1 * m + (1.0 - config.beta1) * grad;
        s = config.beta2 * s + (1.0 - config.beta2) * grad.cwiseAbs2();
        b1 *= config.beta1;
        b2 *= config.beta2;
        const double c1 = 1.0 / (1.0 - b1);
        const double c2 = 1.0 / (1.0 - b2);
        x.array() -= config.learning_rate * (c1 * m.array()) / ((c2 * s.array()).sqrt() + config.eps);
    }

    out.trace.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.xbar = x;
    out.design = finalize_design(x, dicts.config.seq_len, dicts.config.total_power, config.zero_threshold_rel);
    return out;
}

std::vector<SweepRow> sweep_lambda(const std::vector<double> &lambdas, const DictionarySet &dicts,
                                   const OptimizerConfig &config, int threads)
{
    if (lambdas.empty())
        throw std::invalid_argument("sweep_lambda: lambda list is empty");
    config.validate();
    std::vector<SweepRow> rows(lambdas.size());
    parallel_for(static_cast<int>(lambdas.size()), threads, [&](int i) {
        OptimizerConfig c = config;
        c.lambda_bar = lambdas[i];
        c.seed = mix_seed(config.seed, static_cast<std::uint64_t>(i));
        const auto &sc = dicts.config;
        const OptimizationResult r =
            optimize(gaussian_pilots(sc.num_tx, sc.seq_len, sc.num_subcarriers, c.seed), dicts, c);
        SweepRow &row = rows[i];
        row.lambda_bar = lambdas[i];
        row.seed = c.seed;
        row.num_pilot_subcarriers = static_cast<int>(r.design.allocation.size());
        row.nu_p = coherence_report(r.design, dicts, config.p).generalized_p;
        row.design = r.design;
    });
    return rows;
}

std::size_t nearest_q(const std::vector<SweepRow> &rows, int target_q)
{
    if (rows.empty())
        throw std::invalid_argument("nearest_q: no sweep rows");
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const int di = std::abs(rows[i].num_pilot_subcarriers - target_q);
        const int db = std::abs(rows[best].num_pilot_subcarriers - target_q);
        if (di < db || (di == db && rows[i].nu_p < rows[best].nu_p))
            best = i;
    }
    return best;
}

} // namespace pilotcs
