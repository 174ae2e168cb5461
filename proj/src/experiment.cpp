// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------

#include "pilotcs/experiment.hpp"
#include "pilotcs/design_io.hpp"
#include "pilotcs/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace pilotcs
{

DictionarySet make_dictionaries(const ExperimentConfig &config)
{
    return build_dictionaries(config.grids, config.system);
}

ChannelRealization draw_channel(const ExperimentConfig &config, const DictionarySet &dicts, std::uint64_t seed)
{
    const auto &ch = config.channel;
    if (!ch.on_grid)
        return sample_channel(config.system, ch.num_paths, ch.rician_k_db, seed);

    const int L = ch.num_paths, G = dicts.num_columns();
    if (L > G)
        throw std::invalid_argument("draw_channel: more paths than grid points");
    Rng rng(seed);
    std::vector<int> cols;
    std::uniform_int_distribution<int> pick(0, G - 1);
    while (static_cast<int>(cols.size()) < L) {
        const int g = pick(rng);
        if (std::find(cols.begin(), cols.end(), g) == cols.end())
            cols.push_back(g);
    }
    const double kf = std::pow(10.0, ch.rician_k_db / 10.0);
    std::vector<cplx> gains;
    for (int l = 0; l < L; ++l) {
        const double var = L == 1 ? 1.0 : (l == 0 ? kf / (kf + 1.0) : 1.0 / ((kf + 1.0) * (L - 1)));
        gains.push_back(complex_normal(rng, var));
    }
    return on_grid_realization(dicts, cols, gains);
}

PilotDesign gaussian_random_baseline(const SystemConfig &system, int q, std::uint64_t seed)
{
    system.validate();
    const int K = system.num_subcarriers, M = system.seq_len;
    if (q < 1 || q > K)
        throw std::invalid_argument("baseline: Q must lie in [1, K], got " + std::to_string(q));
    Rng rng(seed);
    std::vector<int> all(K);
    std::iota(all.begin(), all.end(), 0);
    // Partial Fisher-Yates with explicit draws keeps the subset reproducible across standard libraries.
    for (int i = 0; i < q; ++i) {
        std::uniform_int_distribution<int> d(i, K - 1);
        std::swap(all[i], all[d(rng)]);
    }
    PilotDesign out;
    out.seq_len = M;
    out.total_power = system.total_power;
    out.allocation.assign(all.begin(), all.begin() + q);
    std::sort(out.allocation.begin(), out.allocation.end());
    out.x = Eigen::MatrixXcd::Zero(system.num_tx, static_cast<Eigen::Index>(M) * K);
    for (int k : out.allocation)
        for (Eigen::Index c = 0; c < M; ++c)
            for (Eigen::Index r = 0; r < system.num_tx; ++r)
                out.block(k)(r, c) = complex_normal(rng, 1.0);
    out.x *= std::sqrt(system.total_power) / out.x.norm();
    return out;
}

void check_design_matches(const PilotDesign &design, const SystemConfig &system, const std::string &method)
{
    if (design.num_tx() != system.num_tx || design.seq_len != system.seq_len ||
        design.num_subcarriers() != system.num_subcarriers)
        throw ConfigError("design", "'" + method + "' has (Nt, M, K) = (" + std::to_string(design.num_tx()) + ", " +
                                        std::to_string(design.seq_len) + ", " +
                                        std::to_string(design.num_subcarriers()) + "), config expects (" +
                                        std::to_string(system.num_tx) + ", " + std::to_string(system.seq_len) +
                                        ", " + std::to_string(system.num_subcarriers) + ")");
}

void check_fair_comparison(const std::vector<NamedDesign> &designs, bool allow_mismatch)
{
    if (allow_mismatch || designs.empty())
        return;
    const auto &ref = designs.front();
    for (const auto &d : designs) {
        if (d.design.allocation.size() != ref.design.allocation.size() || d.design.seq_len != ref.design.seq_len ||
            d.design.num_tx() != ref.design.num_tx())
            throw ConfigError("allow_mismatch", "designs '" + ref.method + "' and '" + d.method +
                                                    "' differ in (Q, M, Nt); the SNR definition depends on Q. "
                                                    "Pass --allow-mismatch to compare anyway");
    }
}

std::vector<TrialRecord> run_trials(const ExperimentConfig &config, const DictionarySet &dicts,
                                    const std::vector<NamedDesign> &designs, int threads)
{
    if (designs.empty())
        throw std::invalid_argument("run_trials: no designs");
    const auto &ev = config.evaluation;
    const int T = ev.num_trials;
    const int S = static_cast<int>(ev.snr_db_list.size());
    const int D = static_cast<int>(designs.size());
    const int sparsity = ev.effective_sparsity(config.channel.num_paths);

    std::vector<SensingOperator> ops;
    std::vector<std::unique_ptr<SparseSolver>> solvers;
    for (const auto &d : designs) {
        check_design_matches(d.design, config.system, d.method);
        ops.emplace_back(d.design, dicts, true);
        solvers.push_back(make_solver(ev.solver, sparsity, ev.residual_tol));
    }

    // Slot (d, s, t) keeps the (method, snr, trial) ordering whatever the schedule.
    std::vector<TrialRecord> out(static_cast<std::size_t>(D) * S * T);
    const auto slot = [&](int d, int s, int t) { return (static_cast<std::size_t>(d) * S + s) * T + t; };

    parallel_for(T, threads, [&](int t) {
        const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(t);
        const ChannelVector h = assemble_channel(draw_channel(config, dicts, seed), config.system);
        for (int s = 0; s < S; ++s) {
            const std::uint64_t noise_seed = mix_seed(seed, static_cast<std::uint64_t>(s));
            for (int d = 0; d < D; ++d) {
                const auto start = std::chrono::steady_clock::now();
                const PilotDesign &pd = designs[d].design;
                const double sigma2 = snr_to_sigma2(pd.total_power, pd.num_tx(), pd.seq_len,
                                                    static_cast<int>(pd.allocation.size()), ev.snr_db_list[s]);
                const MeasurementSet y = synthesize_measurement(h, pd, sigma2, noise_seed);
                const SparseEstimate est = solvers[d]->solve(y, ops[d]);
                const ChannelVector hh = reconstruct_channel(est, dicts);
                TrialRecord &r = out[slot(d, s, t)];
                r.method = designs[d].method;
                r.snr_db = ev.snr_db_list[s];
                r.trial_index = t;
                r.seed = seed;
                r.nmse = nmse(h.stacked, hh.stacked);
                r.elapsed_ms =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            }
        }
    });
    return out;
}

double median(std::vector<double> v)
{
    if (v.empty())
        throw std::invalid_argument("median of an empty sample");
    const std::size_t n = v.size(), h = n / 2;
    std::nth_element(v.begin(), v.begin() + h, v.end());
    if (n % 2)
        return v[h];
    const double hi = v[h];
    const double lo = *std::max_element(v.begin(), v.begin() + h);
    return 0.5 * (lo + hi);
}

std::vector<SummaryRow> summarize(const std::vector<TrialRecord> &records)
{
    // Keep first-appearance order of (method, snr).
    std::vector<std::pair<std::string, double>> keys;
    std::map<std::pair<std::string, double>, std::vector<double>> groups;
    for (const auto &r : records) {
        const auto key = std::make_pair(r.method, r.snr_db);
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted)
            keys.push_back(key);
        it->second.push_back(r.nmse);
    }
    std::vector<SummaryRow> rows;
    for (const auto &key : keys) {
        const auto &v = groups.at(key);
        SummaryRow row;
        row.method = key.first;
        row.snr_db = key.second;
        row.num_trials = static_cast<int>(v.size());
        row.median_nmse = median(v);
        row.mean_nmse = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        rows.push_back(row);
    }
    return rows;
}

namespace
{

std::ofstream open_csv(const std::filesystem::path &path)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    return f;
}

} // namespace

void write_trials_csv(const std::filesystem::path &path, const std::vector<TrialRecord> &records)
{
    auto f = open_csv(path);
    f << "method,snr_db,trial_index,seed,nmse\n";
    for (const auto &r : records)
        f << r.method << ',' << format_double(r.snr_db) << ',' << r.trial_index << ',' << r.seed << ','
          << format_double(r.nmse) << '\n';
}

void write_timings_csv(const std::filesystem::path &path, const std::vector<TrialRecord> &records)
{
    auto f = open_csv(path);
    f << "method,snr_db,trial_index,elapsed_ms\n";
    for (const auto &r : records)
        f << r.method << ',' << format_double(r.snr_db) << ',' << r.trial_index << ',' << format_double(r.elapsed_ms)
          << '\n';
}

void write_summary_csv(const std::filesystem::path &path, const std::vector<SummaryRow> &rows)
{
    auto f = open_csv(path);
    f << "method,snr_db,num_trials,median_nmse,mean_nmse\n";
    for (const auto &r : rows)
        f << r.method << ',' << format_double(r.snr_db) << ',' << r.num_trials << ',' << format_double(r.median_nmse)
          << ',' << format_double(r.mean_nmse) << '\n';
}

std::vector<TrialRecord> read_trials_csv(const std::filesystem::path &path)
{
    std::ifstream f(path);
    if (!f)
        throw std::invalid_argument("cannot read '" + path.string() + "'");
    std::string line;
    std::getline(f, line);
    if (line != "method,snr_db,trial_index,seed,nmse")
        throw std::invalid_argument("trials csv: unexpected header '" + line + "'");
    std::vector<TrialRecord> out;
    while (std::getline(f, line)) {
        if (line.empty())
            continue;
        std::stringstream ss(line);
        std::string cell[5];
        for (auto &c : cell)
            std::getline(ss, c, ',');
        TrialRecord r;
        r.method = cell[0];
        r.snr_db = cell[1] == "inf" ? std::numeric_limits<double>::infinity() : std::stod(cell[1]);
        r.trial_index = std::stoi(cell[2]);
        r.seed = std::stoull(cell[3]);
        r.nmse = std::stod(cell[4]);
        out.push_back(r);
    }
    return out;
}

std::vector<GradcheckRow> gradcheck(const ExperimentConfig &config, const DictionarySet &dicts)
{
    const auto &sc = config.system;
    const PilotObjective objective(dicts, config.optimizer);
    const double h = config.gradcheck_step;
    std::vector<GradcheckRow> rows;
    for (int i = 0; i < config.gradcheck_pairs; ++i) {
        const auto ui = static_cast<std::uint64_t>(i);
        const Eigen::MatrixXcd x =
            gaussian_pilots(sc.num_tx, sc.seq_len, sc.num_subcarriers, mix_seed(config.base_seed, 2 * ui));
        const Eigen::MatrixXcd dx =
            gaussian_pilots(sc.num_tx, sc.seq_len, sc.num_subcarriers, mix_seed(config.base_seed, 2 * ui + 1));
        Eigen::MatrixXcd grad;
        objective.evaluate(x, grad);
        GradcheckRow row;
        row.pair = i;
        row.finite_difference =
            (objective.evaluate(x + h * dx).loss - objective.evaluate(x - h * dx).loss) / (2.0 * h);
        row.analytic = 2.0 * (grad.conjugate().cwiseProduct(dx)).sum().real();
        const double scale = std::max({std::abs(row.finite_difference), std::abs(row.analytic), 1e-300});
        row.rel_error = std::abs(row.finite_difference - row.analytic) / scale;
        rows.push_back(row);
    }
    return rows;
}

BootstrapInterval paired_median_difference_ci(const std::vector<double> &a, const std::vector<double> &b,
                                              int resamples, double level, std::uint64_t seed)
{
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("bootstrap: samples must be paired and non-empty");
    if (resamples < 1 || !(level > 0.0 && level < 1.0))
        throw std::invalid_argument("bootstrap: need resamples >= 1 and level in (0, 1)");
    const std::size_t n = a.size();
    BootstrapInterval out;
    out.estimate = median(a) - median(b);
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> stats(resamples), ra(n), rb(n);
    for (int r = 0; r < resamples; ++r) {
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t j = pick(rng);
            ra[i] = a[j];
            rb[i] = b[j];
        }
        stats[r] = median(ra) - median(rb);
    }
    std::sort(stats.begin(), stats.end());
    const double tail = (1.0 - level) / 2.0;
    const auto at = [&](double q) {
        const auto idx = static_cast<std::size_t>(std::clamp(q * (resamples - 1), 0.0, double(resamples - 1)));
        return stats[idx];
    };
    out.lower = at(tail);
    out.upper = at(1.0 - tail);
    return out;
}

} // namespace pilotcs
