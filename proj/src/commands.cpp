// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------

#include "pilotcs/commands.hpp"
#include "pilotcs/design_io.hpp"
#include "pilotcs/experiment.hpp"

#include <cmath>
#include <functional>
#include <iostream>
#include <set>

namespace fs = std::filesystem;

namespace pilotcs
{

namespace
{

int guarded(const char *name, const std::function<int()> &body)
{
    try {
        return body();
    } catch (const ConfigError &e) {
        std::cerr << name << ": config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError &e) {
        std::cerr << name << ": numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const DegenerateInputError &e) {
        std::cerr << name << ": numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument &e) {
        std::cerr << name << ": invalid input: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception &e) {
        std::cerr << name << ": error: " << e.what() << '\n';
        return kExitFailure;
    }
}

void write_report(const fs::path &out, const PilotDesign &design, const DictionarySet &dicts, int p,
                  std::uint64_t seed, bool with_cdfs)
{
    const CoherenceReport rep = coherence_report(design, dicts, p, seed);
    write_text(out / "coherence_summary.json", coherence_summary_json(rep, design).dump(2) + "\n");
    if (with_cdfs) {
        write_cdf_csv(out / "inner_product_cdf.csv", "inner_product", rep.inner_product_cdf);
        write_cdf_csv(out / "column_norm_cdf.csv", "column_norm", rep.column_norm_cdf);
    }
}

} // namespace

ExperimentConfig resolve_config(const CommonOptions &opts)
{
    ExperimentConfig c = opts.config ? load_config(*opts.config, opts.profile)
                                     : profile_defaults(opts.profile.value_or(Profile::desk));
    if (opts.seed) {
        c.base_seed = *opts.seed;
        c.optimizer.seed = *opts.seed;
    }
    if (opts.threads < 1)
        throw ConfigError("threads", "must be >= 1");
    c.validate();
    return c;
}

int cmd_design(const CommonOptions &opts)
{
    return guarded("design", [&] {
        const ExperimentConfig c = resolve_config(opts);
        const DictionarySet dicts = make_dictionaries(c);
        const auto &sc = c.system;
        const Eigen::MatrixXcd x0 = gaussian_pilots(sc.num_tx, sc.seq_len, sc.num_subcarriers, c.optimizer.seed);
        const OptimizationResult r = optimize(x0, dicts, c.optimizer);
        write_design(opts.out / "design.json", r.design);
        write_trace_csv(opts.out / "trace.csv", r.trace);
        write_report(opts.out, r.design, dicts, c.optimizer.p, c.base_seed, false);
        const auto &rows = r.trace.rows;
        if (rows.back().loss > rows.front().loss)
            std::cerr << "design: warning: final loss " << rows.back().loss << " exceeds initial loss "
                      << rows.front().loss << '\n';
        if (!opts.quiet)
            std::cout << "design: Q=" << r.design.allocation.size() << " loss " << rows.front().loss << " -> "
                      << rows.back().loss << " in " << r.trace.elapsed_seconds << " s\n";
        return kExitOk;
    });
}

int cmd_baseline(const CommonOptions &opts, std::optional<int> q, const std::optional<fs::path> &match)
{
    return guarded("baseline", [&] {
        const ExperimentConfig c = resolve_config(opts);
        int target = c.target_q > 0 ? c.target_q : c.system.num_subcarriers;
        if (match) {
            const PilotDesign ref = read_design(*match);
            check_design_matches(ref, c.system, match->string());
            target = static_cast<int>(ref.allocation.size());
        }
        if (q)
            target = *q;
        if (target < 1 || target > c.system.num_subcarriers)
            throw ConfigError("target_q", "Q = " + std::to_string(target) + " outside [1, K = " +
                                              std::to_string(c.system.num_subcarriers) + "]");
        const PilotDesign d = gaussian_random_baseline(c.system, target, mix_seed(c.base_seed, 0xba5e));
        write_design(opts.out / "baseline.json", d);
        if (!opts.quiet)
            std::cout << "baseline: Q=" << target << '\n';
        return kExitOk;
    });
}

int cmd_estimate(const CommonOptions &opts, const std::vector<std::string> &designs, bool allow_mismatch)
{
    return guarded("estimate", [&] {
        ExperimentConfig c = resolve_config(opts);
        if (designs.empty())
            throw ConfigError("design", "estimate needs at least one design file");
        if (!c.methods.empty() && c.methods.size() != designs.size())
            throw ConfigError("methods", "lists " + std::to_string(c.methods.size()) + " tags for " +
                                             std::to_string(designs.size()) + " designs");
        std::vector<NamedDesign> named;
        std::set<std::string> tags;
        for (std::size_t i = 0; i < designs.size(); ++i) {
            std::string spec = designs[i], tag;
            const auto eq = spec.find('=');
            if (eq != std::string::npos) {
                tag = spec.substr(0, eq);
                spec = spec.substr(eq + 1);
            } else if (!c.methods.empty()) {
                tag = c.methods[i];
            } else {
                tag = fs::path(spec).stem().string();
            }
            if (tag.empty() || tag.find(',') != std::string::npos)
                throw ConfigError("methods", "invalid method tag '" + tag + "'");
            if (!tags.insert(tag).second)
                throw ConfigError("methods", "duplicate method tag '" + tag + "'");
            PilotDesign d;
            try {
                d = read_design(spec);
            } catch (const std::invalid_argument &e) {
                throw ConfigError("design", e.what());
            }
            check_design_matches(d, c.system, tag);
            named.push_back({tag, std::move(d)});
        }
        check_fair_comparison(named, allow_mismatch || c.allow_mismatch);

        const DictionarySet dicts = make_dictionaries(c);
        const auto records = run_trials(c, dicts, named, opts.threads);
        const auto summary = summarize(records);
        write_trials_csv(opts.out / "trials.csv", records);
        write_timings_csv(opts.out / "timings.csv", records);
        write_summary_csv(opts.out / "summary.csv", summary);
        if (!opts.quiet)
            for (const auto &r : summary)
                std::cout << r.method << " snr=" << r.snr_db << " median_nmse=" << r.median_nmse << '\n';
        return kExitOk;
    });
}

int cmd_report(const CommonOptions &opts, const fs::path &design)
{
    return guarded("report", [&] {
        const ExperimentConfig c = resolve_config(opts);
        PilotDesign d;
        try {
            d = read_design(design);
        } catch (const std::invalid_argument &e) {
            throw ConfigError("design", e.what());
        }
        check_design_matches(d, c.system, design.string());
        write_report(opts.out, d, make_dictionaries(c), c.optimizer.p, c.base_seed, true);
        if (!opts.quiet)
            std::cout << "report: written to " << opts.out.string() << '\n';
        return kExitOk;
    });
}

int cmd_gradcheck(const CommonOptions &opts)
{
    return guarded("gradcheck", [&] {
        const ExperimentConfig c = resolve_config(opts);
        const auto rows = gradcheck(c, make_dictionaries(c));
        std::string csv = "pair,finite_difference,analytic,rel_error\n";
        double worst = 0.0;
        for (const auto &r : rows) {
            csv += std::to_string(r.pair) + ',' + format_double(r.finite_difference) + ',' +
                   format_double(r.analytic) + ',' + format_double(r.rel_error) + '\n';
            worst = std::max(worst, std::isfinite(r.rel_error) ? r.rel_error : INFINITY);
        }
        write_text(opts.out / "gradcheck.csv", csv);
        const bool ok = worst <= c.gradcheck_tol;
        std::cout << "gradcheck: " << rows.size() << " pairs, max relative error " << worst << " (tol "
                  << c.gradcheck_tol << "): " << (ok ? "PASS" : "FAIL") << '\n';
        return ok ? kExitOk : kExitNumerical;
    });
}

int cmd_sweep_lambda(const CommonOptions &opts)
{
    return guarded("sweep-lambda", [&] {
        const ExperimentConfig c = resolve_config(opts);
        if (c.lambda_list.empty())
            throw ConfigError("lambda_list", "sweep-lambda needs a non-empty lambda_list");
        const DictionarySet dicts = make_dictionaries(c);
        const auto rows = sweep_lambda(c.lambda_list, dicts, c.optimizer, opts.threads);
        std::string csv = "index,lambda_bar,seed,Q,nu_p\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto &r = rows[i];
            csv += std::to_string(i) + ',' + format_double(r.lambda_bar) + ',' + std::to_string(r.seed) + ',' +
                   std::to_string(r.num_pilot_subcarriers) + ',' + format_double(r.nu_p) + '\n';
            write_design(opts.out / ("design_" + std::to_string(i) + ".json"), r.design);
            if (!opts.quiet)
                std::cout << "lambda_bar=" << r.lambda_bar << " Q=" << r.num_pilot_subcarriers << " nu_p=" << r.nu_p
                          << '\n';
        }
        write_text(opts.out / "sweep.csv", csv);
        if (c.target_q > 0) {
            const std::size_t best = nearest_q(rows, c.target_q);
            write_design(opts.out / "selected.json", rows[best].design);
            if (!opts.quiet)
                std::cout << "selected lambda_bar=" << rows[best].lambda_bar << " (Q=" << rows[best].num_pilot_subcarriers
                          << ", target " << c.target_q << ")\n";
        }
        return kExitOk;
    });
}

} // namespace pilotcs
