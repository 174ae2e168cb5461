// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------
// pilotcs command-line entry point.

#include "pilotcs/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace pilotcs;

namespace
{

void add_common(CLI::App *sub, CommonOptions &opts, std::string &config, std::string &out, std::string &profile,
                std::uint64_t &seed)
{
    sub->add_option("--config", config, "Experiment config file (key = value)");
    sub->add_option("--out", out, "Output directory")->default_val(".");
    sub->add_option("--seed", seed, "Override base_seed");
    sub->add_option("--threads", opts.threads, "Worker threads")->default_val(1)->check(CLI::PositiveNumber);
    sub->add_option("--profile", profile, "Default parameter set")->check(CLI::IsMember({"desk", "paper"}));
    sub->add_flag("--quiet", opts.quiet, "Suppress progress output");
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Pilot allocation and sequence design for compressed-sensing MIMO-OFDM channel estimation"};
    app.require_subcommand(1);

    CommonOptions opts;
    std::string config, out = ".", profile;
    std::uint64_t seed = 0;
    std::optional<int> q;
    std::string match, report_design;
    std::vector<std::string> designs;
    bool allow_mismatch = false;

    auto *design = app.add_subcommand("design", "Optimize a joint pilot allocation and sequence");
    auto *baseline = app.add_subcommand("baseline", "Gaussian sequences on a random subcarrier subset");
    auto *estimate = app.add_subcommand("estimate", "Monte-Carlo NMSE of one or more designs");
    auto *report = app.add_subcommand("report", "Coherence summary and CDFs of a design");
    auto *gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the loss gradient");
    auto *sweep = app.add_subcommand("sweep-lambda", "Optimize once per lambda_bar in lambda_list");
    for (auto *sub : {design, baseline, estimate, report, gradcheck, sweep})
        add_common(sub, opts, config, out, profile, seed);

    baseline->add_option("--q", q, "Number of pilot subcarriers")->check(CLI::PositiveNumber);
    baseline->add_option("--match", match, "Take Q from this design")->check(CLI::ExistingFile);
    estimate->add_option("designs", designs, "Design files, optionally tag=path")->required();
    estimate->add_flag("--allow-mismatch", allow_mismatch, "Compare designs with different (Q, M, Nt)");
    report->add_option("--design", report_design, "Design file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    if (!config.empty())
        opts.config = config;
    opts.out = out;
    if (app.get_subcommands().front()->count("--seed") > 0)
        opts.seed = seed;
    if (!profile.empty())
        opts.profile = parse_profile(profile);

    if (design->parsed())
        return cmd_design(opts);
    if (baseline->parsed())
        return cmd_baseline(opts, q, match.empty() ? std::nullopt : std::optional<std::filesystem::path>(match));
    if (estimate->parsed())
        return cmd_estimate(opts, designs, allow_mismatch);
    if (report->parsed())
        return cmd_report(opts, report_design);
    if (gradcheck->parsed())
        return cmd_gradcheck(opts);
    if (sweep->parsed())
        return cmd_sweep_lambda(opts);
    return kExitConfig;
}
