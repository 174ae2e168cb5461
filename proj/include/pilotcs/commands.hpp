// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------
// CLI subcommands. Each returns the process exit status:
// 0 success, 1 I/O or unexpected failure, 2 configuration / input error,
// 3 numerical failure.

#ifndef PILOTCS_COMMANDS_HPP
#define PILOTCS_COMMANDS_HPP

#include "pilotcs/config.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pilotcs
{

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct CommonOptions
{
    std::optional<std::filesystem::path> config; // profile defaults when absent
    std::filesystem::path out = ".";
    std::optional<std::uint64_t> seed;
    int threads = 1;
    std::optional<Profile> profile;
    bool quiet = false;
};

/// Config file (or profile defaults) with the --seed override applied.
ExperimentConfig resolve_config(const CommonOptions &opts);

/// Writes design.json, trace.csv, coherence_summary.json.
int cmd_design(const CommonOptions &opts);
/// Q from `q`, else the allocation size of `match`, else config target_q, else K. Writes baseline.json.
int cmd_baseline(const CommonOptions &opts, std::optional<int> q, const std::optional<std::filesystem::path> &match);
/// designs are `path` or `tag=path`; writes trials.csv, summary.csv, timings.csv.
int cmd_estimate(const CommonOptions &opts, const std::vector<std::string> &designs, bool allow_mismatch);
/// Writes inner_product_cdf.csv, column_norm_cdf.csv, coherence_summary.json.
int cmd_report(const CommonOptions &opts, const std::filesystem::path &design);
/// Writes gradcheck.csv; exit 3 when any relative error exceeds the tolerance.
int cmd_gradcheck(const CommonOptions &opts);
/// Writes sweep.csv and one design per lambda; with target_q > 0 also selected.json.
int cmd_sweep_lambda(const CommonOptions &opts);

} // namespace pilotcs

#endif
