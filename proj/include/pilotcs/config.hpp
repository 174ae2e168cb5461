// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------
// Experiment configuration: profile defaults plus a flat `key = value` file.
//
// Lines are `key = value`; `#` starts a comment. Lists are comma separated.
// Unknown keys, duplicate keys and unparsable values raise ConfigError
// carrying the key. A `profile` key picks the defaults the rest of the file
// overrides; the command-line profile flag takes precedence over it.

#ifndef PILOTCS_CONFIG_HPP
#define PILOTCS_CONFIG_HPP

#include "pilotcs/pilot_optimizer.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pilotcs
{

enum class Profile
{
    desk,
    paper
};

Profile parse_profile(const std::string &name);
std::string profile_name(Profile p);

struct ChannelConfig
{
    int num_paths = 6;
    double rician_k_db = 10.0;
    bool on_grid = false; // draw path parameters from the dictionary grids
};

struct EvaluationConfig
{
    std::vector<double> snr_db_list;
    int num_trials = 200;
    std::string solver = "omp";
    int max_sparsity = 0; // 0: use the number of true paths
    double residual_tol = 0.0;

    int effective_sparsity(int num_paths) const { return max_sparsity > 0 ? max_sparsity : num_paths; }
};

struct ExperimentConfig
{
    Profile profile = Profile::desk;
    SystemConfig system;
    GridSpec grids;
    OptimizerConfig optimizer;
    ChannelConfig channel;
    EvaluationConfig evaluation;
    std::uint64_t base_seed = 1;
    std::vector<std::string> methods; // tags for the designs given to `estimate`, in order
    int target_q = 0;                 // baseline allocation size; 0 means K
    std::vector<double> lambda_list;  // for sweep-lambda
    int gradcheck_pairs = 10;
    double gradcheck_step = 1e-5;
    double gradcheck_tol = 1e-4;
    bool allow_mismatch = false;

    /// Throws ConfigError naming the offending key.
    void validate() const;
};

ExperimentConfig profile_defaults(Profile p);

/// `source` labels error messages (usually the file name).
ExperimentConfig parse_config(const std::string &text, std::optional<Profile> profile_override = std::nullopt,
                              const std::string &source = "<config>");
/// Missing or unreadable file raises ConfigError with key "config".
ExperimentConfig load_config(const std::filesystem::path &path, std::optional<Profile> profile_override = std::nullopt);

/// Canonical `key = value` rendering; parse_config(to_config_text(c)) == c.
std::string to_config_text(const ExperimentConfig &config);

} // namespace pilotcs

#endif
