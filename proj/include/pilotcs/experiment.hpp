// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------
// Monte-Carlo NMSE evaluation, baselines, gradient checks and summaries.
//
// Trial t draws its channel from seed base_seed + t, shared by every method
// and SNR so comparisons are paired. The noise for SNR index s uses
// mix_seed(base_seed + t, s). Results do not depend on the thread count.

#ifndef PILOTCS_EXPERIMENT_HPP
#define PILOTCS_EXPERIMENT_HPP

#include "pilotcs/config.hpp"
#include "pilotcs/estimator.hpp"

#include <filesystem>
#include <string>

namespace pilotcs
{

struct NamedDesign
{
    std::string method;
    PilotDesign design;
};

struct TrialRecord
{
    std::string method;
    double snr_db = 0.0;
    int trial_index = 0;
    std::uint64_t seed = 0;
    double nmse = 0.0;
    double elapsed_ms = 0.0;
};

struct SummaryRow
{
    std::string method;
    double snr_db = 0.0;
    int num_trials = 0;
    double median_nmse = 0.0;
    double mean_nmse = 0.0;
};

DictionarySet make_dictionaries(const ExperimentConfig &config);

/// Off-grid draws use sample_channel; on-grid draws pick distinct grid points
/// uniformly with the same Rician gain split.
ChannelRealization draw_channel(const ExperimentConfig &config, const DictionarySet &dicts, std::uint64_t seed);

/// Gaussian sequences on a uniformly random q-subset of subcarriers, scaled to Pt.
PilotDesign gaussian_random_baseline(const SystemConfig &system, int q, std::uint64_t seed);

/// Design must match the configured (K, M, Nt); throws ConfigError otherwise.
void check_design_matches(const PilotDesign &design, const SystemConfig &system, const std::string &method);
/// Throws ConfigError unless every design shares (Q, M, Nt) or allow_mismatch is set.
void check_fair_comparison(const std::vector<NamedDesign> &designs, bool allow_mismatch);

/// Records in (method, snr, trial) order.
std::vector<TrialRecord> run_trials(const ExperimentConfig &config, const DictionarySet &dicts,
                                    const std::vector<NamedDesign> &designs, int threads);

std::vector<SummaryRow> summarize(const std::vector<TrialRecord> &records);
double median(std::vector<double> v);

/// `method,snr_db,trial_index,seed,nmse` (timings are kept out so the file is reproducible).
void write_trials_csv(const std::filesystem::path &path, const std::vector<TrialRecord> &records);
/// `method,snr_db,trial_index,elapsed_ms`
void write_timings_csv(const std::filesystem::path &path, const std::vector<TrialRecord> &records);
/// `method,snr_db,num_trials,median_nmse,mean_nmse`
void write_summary_csv(const std::filesystem::path &path, const std::vector<SummaryRow> &rows);
std::vector<TrialRecord> read_trials_csv(const std::filesystem::path &path);

struct GradcheckRow
{
    int pair = 0;
    double finite_difference = 0.0;
    double analytic = 0.0;
    double rel_error = 0.0;
};

/// Central differences of the loss along random directions against 2 Re<grad, delta>.
std::vector<GradcheckRow> gradcheck(const ExperimentConfig &config, const DictionarySet &dicts);

struct BootstrapInterval
{
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

/// Percentile bootstrap of median(a) - median(b), resampling paired indices.
BootstrapInterval paired_median_difference_ci(const std::vector<double> &a, const std::vector<double> &b,
                                              int resamples, double level, std::uint64_t seed);

} // namespace pilotcs

#endif
