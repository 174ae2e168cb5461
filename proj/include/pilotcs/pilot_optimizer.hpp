// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------
// Joint pilot allocation and sequence design.
//
// The power constraint is removed by optimizing an unnormalized X_bar and
// mapping back with X = sqrt(Pt) X_bar / ||X_bar||_F. The scale-free loss is
//
//   L(X_bar) = f_omega(X_bar) / ||X_bar||^2 + lambda_bar g(X_bar) / ||X_bar||
//
// with the block penalty g(X) = (sum_k ||X_k||_F^q)^(1/q). It is minimized by
// Adam on the Wirtinger gradient dL/dX_bar^*, stepping X_bar -= eta * Adam(grad).
// Blocks whose norm decays below a relative threshold are dropped from the
// subcarrier allocation.

#ifndef PILOTCS_PILOT_OPTIMIZER_HPP
#define PILOTCS_PILOT_OPTIMIZER_HPP

#include "pilotcs/coherence.hpp"

namespace pilotcs
{

struct OptimizerConfig
{
    int p = 4;
    double q = 1.0;
    double lambda_bar = 0.0;
    double learning_rate = 1e-3;
    long iterations = 20000;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 0;
    double zero_threshold_rel = 1e-3;
    long trace_every = 1;

    void validate() const;
};

/// Floor applied to ||X_k|| inside the 1/||X_k|| factors of the penalty gradient.
inline constexpr double kPenaltySmoothingFloor = 1e-12;

struct LossTerms
{
    double loss = 0.0;
    double f_term = 0.0; // f_omega / ||X||^2
    double g_term = 0.0; // lambda_bar * g / ||X||
};

double block_penalty(const Eigen::MatrixXcd &x, int seq_len, double q);

/// Loss and gradient evaluator; the dictionary-dependent lag tables are built once.
class PilotObjective
{
public:
    PilotObjective(const DictionarySet &dicts, const OptimizerConfig &config);

    LossTerms evaluate(const Eigen::MatrixXcd &xbar) const;
    /// Also writes dL/dX_bar^* into grad (same shape as xbar).
    LossTerms evaluate(const Eigen::MatrixXcd &xbar, Eigen::MatrixXcd &grad) const;

    const OmegaGram &gram() const { return gram_; }

private:
    OmegaGram gram_;
    int seq_len_;
    OptimizerConfig config_;
};

LossTerms loss(const Eigen::MatrixXcd &xbar, const DictionarySet &dicts, const OptimizerConfig &config);
Eigen::MatrixXcd loss_gradient(const Eigen::MatrixXcd &xbar, const DictionarySet &dicts,
                               const OptimizerConfig &config);

/// i.i.d. CN(0, 1) entries, Nt x (M K).
Eigen::MatrixXcd gaussian_pilots(int num_tx, int seq_len, int num_subcarriers, std::uint64_t seed);

struct TraceRow
{
    long iteration = 0;
    double loss = 0.0;
    double f_term = 0.0;
    double g_term = 0.0;
    double grad_norm = 0.0;
};

struct OptimizationTrace
{
    std::vector<TraceRow> rows;
    double elapsed_seconds = 0.0;
};

struct OptimizationResult
{
    PilotDesign design;    // thresholded, power-normalized onto the allocation
    Eigen::MatrixXcd xbar; // raw optimizer variable after the last step
    OptimizationTrace trace;
};

/// Runs config.iterations Adam steps from xbar0. Throws NumericalError on a
/// non-finite loss or gradient, std::invalid_argument on a zero start.
OptimizationResult optimize(const Eigen::MatrixXcd &xbar0, const DictionarySet &dicts, const OptimizerConfig &config);

/// Indices k with ||X_k|| > threshold_rel * max_k ||X_k||, ascending.
/// Throws DegenerateInputError if every block is zero.
std::vector<int> extract_allocation(const Eigen::MatrixXcd &x, int seq_len, double threshold_rel);

/// Zeroes blocks outside the extracted allocation and rescales to total_power.
PilotDesign finalize_design(const Eigen::MatrixXcd &xbar, int seq_len, double total_power, double threshold_rel);

struct SweepRow
{
    double lambda_bar = 0.0;
    std::uint64_t seed = 0;
    int num_pilot_subcarriers = 0;
    double nu_p = 0.0; // generalized coherence of Omega
    PilotDesign design;
};

/// One optimize run per lambda value; run i starts from gaussian_pilots with
/// seed mix_seed(config.seed, i). Rows follow the input order for any thread count.
std::vector<SweepRow> sweep_lambda(const std::vector<double> &lambdas, const DictionarySet &dicts,
                                   const OptimizerConfig &config, int threads = 1);

/// Row whose allocation size is closest to target_q; ties go to the smaller nu_p.
std::size_t nearest_q(const std::vector<SweepRow> &rows, int target_q);

} // namespace pilotcs

#endif
