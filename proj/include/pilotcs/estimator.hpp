// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------
// Pilot measurement synthesis, sparse recovery and NMSE scoring.
//
// The stacked measurement concatenates vec(H_k X_k) over the allocated
// subcarriers, so element (rx, m, q) sits at rx + Nr * (m + M * q) and
// y = Psi alpha + n with Psi = Omega_S (x) A_r.

#ifndef PILOTCS_ESTIMATOR_HPP
#define PILOTCS_ESTIMATOR_HPP

#include "pilotcs/coherence.hpp"

#include <memory>
#include <string>

namespace pilotcs
{

struct MeasurementSet
{
    Eigen::VectorXcd y; // Nr * M * |Q|
    double sigma2 = 0.0;
    std::vector<int> allocation;
    int num_rx = 0;
    int seq_len = 0;
};

/// y = D S h + n with n ~ CN(0, sigma2 I); noise is drawn in measurement order.
MeasurementSet synthesize_measurement(const ChannelVector &h, const PilotDesign &design, double sigma2,
                                      std::uint64_t seed);

struct SparseEstimate
{
    std::vector<int> support; // flat grid indices, in selection order
    Eigen::VectorXcd coefficients;
    double residual_norm = 0.0;
    std::vector<double> residual_history; // ||r|| before the first pick and after every pick
    bool rank_deficient = false;
};

/// Recovery interface so further solvers can be dropped into the harness.
class SparseSolver
{
public:
    virtual ~SparseSolver() = default;
    virtual SparseEstimate solve(const MeasurementSet &measurement, const SensingOperator &op) const = 0;
    virtual std::string name() const = 0;
};

class OmpSolver : public SparseSolver
{
public:
    /// Stops after max_sparsity atoms or once ||r|| <= residual_tol.
    OmpSolver(int max_sparsity, double residual_tol = 0.0);

    SparseEstimate solve(const MeasurementSet &measurement, const SensingOperator &op) const override;
    std::string name() const override { return "omp"; }

private:
    int max_sparsity_;
    double residual_tol_;
};

/// Throws std::invalid_argument when max_sparsity < 1 or exceeds N, or when
/// the measurement length does not match the operator. A rank-deficient
/// active set is solved in the minimum-norm sense and flagged on the result.
SparseEstimate omp_solve(const MeasurementSet &measurement, const SensingOperator &op, int max_sparsity,
                         double residual_tol = 0.0);

std::unique_ptr<SparseSolver> make_solver(const std::string &name, int max_sparsity, double residual_tol = 0.0);

/// h_hat = sum over the support of alpha_g times Kronecker column g.
ChannelVector reconstruct_channel(const SparseEstimate &estimate, const DictionarySet &dicts);

/// ||h - h_hat||^2 / ||h||^2; throws DegenerateInputError for a zero h.
double nmse(const Eigen::VectorXcd &h_true, const Eigen::VectorXcd &h_est);

/// sigma2 with SNR = (Pt / (Nt M Q)) / sigma2. An infinite SNR maps to 0.
double snr_to_sigma2(double total_power, int num_tx, int seq_len, int num_pilot_subcarriers, double snr_db);

} // namespace pilotcs

#endif
