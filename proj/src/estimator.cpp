// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------

#include "pilotcs/estimator.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

namespace pilotcs
{

MeasurementSet synthesize_measurement(const ChannelVector &h, const PilotDesign &design, double sigma2,
                                      std::uint64_t seed)
{
    if (design.allocation.empty())
        throw std::invalid_argument("synthesize_measurement: allocation is empty");
    if (!(sigma2 >= 0.0) || !std::isfinite(sigma2))
        throw std::invalid_argument("synthesize_measurement: sigma2 must be finite and >= 0");
    const int M = design.seq_len, K = design.num_subcarriers(), Nt = design.num_tx();
    if (static_cast<int>(h.per_subcarrier.size()) != K)
        throw std::invalid_argument("synthesize_measurement: channel has " + std::to_string(h.per_subcarrier.size()) +
                                    " subcarriers, design has " + std::to_string(K));
    const int Nr = static_cast<int>(h.per_subcarrier.front().rows());
    for (const auto &hk : h.per_subcarrier)
        if (hk.rows() != Nr || hk.cols() != Nt)
            throw std::invalid_argument("synthesize_measurement: channel and design antenna counts differ");

    MeasurementSet out;
    out.sigma2 = sigma2;
    out.allocation = design.allocation;
    out.num_rx = Nr;
    out.seq_len = M;
    const Eigen::Index block = static_cast<Eigen::Index>(Nr) * M;
    out.y.resize(block * static_cast<Eigen::Index>(design.allocation.size()));
    for (std::size_t q = 0; q < design.allocation.size(); ++q) {
        const int k = design.allocation[q];
        if (k < 0 || k >= K)
            throw std::invalid_argument("synthesize_measurement: allocation index out of range");
        const Eigen::MatrixXcd yk = h.per_subcarrier[k] * design.block(k);
        out.y.segment(block * static_cast<Eigen::Index>(q), block) = yk.reshaped();
    }
    if (sigma2 > 0.0) {
        Rng rng(seed);
        for (Eigen::Index i = 0; i < out.y.size(); ++i)
            out.y[i] += complex_normal(rng, sigma2);
    }
    return out;
}

OmpSolver::OmpSolver(int max_sparsity, double residual_tol) : max_sparsity_(max_sparsity), residual_tol_(residual_tol)
{
    if (max_sparsity < 1)
        throw std::invalid_argument("omp: max_sparsity must be >= 1");
    if (!(residual_tol >= 0.0))
        throw std::invalid_argument("omp: residual_tol must be >= 0");
}

SparseEstimate OmpSolver::solve(const MeasurementSet &measurement, const SensingOperator &op) const
{
    const Eigen::VectorXcd &y = measurement.y;
    if (y.size() != op.rows())
        throw std::invalid_argument("omp: measurement length " + std::to_string(y.size()) +
                                    " does not match operator rows " + std::to_string(op.rows()));
    if (max_sparsity_ > op.rows())
        throw std::invalid_argument("omp: max_sparsity exceeds the number of measurements");

    SparseEstimate est;
    const double y_norm = y.norm();
    est.residual_norm = y_norm;
    est.residual_history.push_back(y_norm);
    est.coefficients.resize(0);
    if (y_norm == 0.0)
        return est;

    const Eigen::VectorXd &norms = op.column_norms();
    const double floor = 1e-12 * y_norm;
    // Rounding in the least-squares refit can nudge the residual up by a few ulps.
    const double slack = 1e-10 * y_norm;

    Eigen::VectorXcd r = y;
    Eigen::MatrixXcd active(op.rows(), 0);
    std::vector<char> used(static_cast<std::size_t>(op.cols()), 0);
    while (static_cast<int>(est.support.size()) < max_sparsity_ && est.residual_norm > residual_tol_ &&
           est.residual_norm > floor) {
        const Eigen::VectorXcd corr = op.adjoint(r);
        Eigen::Index best = -1;
        double best_val = -1.0;
        for (Eigen::Index g = 0; g < corr.size(); ++g) {
            if (used[g] || norms[g] == 0.0)
                continue;
            const double v = std::abs(corr[g]) / norms[g];
            if (v > best_val) {
                best_val = v;
                best = g;
            }
        }
        if (best < 0)
            break;
        used[best] = 1;
        est.support.push_back(static_cast<int>(best));
        active.conservativeResize(Eigen::NoChange, active.cols() + 1);
        active.col(active.cols() - 1) = op.column(static_cast<int>(best));

        const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(active);
        if (cod.rank() < active.cols() && !est.rank_deficient) {
            est.rank_deficient = true;
            std::cerr << "warning: omp active set of size " << active.cols() << " is rank deficient (rank "
                      << cod.rank() << "), using the minimum-norm fit\n";
        }
        est.coefficients = cod.solve(y);
        r = y - active * est.coefficients;
        const double rn = r.norm();
        if (rn > est.residual_norm + slack)
            throw NumericalError("omp: residual increased from " + std::to_string(est.residual_norm) + " to " +
                                     std::to_string(rn),
                                 static_cast<long>(est.support.size()));
        est.residual_norm = rn;
        est.residual_history.push_back(rn);
    }
    return est;
}

SparseEstimate omp_solve(const MeasurementSet &measurement, const SensingOperator &op, int max_sparsity,
                         double residual_tol)
{
    return OmpSolver(max_sparsity, residual_tol).solve(measurement, op);
}

std::unique_ptr<SparseSolver> make_solver(const std::string &name, int max_sparsity, double residual_tol)
{
    if (name == "omp")
        return std::make_unique<OmpSolver>(max_sparsity, residual_tol);
    throw std::invalid_argument("unknown solver '" + name + "'");
}

ChannelVector reconstruct_channel(const SparseEstimate &estimate, const DictionarySet &dicts)
{
    if (estimate.coefficients.size() != static_cast<Eigen::Index>(estimate.support.size()))
        throw std::invalid_argument("reconstruct_channel: support and coefficient counts differ");
    const int Nr = dicts.config.num_rx, Nt = dicts.config.num_tx, K = dicts.config.num_subcarriers;
    ChannelVector h;
    h.per_subcarrier.assign(K, Eigen::MatrixXcd::Zero(Nr, Nt));
    for (std::size_t i = 0; i < estimate.support.size(); ++i) {
        const GridIndex idx = decode_index(estimate.support[i], dicts.spec);
        const Eigen::MatrixXcd outer = dicts.rx.col(idx.theta) * dicts.tx.col(idx.phi).adjoint();
        const cplx a = estimate.coefficients[static_cast<Eigen::Index>(i)];
        for (int k = 0; k < K; ++k)
            h.per_subcarrier[k] += (a * dicts.delay(k, idx.tau)) * outer;
    }
    h.stacked = stack_subcarriers(h.per_subcarrier);
    return h;
}

double nmse(const Eigen::VectorXcd &h_true, const Eigen::VectorXcd &h_est)
{
    if (h_true.size() != h_est.size())
        throw std::invalid_argument("nmse: length mismatch");
    const double den = h_true.squaredNorm();
    if (!(den > 0.0))
        throw DegenerateInputError("nmse: true channel is zero");
    return (h_true - h_est).squaredNorm() / den;
}

double snr_to_sigma2(double total_power, int num_tx, int seq_len, int num_pilot_subcarriers, double snr_db)
{
    if (!(total_power > 0.0) || num_tx < 1 || seq_len < 1 || num_pilot_subcarriers < 1)
        throw std::invalid_argument("snr_to_sigma2: power and dimensions must be positive");
    if (std::isnan(snr_db))
        throw std::invalid_argument("snr_to_sigma2: SNR is NaN");
    if (snr_db == std::numeric_limits<double>::infinity())
        return 0.0;
    const double per_symbol = total_power / (static_cast<double>(num_tx) * seq_len * num_pilot_subcarriers);
    return per_symbol / std::pow(10.0, snr_db / 10.0);
}

} // namespace pilotcs
