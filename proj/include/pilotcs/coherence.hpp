// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------
// Sensing matrix, its AoA-free factor Omega, and coherence metrics.
//
// With S selecting the allocated subcarriers and D = X_blk^T (x) I_Nr the
// sensing matrix factors as Psi = Omega (x) A_r, where Omega has M K rows
// (row m + M k) and G_phi G_tau columns (column phi + G_phi tau). Column g of
// Psi pairs Omega column g / G_theta with AoA column g % G_theta.

#ifndef PILOTCS_COHERENCE_HPP
#define PILOTCS_COHERENCE_HPP

#include "pilotcs/dictionary.hpp"

#include <cstdint>
#include <vector>

namespace pilotcs
{

/// Pilot blocks X_k (Nt x M) stored side by side as X = [X_1 .. X_K], Nt x M K.
/// Subcarrier indices in `allocation` are 0-based and sorted.
struct PilotDesign
{
    int seq_len = 0;
    Eigen::MatrixXcd x;
    std::vector<int> allocation;
    double total_power = 0.0;

    int num_tx() const { return static_cast<int>(x.rows()); }
    int num_subcarriers() const { return seq_len > 0 ? static_cast<int>(x.cols() / seq_len) : 0; }
    auto block(int k) const { return x.middleCols(static_cast<Eigen::Index>(k) * seq_len, seq_len); }
    auto block(int k) { return x.middleCols(static_cast<Eigen::Index>(k) * seq_len, seq_len); }
    Eigen::VectorXd block_norms() const;

    /// Shape, allocation ordering/range and power checks; throws std::invalid_argument.
    void validate(double power_rel_tol = 1e-10) const;
};

Eigen::VectorXd block_norms(const Eigen::MatrixXcd &x, int seq_len);
std::vector<int> full_allocation(int num_subcarriers);

/// Matrix-free Psi = Omega_S (x) A_r. With restrict_to_allocation the rows of
/// Omega are limited to the allocated subcarriers (N = Nr M Q), otherwise all
/// K subcarriers are kept (N = Nr M K).
class SensingOperator
{
public:
    static constexpr std::int64_t kDenseEntryCap = std::int64_t{1} << 24;

    SensingOperator(const PilotDesign &design, const DictionarySet &dicts, bool restrict_to_allocation);

    Eigen::Index rows() const { return omega_.rows() * rx_.rows(); }
    Eigen::Index cols() const { return omega_.cols() * rx_.cols(); }

    Eigen::VectorXcd apply(const Eigen::VectorXcd &alpha) const;
    Eigen::VectorXcd adjoint(const Eigen::VectorXcd &y) const;
    Eigen::VectorXcd column(int g) const;
    /// ||psi_g|| = ||a_r|| * ||omega||, computed once.
    const Eigen::VectorXd &column_norms() const { return column_norms_; }

    /// Dense N x G matrix; throws CapacityError above kDenseEntryCap entries.
    Eigen::MatrixXcd dense() const;

    const Eigen::MatrixXcd &omega() const { return omega_; }
    const Eigen::MatrixXcd &rx() const { return rx_; }
    const std::vector<int> &subcarriers() const { return subcarriers_; }

private:
    Eigen::MatrixXcd omega_;
    Eigen::MatrixXcd rx_;
    std::vector<int> subcarriers_;
    Eigen::VectorXd column_norms_;
};

/// Omega over all K subcarriers, (M K) x (G_phi G_tau).
Eigen::MatrixXcd build_omega(const PilotDesign &design, const DictionarySet &dicts);
Eigen::MatrixXcd build_omega(const Eigen::MatrixXcd &x, const DictionarySet &dicts);

/// omega_{tau,phi}^H omega_{tau2,phi2} from the subcarrier-summed Nt x Nt form.
cplx c_omega(const PilotDesign &design, const DictionarySet &dicts, int tau, int tau2, int phi, int phi2);

/// Fast evaluation of the Omega Gram matrix and of v_p = sum |c|^p.
///
/// Every Gram entry has the form sum_k conj(b_k(tau)) b_k(tau2) P_k(phi, phi2)
/// with P_k = conj(R_k) R_k^T and R_k = A_t^H X_k. The delay factor only
/// depends on the pair (tau, tau2) through a "lag class": on a uniform delay
/// grid it is a function of tau2 - tau, so the G_tau^2 blocks collapse to
/// 2 G_tau - 1 distinct G_phi x G_phi blocks, each weighted by its number of
/// occurrences. Non-uniform grids fall back to one class per pair.
class OmegaGram
{
public:
    explicit OmegaGram(const DictionarySet &dicts);

    int num_classes() const { return static_cast<int>(multiplicity_.size()); }
    bool uniform_delays() const { return uniform_; }
    int lag_class(int tau, int tau2) const { return class_of_[static_cast<std::size_t>(tau) * g_tau_ + tau2]; }
    double multiplicity(int c) const { return multiplicity_[c]; }

    /// Distinct Gram blocks, (G_phi^2) x classes; entry phi + G_phi phi2 of
    /// column lag_class(tau, tau2) is the Gram entry ((tau,phi), (tau2,phi2)).
    Eigen::MatrixXcd lag_blocks(const Eigen::MatrixXcd &x) const;

    cplx entry(const Eigen::MatrixXcd &blocks, int tau, int tau2, int phi, int phi2) const
    {
        return blocks(phi + static_cast<Eigen::Index>(g_phi_) * phi2, lag_class(tau, tau2));
    }

    /// v_p over all ordered tuples, diagonal included.
    double power_sum(const Eigen::MatrixXcd &x, int p) const;

    /// v_p together with its Wirtinger gradient dv_p / dX^*, shaped like X.
    double power_sum_gradient(const Eigen::MatrixXcd &x, int p, Eigen::MatrixXcd &grad) const;

    int g_phi() const { return g_phi_; }
    int g_tau() const { return g_tau_; }

private:
    Eigen::MatrixXcd stacked_products(const Eigen::MatrixXcd &x, std::vector<Eigen::MatrixXcd> *r_blocks) const;

    Eigen::MatrixXcd tx_;
    int seq_len_ = 0;
    int num_subcarriers_ = 0;
    int g_phi_ = 0;
    int g_tau_ = 0;
    bool uniform_ = false;
    Eigen::MatrixXcd lag_phase_; // K x classes: conj(b_k(tau)) b_k(tau2)
    std::vector<int> class_of_;
    std::vector<double> multiplicity_;
};

void check_even_p(int p);

/// (sum over all ordered tuples of |c_omega|^p)^(1/p).
double f_omega(const PilotDesign &design, const DictionarySet &dicts, int p);
double f_omega(const Eigen::MatrixXcd &x, const OmegaGram &gram, int p);

/// Brute-force (sum_{i,j} |psi_i^H psi_j|^p)^(1/p) on the dense all-subcarrier
/// sensing matrix. Test-scale only: throws CapacityError when G > kReferenceMaxColumns.
inline constexpr int kReferenceMaxColumns = 4096;
double f_psi_reference(const PilotDesign &design, const DictionarySet &dicts, int p);

/// (sum_{g,g'} |a_r(g)^H a_r(g')|^p)^(1/p).
double t_p_dictionary(const Eigen::MatrixXcd &rx, int p);

/// max_{i != j} |a_i^H a_j| / (||a_i|| ||a_j||); throws DegenerateInputError on a zero column.
double mutual_coherence(const Eigen::MatrixXcd &matrix);
/// Uses mu(Omega (x) A_r) = max(mu(Omega), mu(A_r)) for unit-modulus A_r.
double mutual_coherence(const SensingOperator &op);
/// (sum_{i != j} (normalized |a_i^H a_j|)^p)^(1/p) over ordered pairs.
double generalized_coherence(const Eigen::MatrixXcd &matrix, double p);
/// sqrt((G - N) / (N (G - 1))), zero when G <= N.
double welch_bound(long n, long g);

struct CoherenceReport
{
    // Omega-level metrics; N = M Q is the number of active rows, G = G_phi G_tau.
    double mutual_coherence = 0.0;
    double generalized_p = 0.0;
    int p = 0;
    double welch_bound = 0.0;
    long n = 0;
    long g = 0;
    // Same metrics for the full sensing matrix Psi = Omega_S (x) A_r.
    double psi_mutual_coherence = 0.0;
    double psi_generalized_p = 0.0;
    double psi_welch_bound = 0.0;
    long psi_n = 0;
    long psi_g = 0;

    std::vector<double> inner_product_cdf; // normalized |omega_i^H omega_j|, i < j, ascending
    std::vector<double> column_norm_cdf;   // ||omega||, ascending
    bool subsampled = false;
};

/// Above kCdfPairCap unordered pairs the inner-product list is a seeded
/// uniform subsample of kCdfSampleSize pairs; the scalar metrics are exact.
inline constexpr std::int64_t kCdfPairCap = 10'000'000;
inline constexpr std::int64_t kCdfSampleSize = 1'000'000;

CoherenceReport coherence_report(const PilotDesign &design, const DictionarySet &dicts, int p,
                                 std::uint64_t sample_seed = 0);

} // namespace pilotcs

#endif
