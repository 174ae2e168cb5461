// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------

#include "pilotcs/coherence.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pilotcs
{

namespace
{

// |z|^p for even p without pow().
inline double abs_pow_even(cplx z, int p)
{
    const double a2 = std::norm(z);
    double r = 1.0;
    for (int i = 0; i < p / 2; ++i)
        r *= a2;
    return r;
}

// |z|^(p-2) for even p.
inline double abs_pow_even_minus2(cplx z, int p)
{
    const double a2 = std::norm(z);
    double r = 1.0;
    for (int i = 0; i < p / 2 - 1; ++i)
        r *= a2;
    return r;
}

void check_design_shape(const Eigen::MatrixXcd &x, const DictionarySet &dicts)
{
    const auto &c = dicts.config;
    if (x.rows() != c.num_tx || x.cols() != static_cast<Eigen::Index>(c.seq_len) * c.num_subcarriers)
        throw std::invalid_argument("pilot matrix must be Nt x (M K) = " + std::to_string(c.num_tx) + " x " +
                                    std::to_string(c.seq_len * c.num_subcarriers));
}

// Normalized Gram magnitudes of a dense matrix, with the zero-column check.
Eigen::MatrixXd normalized_gram(const Eigen::MatrixXcd &m)
{
    const Eigen::VectorXd norms = m.colwise().norm().transpose();
    for (Eigen::Index i = 0; i < norms.size(); ++i)
        if (!(norms[i] > 0.0))
            throw DegenerateInputError("coherence: column " + std::to_string(i) + " is zero");
    const Eigen::MatrixXcd gram = m.adjoint() * m;
    Eigen::MatrixXd r = gram.cwiseAbs();
    for (Eigen::Index j = 0; j < r.cols(); ++j)
        for (Eigen::Index i = 0; i < r.rows(); ++i)
            r(i, j) /= norms[i] * norms[j];
    return r;
}

} // namespace

// ---------------------------------------------------------------------------
// PilotDesign

Eigen::VectorXd block_norms(const Eigen::MatrixXcd &x, int seq_len)
{
    if (seq_len < 1 || x.cols() % seq_len != 0)
        throw std::invalid_argument("block_norms: column count must be a multiple of seq_len");
    const Eigen::Index K = x.cols() / seq_len;
    Eigen::VectorXd n(K);
    for (Eigen::Index k = 0; k < K; ++k)
        n[k] = x.middleCols(k * seq_len, seq_len).norm();
    return n;
}

Eigen::VectorXd PilotDesign::block_norms() const
{
    return pilotcs::block_norms(x, seq_len);
}

std::vector<int> full_allocation(int num_subcarriers)
{
    std::vector<int> q(num_subcarriers);
    for (int k = 0; k < num_subcarriers; ++k)
        q[k] = k;
    return q;
}

void PilotDesign::validate(double power_rel_tol) const
{
    if (seq_len < 1 || x.rows() < 1 || x.cols() == 0 || x.cols() % seq_len != 0)
        throw std::invalid_argument("pilot design: X must be Nt x (M K) with M >= 1");
    const int K = num_subcarriers();
    for (std::size_t i = 0; i < allocation.size(); ++i) {
        if (allocation[i] < 0 || allocation[i] >= K)
            throw std::invalid_argument("pilot design: allocation index out of range");
        if (i > 0 && allocation[i] <= allocation[i - 1])
            throw std::invalid_argument("pilot design: allocation must be sorted and unique");
    }
    if (!(total_power > 0.0))
        throw std::invalid_argument("pilot design: total power must be > 0");
    const double energy = x.squaredNorm();
    if (std::abs(energy - total_power) > power_rel_tol * total_power)
        throw std::invalid_argument("pilot design: sum of block energies differs from total power");
}

// ---------------------------------------------------------------------------
// Omega and the sensing operator

Eigen::MatrixXcd build_omega(const Eigen::MatrixXcd &x, const DictionarySet &dicts)
{
    check_design_shape(x, dicts);
    const int M = dicts.config.seq_len, K = dicts.config.num_subcarriers;
    const int Gph = dicts.spec.g_phi, Gta = dicts.spec.g_tau;
    Eigen::MatrixXcd omega(static_cast<Eigen::Index>(M) * K, static_cast<Eigen::Index>(Gph) * Gta);
    for (int k = 0; k < K; ++k) {
        // Row phi of R holds a_t^H(phi) X_k.
        const Eigen::MatrixXcd r = dicts.tx.adjoint() * x.middleCols(static_cast<Eigen::Index>(k) * M, M);
        for (int tau = 0; tau < Gta; ++tau)
            for (int phi = 0; phi < Gph; ++phi)
                omega.col(phi + static_cast<Eigen::Index>(Gph) * tau).segment(static_cast<Eigen::Index>(M) * k, M) =
                    dicts.delay(k, tau) * r.row(phi).transpose();
    }
    return omega;
}

Eigen::MatrixXcd build_omega(const PilotDesign &design, const DictionarySet &dicts)
{
    return build_omega(design.x, dicts);
}

SensingOperator::SensingOperator(const PilotDesign &design, const DictionarySet &dicts, bool restrict_to_allocation)
{
    check_design_shape(design.x, dicts);
    const int M = dicts.config.seq_len;
    if (restrict_to_allocation) {
        if (design.allocation.empty())
            throw std::invalid_argument("sensing operator: allocation is empty");
        subcarriers_ = design.allocation;
    } else {
        subcarriers_ = full_allocation(dicts.config.num_subcarriers);
    }
    const Eigen::MatrixXcd full = build_omega(design.x, dicts);
    omega_.resize(static_cast<Eigen::Index>(M) * subcarriers_.size(), full.cols());
    for (std::size_t q = 0; q < subcarriers_.size(); ++q)
        omega_.middleRows(static_cast<Eigen::Index>(M) * q, M) =
            full.middleRows(static_cast<Eigen::Index>(M) * subcarriers_[q], M);
    rx_ = dicts.rx;

    const Eigen::VectorXd omega_norms = omega_.colwise().norm().transpose();
    const Eigen::VectorXd rx_norms = rx_.colwise().norm().transpose();
    column_norms_.resize(cols());
    for (Eigen::Index i = 0; i < omega_norms.size(); ++i)
        for (Eigen::Index t = 0; t < rx_norms.size(); ++t)
            column_norms_[t + rx_norms.size() * i] = omega_norms[i] * rx_norms[t];
}

Eigen::VectorXcd SensingOperator::apply(const Eigen::VectorXcd &alpha) const
{
    if (alpha.size() != cols())
        throw std::invalid_argument("sensing operator: coefficient length must equal G");
    // (Omega (x) A) vec(Z) = vec(A Z Omega^T)
    const Eigen::MatrixXcd z = alpha.reshaped(rx_.cols(), omega_.cols());
    const Eigen::MatrixXcd y = (rx_ * z) * omega_.transpose();
    return y.reshaped();
}

Eigen::VectorXcd SensingOperator::adjoint(const Eigen::VectorXcd &y) const
{
    if (y.size() != rows())
        throw std::invalid_argument("sensing operator: measurement length must equal N");
    const Eigen::MatrixXcd ym = y.reshaped(rx_.rows(), omega_.rows());
    const Eigen::MatrixXcd z = rx_.adjoint() * (ym * omega_.conjugate());
    return z.reshaped();
}

Eigen::VectorXcd SensingOperator::column(int g) const
{
    if (g < 0 || g >= cols())
        throw std::invalid_argument("sensing operator: column index out of range");
    const Eigen::Index theta = g % rx_.cols();
    const Eigen::Index w = g / rx_.cols();
    Eigen::VectorXcd col(rows());
    for (Eigen::Index r = 0; r < omega_.rows(); ++r)
        col.segment(r * rx_.rows(), rx_.rows()) = omega_(r, w) * rx_.col(theta);
    return col;
}

Eigen::MatrixXcd SensingOperator::dense() const
{
    if (static_cast<std::int64_t>(rows()) * cols() > kDenseEntryCap)
        throw CapacityError("sensing operator: dense form needs " + std::to_string(rows()) + " x " +
                            std::to_string(cols()) + " entries, above the cap of " +
                            std::to_string(kDenseEntryCap));
    Eigen::MatrixXcd d(rows(), cols());
    for (Eigen::Index g = 0; g < cols(); ++g)
        d.col(g) = column(static_cast<int>(g));
    return d;
}

cplx c_omega(const PilotDesign &design, const DictionarySet &dicts, int tau, int tau2, int phi, int phi2)
{
    check_design_shape(design.x, dicts);
    const int Gph = dicts.spec.g_phi, Gta = dicts.spec.g_tau;
    if (tau < 0 || tau >= Gta || tau2 < 0 || tau2 >= Gta || phi < 0 || phi >= Gph || phi2 < 0 || phi2 >= Gph)
        throw std::invalid_argument("c_omega: grid index out of range");
    const int M = design.seq_len, K = dicts.config.num_subcarriers, Nt = dicts.config.num_tx;
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(Nt, Nt);
    for (int k = 0; k < K; ++k) {
        const auto xk = design.x.middleCols(static_cast<Eigen::Index>(k) * M, M);
        acc += std::conj(dicts.delay(k, tau)) * dicts.delay(k, tau2) * (xk.conjugate() * xk.transpose());
    }
    return (dicts.tx.col(phi).transpose() * acc * dicts.tx.col(phi2).conjugate())(0, 0);
}

// ---------------------------------------------------------------------------
// OmegaGram

OmegaGram::OmegaGram(const DictionarySet &dicts)
    : tx_(dicts.tx), seq_len_(dicts.config.seq_len), num_subcarriers_(dicts.config.num_subcarriers),
      g_phi_(dicts.spec.g_phi), g_tau_(dicts.spec.g_tau)
{
    const int K = num_subcarriers_, Gta = g_tau_;
    const auto phase = [&](int k, int t, int t2) { return std::conj(dicts.delay(k, t)) * dicts.delay(k, t2); };

    // Try lag classes d = tau2 - tau; accept only if every pair matches its representative.
    uniform_ = true;
    for (int t = 0; t < Gta && uniform_; ++t) {
        for (int t2 = 0; t2 < Gta && uniform_; ++t2) {
            const int d = t2 - t;
            const int rt = d >= 0 ? 0 : -d;
            const int rt2 = d >= 0 ? d : 0;
            for (int k = 0; k < K; ++k) {
                if (std::abs(phase(k, t, t2) - phase(k, rt, rt2)) > 1e-12) {
                    uniform_ = false;
                    break;
                }
            }
        }
    }

    class_of_.assign(static_cast<std::size_t>(Gta) * Gta, 0);
    if (uniform_) {
        const int classes = 2 * Gta - 1;
        lag_phase_.resize(K, classes);
        multiplicity_.assign(classes, 0.0);
        for (int d = -(Gta - 1); d <= Gta - 1; ++d) {
            const int c = d + Gta - 1;
            const int rt = d >= 0 ? 0 : -d;
            const int rt2 = d >= 0 ? d : 0;
            for (int k = 0; k < K; ++k)
                lag_phase_(k, c) = phase(k, rt, rt2);
        }
        for (int t = 0; t < Gta; ++t)
            for (int t2 = 0; t2 < Gta; ++t2) {
                const int c = t2 - t + Gta - 1;
                class_of_[static_cast<std::size_t>(t) * Gta + t2] = c;
                multiplicity_[c] += 1.0;
            }
    } else {
        const int classes = Gta * Gta;
        lag_phase_.resize(K, classes);
        multiplicity_.assign(classes, 1.0);
        for (int t = 0; t < Gta; ++t)
            for (int t2 = 0; t2 < Gta; ++t2) {
                const int c = t * Gta + t2;
                class_of_[static_cast<std::size_t>(c)] = c;
                for (int k = 0; k < K; ++k)
                    lag_phase_(k, c) = phase(k, t, t2);
            }
    }
}

Eigen::MatrixXcd OmegaGram::stacked_products(const Eigen::MatrixXcd &x, std::vector<Eigen::MatrixXcd> *r_blocks) const
{
    if (x.rows() != tx_.rows() || x.cols() != static_cast<Eigen::Index>(seq_len_) * num_subcarriers_)
        throw std::invalid_argument("OmegaGram: pilot matrix has the wrong shape");
    const Eigen::Index G2 = static_cast<Eigen::Index>(g_phi_) * g_phi_;
    Eigen::MatrixXcd products(G2, num_subcarriers_);
    if (r_blocks)
        r_blocks->resize(num_subcarriers_);
    for (int k = 0; k < num_subcarriers_; ++k) {
        Eigen::MatrixXcd r = tx_.adjoint() * x.middleCols(static_cast<Eigen::Index>(k) * seq_len_, seq_len_);
        const Eigen::MatrixXcd pk = r.conjugate() * r.transpose();
        products.col(k) = pk.reshaped();
        if (r_blocks)
            (*r_blocks)[k] = std::move(r);
    }
    return products;
}

Eigen::MatrixXcd OmegaGram::lag_blocks(const Eigen::MatrixXcd &x) const
{
    return stacked_products(x, nullptr) * lag_phase_;
}

double OmegaGram::power_sum(const Eigen::MatrixXcd &x, int p) const
{
    check_even_p(p);
    const Eigen::MatrixXcd blocks = lag_blocks(x);
    double v = 0.0;
    for (Eigen::Index c = 0; c < blocks.cols(); ++c) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < blocks.rows(); ++i)
            s += abs_pow_even(blocks(i, c), p);
        v += multiplicity_[c] * s;
    }
    return v;
}

double OmegaGram::power_sum_gradient(const Eigen::MatrixXcd &x, int p, Eigen::MatrixXcd &grad) const
{
    check_even_p(p);
    std::vector<Eigen::MatrixXcd> r_blocks;
    const Eigen::MatrixXcd blocks = stacked_products(x, &r_blocks) * lag_phase_;

    // d|c|^p = W^* dc + W dc^*, W = (p/2) |c|^(p-2) c, weighted by class multiplicity.
    double v = 0.0;
    Eigen::MatrixXcd weights(blocks.rows(), blocks.cols());
    for (Eigen::Index c = 0; c < blocks.cols(); ++c) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < blocks.rows(); ++i) {
            const cplx z = blocks(i, c);
            s += abs_pow_even(z, p);
            weights(i, c) = (multiplicity_[c] * 0.5 * p * abs_pow_even_minus2(z, p)) * z;
        }
        v += multiplicity_[c] * s;
    }

    // E_k(phi, phi2) = sum_c conj(beta_k(c)) W_c(phi, phi2)
    const Eigen::MatrixXcd e = weights * lag_phase_.adjoint();
    grad.resize(x.rows(), x.cols());
    for (int k = 0; k < num_subcarriers_; ++k) {
        const Eigen::MatrixXcd ek = e.col(k).reshaped(g_phi_, g_phi_);
        const Eigen::MatrixXcd sym = ek.conjugate() + ek.transpose();
        grad.middleCols(static_cast<Eigen::Index>(k) * seq_len_, seq_len_) = tx_ * (sym * r_blocks[k]);
    }
    return v;
}

// ---------------------------------------------------------------------------
// Objectives and metrics

void check_even_p(int p)
{
    if (p < 2 || p % 2 != 0)
        throw std::invalid_argument("coherence exponent p must be an even integer >= 2");
}

double f_omega(const Eigen::MatrixXcd &x, const OmegaGram &gram, int p)
{
    return std::pow(gram.power_sum(x, p), 1.0 / p);
}

double f_omega(const PilotDesign &design, const DictionarySet &dicts, int p)
{
    check_design_shape(design.x, dicts);
    return f_omega(design.x, OmegaGram(dicts), p);
}

double f_psi_reference(const PilotDesign &design, const DictionarySet &dicts, int p)
{
    check_even_p(p);
    if (dicts.num_columns() > kReferenceMaxColumns)
        throw CapacityError("f_psi_reference: G = " + std::to_string(dicts.num_columns()) + " exceeds " +
                            std::to_string(kReferenceMaxColumns));
    const SensingOperator op(design, dicts, false);
    const Eigen::MatrixXcd psi = op.dense();
    const Eigen::MatrixXcd gram = psi.adjoint() * psi;
    double s = 0.0;
    for (Eigen::Index j = 0; j < gram.cols(); ++j)
        for (Eigen::Index i = 0; i < gram.rows(); ++i)
            s += abs_pow_even(gram(i, j), p);
    return std::pow(s, 1.0 / p);
}

double t_p_dictionary(const Eigen::MatrixXcd &rx, int p)
{
    check_even_p(p);
    const Eigen::MatrixXcd gram = rx.adjoint() * rx;
    double s = 0.0;
    for (Eigen::Index j = 0; j < gram.cols(); ++j)
        for (Eigen::Index i = 0; i < gram.rows(); ++i)
            s += abs_pow_even(gram(i, j), p);
    return std::pow(s, 1.0 / p);
}

double mutual_coherence(const Eigen::MatrixXcd &matrix)
{
    const Eigen::MatrixXd r = normalized_gram(matrix);
    double mu = 0.0;
    for (Eigen::Index j = 0; j < r.cols(); ++j)
        for (Eigen::Index i = 0; i < j; ++i)
            mu = std::max(mu, r(i, j));
    return std::min(mu, 1.0);
}

double mutual_coherence(const SensingOperator &op)
{
    double mu = mutual_coherence(op.omega());
    if (op.rx().cols() > 1)
        mu = std::max(mu, mutual_coherence(op.rx()));
    return mu;
}

double generalized_coherence(const Eigen::MatrixXcd &matrix, double p)
{
    if (!(p > 0.0))
        throw std::invalid_argument("generalized_coherence: p must be > 0");
    const Eigen::MatrixXd r = normalized_gram(matrix);
    // Scale by the maximum to keep large p finite.
    double mu = 0.0;
    for (Eigen::Index j = 0; j < r.cols(); ++j)
        for (Eigen::Index i = 0; i < r.rows(); ++i)
            if (i != j)
                mu = std::max(mu, r(i, j));
    if (mu == 0.0)
        return 0.0;
    double s = 0.0;
    for (Eigen::Index j = 0; j < r.cols(); ++j)
        for (Eigen::Index i = 0; i < r.rows(); ++i)
            if (i != j)
                s += std::pow(r(i, j) / mu, p);
    return mu * std::pow(s, 1.0 / p);
}

double welch_bound(long n, long g)
{
    if (n < 1 || g < 2)
        throw std::invalid_argument("welch_bound: need N >= 1 and G > 1");
    if (g <= n)
        return 0.0;
    return std::sqrt(static_cast<double>(g - n) / (static_cast<double>(n) * (g - 1)));
}

CoherenceReport coherence_report(const PilotDesign &design, const DictionarySet &dicts, int p,
                                 std::uint64_t sample_seed)
{
    check_even_p(p);
    check_design_shape(design.x, dicts);
    const OmegaGram gram(dicts);
    const Eigen::MatrixXcd blocks = gram.lag_blocks(design.x);
    const int Gph = dicts.spec.g_phi, Gta = dicts.spec.g_tau;
    const Eigen::Index cols = static_cast<Eigen::Index>(Gph) * Gta;

    CoherenceReport rep;
    rep.p = p;
    rep.g = cols;
    // Rank of Omega is at most M times the number of non-zero blocks.
    const Eigen::VectorXd bn = design.block_norms();
    const long active = static_cast<long>((bn.array() > 0.0).count());
    rep.n = static_cast<long>(design.seq_len) * std::max(1L, active);
    rep.welch_bound = welch_bound(rep.n, rep.g);

    Eigen::VectorXd norms(cols);
    for (int t = 0; t < Gta; ++t)
        for (int f = 0; f < Gph; ++f) {
            const double n2 = gram.entry(blocks, t, t, f, f).real();
            if (!(n2 > 0.0))
                throw DegenerateInputError("coherence_report: Omega column " + std::to_string(f + Gph * t) +
                                           " is zero");
            norms[f + Gph * t] = std::sqrt(n2);
        }
    rep.column_norm_cdf.assign(norms.data(), norms.data() + cols);
    std::sort(rep.column_norm_cdf.begin(), rep.column_norm_cdf.end());

    const auto normalized = [&](Eigen::Index i, Eigen::Index j) {
        const cplx c = gram.entry(blocks, static_cast<int>(i / Gph), static_cast<int>(j / Gph),
                                  static_cast<int>(i % Gph), static_cast<int>(j % Gph));
        return std::min(1.0, std::abs(c) / (norms[i] * norms[j]));
    };

    const std::int64_t pairs = static_cast<std::int64_t>(cols) * (cols - 1) / 2;
    rep.subsampled = pairs > kCdfPairCap;
    if (!rep.subsampled)
        rep.inner_product_cdf.reserve(static_cast<std::size_t>(pairs));

    double mu = 0.0, sum_p = 0.0;
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < j; ++i) {
            const double r = normalized(i, j);
            mu = std::max(mu, r);
            sum_p += 2.0 * std::pow(r, p);
            if (!rep.subsampled)
                rep.inner_product_cdf.push_back(r);
        }
    if (rep.subsampled) {
        Rng rng(sample_seed);
        std::uniform_int_distribution<Eigen::Index> pick(0, cols - 1);
        rep.inner_product_cdf.reserve(kCdfSampleSize);
        while (static_cast<std::int64_t>(rep.inner_product_cdf.size()) < kCdfSampleSize) {
            const Eigen::Index i = pick(rng), j = pick(rng);
            if (i != j)
                rep.inner_product_cdf.push_back(normalized(std::min(i, j), std::max(i, j)));
        }
    }
    std::sort(rep.inner_product_cdf.begin(), rep.inner_product_cdf.end());
    rep.mutual_coherence = mu;
    rep.generalized_p = std::pow(sum_p, 1.0 / p);

    // Psi = Omega_S (x) A_r: normalized entries factor, so the ordered p-sum
    // over all pairs is (T_Omega)(T_A) minus the G unit diagonal terms.
    const Eigen::MatrixXd ra = normalized_gram(dicts.rx);
    double mu_a = 0.0, t_a = 0.0;
    for (Eigen::Index j = 0; j < ra.cols(); ++j)
        for (Eigen::Index i = 0; i < ra.rows(); ++i) {
            t_a += std::pow(std::min(ra(i, j), 1.0), p);
            if (i != j)
                mu_a = std::max(mu_a, ra(i, j));
        }
    const double t_omega = sum_p + static_cast<double>(cols);
    const double g_total = static_cast<double>(cols) * dicts.spec.g_theta;
    rep.psi_mutual_coherence = std::max(mu, std::min(mu_a, 1.0));
    rep.psi_generalized_p = std::pow(std::max(0.0, t_omega * t_a - g_total), 1.0 / p);
    rep.psi_n = static_cast<long>(dicts.config.num_rx) * rep.n;
    rep.psi_g = static_cast<long>(g_total);
    rep.psi_welch_bound = welch_bound(rep.psi_n, rep.psi_g);
    return rep;
}

} // namespace pilotcs
