// SPDX-License-Identifier: Apache-2.0
// ------------------------------------------------------------------------

#include "test_support.hpp"

#include <catch_amalgamated.hpp>

#include <set>

using namespace pilotcs;
using namespace pilotcs::testing;
using Catch::Approx;

namespace
{

// Nr = 2, Nt = M = K = Ntap = 4 on DFT grids with identity pilots: Psi has
// orthogonal columns, so mu(Psi) = 0.
struct LowCoherence
{
    SystemConfig s;
    DictionarySet d;
    PilotDesign design;

    LowCoherence()
    {
        s.num_rx = 2;
        s.num_tx = 4;
        s.seq_len = 4;
        s.num_subcarriers = 4;
        s.num_delay_taps = 4;
        s.total_power = 16.0;
        d = build_dictionaries(GridSpec{2, 4, 4}, s);
        design.seq_len = 4;
        design.total_power = 16.0;
        design.allocation = full_allocation(4);
        design.x.resize(4, 16);
        for (int k = 0; k < 4; ++k)
            design.x.middleCols(4 * k, 4) = Eigen::MatrixXcd::Identity(4, 4);
    }
};

void check_monotone(const SparseEstimate &est)
{
    for (std::size_t i = 1; i < est.residual_history.size(); ++i)
        CHECK(est.residual_history[i] <= est.residual_history[i - 1] * (1 + 1e-12));
}

} // namespace

TEST_CASE("synthesize: zero channel and determinism", "[estimator]")
{
    const SystemConfig s = desk_system();
    const PilotDesign design = random_design(s, 1, {2, 5, 11});
    ChannelVector zero;
    zero.per_subcarrier.assign(s.num_subcarriers, Eigen::MatrixXcd::Zero(s.num_rx, s.num_tx));
    zero.stacked = Eigen::VectorXcd::Zero(s.num_rx * s.num_tx * s.num_subcarriers);
    const MeasurementSet m0 = synthesize_measurement(zero, design, 0.0, 5);
    CHECK(m0.y.size() == s.num_rx * s.seq_len * 3);
    CHECK(m0.y.norm() == 0.0);

    const ChannelVector h = assemble_channel(sample_channel(s, 3, 10.0, 2), s);
    const MeasurementSet a = synthesize_measurement(h, design, 0.3, 77);
    const MeasurementSet b = synthesize_measurement(h, design, 0.3, 77);
    const MeasurementSet c = synthesize_measurement(h, design, 0.3, 78);
    CHECK(a.y == b.y);
    CHECK(a.y != c.y);
    CHECK(a.sigma2 == 0.3);
    CHECK(a.allocation == design.allocation);
}

TEST_CASE("synthesize: element layout and per-subcarrier least squares", "[estimator]")
{
    const LowCoherence f;
    const ChannelVector h = assemble_channel(sample_channel(f.s, 2, 10.0, 4), f.s);
    PilotDesign unitary = f.design;
    // Unitary DFT blocks scaled so that X_k X_k^H = I.
    for (int k = 0; k < 4; ++k)
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c)
                unitary.x(r, 4 * k + c) = std::exp(kJ * (2 * kPi * r * c / 4.0)) * 0.5 * std::exp(kJ * double(k));
    const MeasurementSet m = synthesize_measurement(h, unitary, 0.0, 1);
    for (int q = 0; q < 4; ++q) {
        Eigen::MatrixXcd yk(2, 4);
        for (int mm = 0; mm < 4; ++mm)
            for (int rx = 0; rx < 2; ++rx)
                yk(rx, mm) = m.y[rx + 2 * (mm + 4 * q)];
        const Eigen::MatrixXcd hk = yk * unitary.block(q).adjoint();
        CHECK(rel_err(hk, h.per_subcarrier[q]) <= 1e-12);
    }
}

TEST_CASE("synthesize: linear in h for a fixed noise draw", "[estimator]")
{
    const SystemConfig s = desk_system();
    const PilotDesign design = random_design(s, 3);
    const ChannelRealization r1 = sample_channel(s, 3, 10.0, 1);
    ChannelRealization r2 = r1, r12 = r1;
    for (std::size_t l = 0; l < r1.gain.size(); ++l) {
        r2.gain[l] = cplx(0.2, -0.1 * l);
        r12.gain[l] = r1.gain[l] + r2.gain[l];
    }
    ChannelVector zero = assemble_channel(r1, s);
    for (auto &hk : zero.per_subcarrier)
        hk.setZero();
    zero.stacked.setZero();
    const auto y = [&](const ChannelVector &h) { return synthesize_measurement(h, design, 0.5, 9).y; };
    const Eigen::VectorXcd lhs = y(assemble_channel(r12, s));
    const Eigen::VectorXcd rhs = y(assemble_channel(r1, s)) + y(assemble_channel(r2, s)) - y(zero);
    CHECK(rel_err(lhs, rhs) <= 1e-12);
}

TEST_CASE("synthesize: errors", "[estimator]")
{
    const SystemConfig s = desk_system();
    PilotDesign design = random_design(s, 3);
    const ChannelVector h = assemble_channel(sample_channel(s, 3, 10.0, 1), s);
    CHECK_THROWS_AS(synthesize_measurement(h, design, -1.0, 1), std::invalid_argument);
    SystemConfig other = s;
    other.num_tx = 4;
    const ChannelVector h4 = assemble_channel(sample_channel(other, 3, 10.0, 1), other);
    CHECK_THROWS_AS(synthesize_measurement(h4, design, 0.0, 1), std::invalid_argument);
    design.allocation.clear();
    CHECK_THROWS_AS(synthesize_measurement(h, design, 0.0, 1), std::invalid_argument);
}

TEST_CASE("OMP: 1-sparse exact recovery", "[estimator]")
{
    const SystemConfig s = desk_system();
    const DictionarySet d = build_dictionaries(desk_grids(), s);
    const PilotDesign design = random_design(s, 5, {0, 3, 4, 8, 9, 15});
    const SensingOperator op(design, d, true);
    for (int g : {0, 311, 2047}) {
        const cplx c(0.8, -0.6);
        MeasurementSet ms;
        ms.y = c * op.column(g);
        ms.allocation = design.allocation;
        ms.num_rx = s.num_rx;
        ms.seq_len = s.seq_len;
        const SparseEstimate est = omp_solve(ms, op, 3);
        REQUIRE_FALSE(est.support.empty());
        CHECK(est.support[0] == g);
        CHECK(std::abs(est.coefficients[0] - c) <= 1e-10);
        CHECK(est.residual_norm <= 1e-10 * ms.y.norm());
        CHECK(est.support.size() == 1); // stops once the residual vanishes
        check_monotone(est);
    }
}

TEST_CASE("OMP: 2-sparse recovery below the coherence bound", "[estimator]")
{
    const LowCoherence f;
    const SensingOperator op(f.design, f.d, true);
    const Eigen::MatrixXcd psi = op.dense();
    REQUIRE(mutual_coherence(psi) < 1.0 / 3.0);

    Rng rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        const int g1 = static_cast<int>(rng() % 32);
        int g2 = static_cast<int>(rng() % 32);
        if (g2 == g1)
            g2 = (g1 + 5) % 32;
        const cplx c1 = complex_normal(rng, 1.0), c2 = complex_normal(rng, 1.0);
        MeasurementSet ms;
        ms.y = c1 * psi.col(g1) + c2 * psi.col(g2);
        ms.allocation = f.design.allocation;
        ms.num_rx = 2;
        ms.seq_len = 4;
        const SparseEstimate est = omp_solve(ms, op, 2);
        const std::set<int> got(est.support.begin(), est.support.end());
        CHECK(got == std::set<int>{g1, g2});
        CHECK(est.residual_norm <= 1e-10 * ms.y.norm());
        check_monotone(est);
    }
}

TEST_CASE("OMP: zero measurement and errors", "[estimator]")
{
    const LowCoherence f;
    const SensingOperator op(f.design, f.d, true);
    MeasurementSet ms;
    ms.y = Eigen::VectorXcd::Zero(op.rows());
    ms.allocation = f.design.allocation;
    ms.num_rx = 2;
    ms.seq_len = 4;
    const SparseEstimate est = omp_solve(ms, op, 4);
    CHECK(est.support.empty());
    CHECK(est.coefficients.size() == 0);
    CHECK(est.residual_norm == 0.0);
    CHECK(reconstruct_channel(est, f.d).stacked.norm() == 0.0);

    CHECK_THROWS_AS(omp_solve(ms, op, 0), std::invalid_argument);
    CHECK_THROWS_AS(omp_solve(ms, op, static_cast<int>(op.rows()) + 1), std::invalid_argument);
    MeasurementSet short_y = ms;
    short_y.y = Eigen::VectorXcd::Zero(5);
    CHECK_THROWS_AS(omp_solve(short_y, op, 2), std::invalid_argument);

    const auto solver = make_solver("omp", 2);
    CHECK(solver->name() == "omp");
    CHECK(solver->solve(ms, op).support.empty());
    CHECK_THROWS_AS(make_solver("gamp-sbl", 2), std::invalid_argument);
}

TEST_CASE("reconstruct channel", "[estimator]")
{
    const DictionarySet d = build_dictionaries(desk_grids(), desk_system());
    SparseEstimate one;
    one.support = {123};
    one.coefficients = Eigen::VectorXcd::Ones(1);
    CHECK(rel_err(reconstruct_channel(one, d).stacked, kronecker_column(d, 123)) <= 1e-14);

    SparseEstimate two;
    two.support = {5, 1999};
    two.coefficients.resize(2);
    two.coefficients << cplx(0.5, 1.0), cplx(-2.0, 0.1);
    Eigen::VectorXcd alpha = Eigen::VectorXcd::Zero(d.num_columns());
    alpha[5] = two.coefficients[0];
    alpha[1999] = two.coefficients[1];
    const ChannelVector h = reconstruct_channel(two, d);
    CHECK(rel_err(h.stacked, virtual_channel(d, alpha)) <= 1e-12);
    CHECK(rel_err(stack_subcarriers(h.per_subcarrier), h.stacked) <= 1e-14);

    SparseEstimate bad = one;
    bad.support = {d.num_columns()};
    CHECK_THROWS_AS(reconstruct_channel(bad, d), std::invalid_argument);
    bad.support = {1, 2};
    CHECK_THROWS_AS(reconstruct_channel(bad, d), std::invalid_argument);
}

TEST_CASE("end-to-end noiseless on-grid recovery", "[estimator]")
{
    const LowCoherence f;
    const SensingOperator op(f.design, f.d, true);
    const std::vector<int> cols{3, 17, 30};
    const std::vector<cplx> gains{{1.0, 0.2}, {-0.3, 0.5}, {0.1, -0.2}};
    const ChannelVector h = assemble_channel(on_grid_realization(f.d, cols, gains), f.s);
    const MeasurementSet ms = synthesize_measurement(h, f.design, 0.0, 1);
    const SparseEstimate est = omp_solve(ms, op, 3);
    CHECK(std::set<int>(est.support.begin(), est.support.end()) == std::set<int>(cols.begin(), cols.end()));
    CHECK(nmse(h.stacked, reconstruct_channel(est, f.d).stacked) <= 1e-10);
    check_monotone(est);
}

TEST_CASE("nmse and SNR conversion", "[estimator]")
{
    Rng rng(1);
    Eigen::VectorXcd h(20), e(20);
    for (int i = 0; i < 20; ++i) {
        h[i] = complex_normal(rng, 1.0);
        e[i] = complex_normal(rng, 0.1);
    }
    CHECK(nmse(h, h) == 0.0);
    CHECK(nmse(h, Eigen::VectorXcd::Zero(20)) == Approx(1.0));
    const double base = nmse(h, h + e);
    CHECK(base >= 0.0);
    const cplx rot = std::exp(kJ * 1.1);
    const Eigen::VectorXcd hr = rot * h, er = rot * (h + e);
    CHECK(nmse(hr, er) == Approx(base).epsilon(1e-12));
    CHECK_THROWS_AS(nmse(Eigen::VectorXcd::Zero(3), Eigen::VectorXcd::Ones(3)), DegenerateInputError);
    CHECK_THROWS_AS(nmse(h, Eigen::VectorXcd::Zero(3)), std::invalid_argument);

    CHECK(snr_to_sigma2(8.0 * 4 * 6, 8, 4, 6, 0.0) == Approx(1.0));
    CHECK(snr_to_sigma2(1.0, 8, 4, 6, 10.0) == Approx(1.0 / (8 * 4 * 6) / 10.0));
    CHECK(snr_to_sigma2(1.0, 8, 4, 6, std::numeric_limits<double>::infinity()) == 0.0);
    CHECK_THROWS_AS(snr_to_sigma2(1.0, 8, 4, 0, 0.0), std::invalid_argument);
}
