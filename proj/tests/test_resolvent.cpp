#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>

#include "beamobs/resolvent.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace beamobs;

namespace {

// F = 0 system; gammas are zero so build_gain cannot be used.
ModalSystem ungained(const ModalSystem& sys) {
    ModalSystem out = sys;
    out.gammas.setZero();
    out.F.setZero();
    return out;
}

Eigen::MatrixXd shifted_generator(const ModalSystem& sys, double lambda) {
    const Eigen::Index n2 = 2 * sys.n_modes();
    return error_generator(sys.omegas, sys.C1, sys.gammas) - lambda * Eigen::MatrixXd::Identity(n2, n2);
}

} // namespace

TEST_SUITE("resolvent") {

TEST_CASE("M for a single mode and output") {
    Eigen::VectorXd w(1);
    w << 3.0;
    Eigen::MatrixXd c(1, 1);
    c << 0.7;
    const auto sys = make_system(w, Eigen::MatrixXd::Zero(1, 1), c, Eigen::VectorXd::Constant(1, 2.0));
    const double lam = 0.2;
    const auto ctx = build_context(sys, lam);
    CHECK(ctx.M(0, 0) == doctest::Approx(1.0 + lam * 2.0 * 0.49 / (lam * lam + 9.0)).epsilon(1e-15));
    CHECK(ctx.M_inv(0, 0) * ctx.M(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("M tends to the identity") {
    const auto sys = fixtures::default_system(20, 6.0);
    const auto tiny = build_context(sys, 1e-12);
    CHECK((tiny.M - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-10);
    for (double lam : {1e-3, 1e-2, 1e-1}) {
        const auto ctx = build_context(sys, lam);
        CHECK((ctx.M * ctx.M_inv - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() <= 1e-12);
    }
    const auto rep = m_perturbation(sys, {1e-4, 1e-3, 1e-2});
    REQUIRE(rep.samples.size() == 3);
    CHECK(rep.identity_constant <= rep.predicted_constant * (1.0 + 1e-9));
    for (const auto& s : rep.samples) {
        CHECK(s.distance_to_identity <= rep.identity_constant * s.lambda * (1.0 + 1e-12));
        CHECK(s.inverse_norm <= 1.0 + rep.inverse_constant * s.lambda + 1e-12);
    }
}

TEST_CASE("context errors") {
    const auto sys = fixtures::default_system(4, 6.0);
    auto kind_of = [&](double lam) {
        try {
            build_context(sys, lam);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Io;
    };
    CHECK(kind_of(0.0) == ErrorKind::Parameter);
    CHECK(kind_of(-1.0) == ErrorKind::Parameter);

    // M is singular when lambda gamma c^2/(lambda^2 + omega^2) = -1, impossible for
    // gamma > 0; force it with a negative gain written directly.
    ModalSystem bad = make_system(Eigen::VectorXd::Constant(1, 1.0), Eigen::MatrixXd::Zero(1, 1),
                                  Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Ones(1));
    bad.gammas[0] = -2.0;  // M = 1 - 2 lambda/(lambda^2 + 1) = 0 at lambda = 1
    try {
        build_context(bad, 1.0);
        FAIL("expected shift-too-large");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ShiftTooLarge);
    }
}

TEST_CASE("resolvent_apply against a dense solve") {
    std::mt19937 rng(2024);
    for (int n : {5, 20}) {
        const auto sys = fixtures::default_system(n, 6.0);
        for (double lam : {1e-3, 1e-2, 1e-1}) {
            CAPTURE(n);
            CAPTURE(lam);
            const auto ctx = build_context(sys, lam);
            const Eigen::MatrixXd shifted = shifted_generator(sys, lam);
            const Eigen::PartialPivLU<Eigen::MatrixXd> dense(shifted);
            for (int trial = 0; trial < 3; ++trial) {
                const Eigen::VectorXd rhs = fixtures::random_vector(rng, 2 * n);
                const Eigen::VectorXd x = resolvent_apply(ctx, sys, ErrorState::from_stacked(rhs)).stacked();
                CHECK((shifted * x - rhs).norm() <= 1e-10 * rhs.norm());
                const Eigen::VectorXd oracle = dense.solve(rhs);
                CHECK((x - oracle).norm() <= 1e-10 * oracle.norm());
            }
        }
    }
    const auto sys = fixtures::default_system(5, 6.0);
    const auto ctx = build_context(sys, 0.01);
    CHECK(resolvent_apply(ctx, sys, ErrorState::zero(5)).stacked().isZero(0.0));
}

TEST_CASE("ungained resolvent is diagonal") {
    const auto sys = ungained(fixtures::default_system(8, 6.0));
    const double lam = 0.05;
    const auto ctx = build_context(sys, lam);
    std::mt19937 rng(1);
    const ErrorState rhs = ErrorState::from_stacked(fixtures::random_vector(rng, 16));
    const ErrorState x = resolvent_apply(ctx, sys, rhs);
    for (int j = 0; j < 8; ++j) {
        const double w = sys.omegas[j], d = lam * lam + w * w;
        CHECK(x.Delta[j] == doctest::Approx(-(lam * rhs.Delta[j] + w * rhs.delta[j]) / d).epsilon(1e-14));
        CHECK(x.delta[j] == doctest::Approx((w * rhs.Delta[j] - lam * rhs.delta[j]) / d).epsilon(1e-14));
    }

    const auto b = resolvent_blocks(ctx, sys);
    for (int j = 0; j < 8; ++j) {
        const double d = lam * lam + sys.omegas[j] * sys.omegas[j];
        CHECK(b.R1(j, j) == doctest::Approx(-lam / d));
        for (int i = 0; i < 8; ++i)
            if (i != j) CHECK(b.R1(j, i) == 0.0);
    }
    double closed = 0.0;
    for (int j = 0; j < 8; ++j) closed += 2.0 / (lam * lam + sys.omegas[j] * sys.omegas[j]);
    CHECK(hs_norm(b) == doctest::Approx(std::sqrt(closed)).epsilon(1e-12));

    double bound = 0.0;
    for (int j = 0; j < 8; ++j) bound += 2.0 * 8 * 2.0 / std::pow(sys.omegas[j], 2);
    CHECK(hs_bound(ctx, sys) == doctest::Approx(bound).epsilon(1e-12));
}

TEST_CASE("resolvent blocks equal the dense inverse") {
    std::mt19937 rng(77);
    SUBCASE("N = 3, r = 1, random c") {
        const auto sys = fixtures::random_system(rng, 3, 1, 1.7);
        const double lam = 0.1;
        const auto b = resolvent_blocks(build_context(sys, lam), sys);
        const Eigen::MatrixXd prod = b.assembled() * shifted_generator(sys, lam);
        CHECK((prod - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-9);
    }
    SUBCASE("shipped scenario") {
        for (int n : {6, 20}) {
            const auto sys = fixtures::default_system(n, 6.0);
            for (double lam : {1e-3, 1e-2, 1e-1}) {
                const auto b = resolvent_blocks(build_context(sys, lam), sys);
                const Eigen::MatrixXd dense = shifted_generator(sys, lam).inverse();
                const Eigen::MatrixXd r = b.assembled();
                CHECK((r - dense).cwiseAbs().maxCoeff() <= 1e-9 * dense.cwiseAbs().maxCoeff());
                for (int j = 0; j < n; ++j)
                    for (int i = 0; i < n; ++i)
                        CHECK(b.R3(j, i) == -(sys.omegas[j] / lam) * b.R1(j, i));
            }
        }
    }
}

TEST_CASE("Hilbert-Schmidt norm and the literal bound") {
    for (int n : {5, 20, 40}) {
        const auto sys = fixtures::default_system(n, 6.0);
        for (double lam : {1e-3, 1e-2, 1e-1}) {
            const auto ctx = build_context(sys, lam);
            const double norm = hs_norm(resolvent_blocks(ctx, sys));
            CAPTURE(n);
            CAPTURE(lam);
            CHECK(norm * norm <= hs_bound(ctx, sys));
        }
    }
    std::mt19937 rng(4);
    for (int trial = 0; trial < 10; ++trial) {
        const auto sys = fixtures::random_system(rng, 4 + trial, 1 + trial % 3, 0.5 + trial);
        const auto ctx = build_context(sys, 0.01);
        const double norm = hs_norm(resolvent_blocks(ctx, sys));
        CHECK(norm * norm <= hs_bound(ctx, sys));
    }
}

TEST_CASE("hs_norm trend with the truncation") {
    const auto beam = fixtures::default_beam();
    const auto modes = find_modes(beam, 80);
    SUBCASE("displacement output: the norm converges") {
        const auto sys = build_system(modes, SensorConfig{true, {}}, fixtures::dummy_actuator(),
                                      Eigen::VectorXd::Constant(1, 6.0), beam);
        const auto trend = hs_trend(sys, 0.01, {10, 20, 40, 80});
        for (std::size_t k = 1; k < trend.size(); ++k) CHECK(trend[k].norm >= trend[k - 1].norm * (1.0 - 1e-12));
        CHECK(std::abs(trend[3].norm - trend[2].norm) < 0.05 * trend[2].norm);
        // the literal bound keeps growing through its constant term
        CHECK(trend[3].bound > 1.9 * trend[2].bound);
    }
    SUBCASE("curvature outputs: c_sj grows like omega_j and the norm does not settle") {
        const auto sys = build_system(modes, fixtures::default_sensors(), fixtures::dummy_actuator(),
                                      Eigen::VectorXd::Constant(5, 6.0), beam);
        const auto trend = hs_trend(sys, 0.01, {10, 20, 40, 80});
        for (std::size_t k = 1; k < trend.size(); ++k) CHECK(trend[k].norm > trend[k - 1].norm);
        CHECK(trend[3].norm > 1.5 * trend[2].norm);
        for (const auto& pt : trend) CHECK(pt.norm * pt.norm <= pt.bound);
    }
}

TEST_CASE("eigenvalue density") {
    SUBCASE("pinned spectrum: square-root law") {
        std::vector<double> w;
        for (int j = 1; j <= 400; ++j) w.push_back(std::pow(j * std::numbers::pi, 2));
        const auto rep = eigenvalue_density(w, 20000.0);
        CHECK(rep.decreasing);
        CHECK(rep.fitted_exponent == doctest::Approx(-0.5).epsilon(0.1));
    }
    SUBCASE("arithmetic progression: constant density") {
        std::vector<double> w;
        for (int j = 1; j <= 100; ++j) w.push_back(j);
        const auto rep = eigenvalue_density(w, 10.0);
        for (double d : rep.densities) CHECK(d == doctest::Approx(1.0));
        CHECK_FALSE(rep.decreasing);
    }
    SUBCASE("shipped scenario, 40 frequencies") {
        const auto sys = fixtures::default_system(40, 6.0);
        const std::vector<double> w(sys.omegas.data(), sys.omegas.data() + sys.omegas.size());
        const auto rep = eigenvalue_density(w, 1500.0);
        CHECK(rep.densities.size() >= 3);
        CHECK(rep.decreasing);
    }
    SUBCASE("too few frequencies") {
        try {
            eigenvalue_density({1.0, 2.0, 3.0}, 1.0);
            FAIL("expected insufficient-data");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::InsufficientData);
        }
    }
}

}
