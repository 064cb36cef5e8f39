#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>

#include "beamobs/observer.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace beamobs;

namespace {

ModalSystem scalar_system(double omega, double gamma) {
    return make_system(Eigen::VectorXd::Constant(1, omega), Eigen::MatrixXd::Zero(1, 1),
                       Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Constant(1, gamma));
}

double rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).norm() / std::max(a.norm(), b.norm());
}

} // namespace

TEST_SUITE("observer") {

TEST_CASE("scalar generator and its spectrum") {
    const auto sys = scalar_system(3.0, 1.5);
    const Eigen::MatrixXd a = assemble_error_generator(sys);
    Eigen::Matrix2d expected;
    expected << -1.5, 3.0, -3.0, 0.0;
    CHECK(a == expected);
    CHECK(spectral_abscissa(a) == doctest::Approx(-0.75).epsilon(1e-12));
}

TEST_CASE("generator block structure on the shipped scenario") {
    const auto sys = fixtures::default_system(12, 6.0);
    const Eigen::MatrixXd a = assemble_error_generator(sys);
    const Eigen::Index n = 12;
    const Eigen::MatrixXd ul = a.topLeftCorner(n, n);
    CHECK((ul - ul.transpose()).norm() == 0.0);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ul);
    CHECK(es.eigenvalues().maxCoeff() <= 1e-10 * ul.norm());
    int nonzero = 0;
    for (double v : es.eigenvalues()) nonzero += std::abs(v) > 1e-10 * ul.norm();
    CHECK(nonzero <= sys.n_outputs());
    CHECK(a.topRightCorner(n, n) == Eigen::MatrixXd(sys.omegas.asDiagonal()));
    CHECK(a.bottomLeftCorner(n, n) == Eigen::MatrixXd((-sys.omegas).asDiagonal()));
    CHECK(a.bottomRightCorner(n, n).isZero(0.0));
    // A - F C assembled from the stored gain operator
    Eigen::MatrixXd a_fc = skew_generator(sys.omegas);
    a_fc.leftCols(n) -= sys.F * sys.C1;
    CHECK((a - a_fc).norm() <= 1e-12 * a.norm());

    const Eigen::MatrixXd s = skew_generator(sys.omegas);
    CHECK((s + s.transpose()).isZero(0.0));
}

TEST_CASE("generator is templated on the scalar") {
    const auto sys = fixtures::default_system(4, 6.0);
    const auto a = error_generator(sys.omegas.cast<long double>(), sys.C1, sys.gammas);
    static_assert(std::is_same_v<std::decay_t<decltype(a)>, MatrixX<long double>>);
    CHECK((a.cast<double>() - assemble_error_generator(sys)).norm() <= 1e-12 * a.cast<double>().norm());
    ErrorStateT<float> ef{VectorX<float>::Ones(3), VectorX<float>::Ones(3)};
    CHECK(lyapunov(ef) == 6.0f);
}

TEST_CASE("Lyapunov functional and its rate") {
    const auto sys = fixtures::default_system(6, 6.0);
    const ErrorState zero = ErrorState::zero(6);
    CHECK(lyapunov(sys, zero) == 0.0);
    CHECK(lyapunov_rate(sys, zero) == 0.0);

    // Delta in Ker C1, delta arbitrary
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sys.C1);
    const Eigen::MatrixXd kernel = lu.kernel();
    REQUIRE(kernel.cols() >= 1);
    std::mt19937 rng(11);
    const ErrorState in_kernel{kernel.col(0), fixtures::random_vector(rng, 6)};
    CHECK(lyapunov(sys, in_kernel) > 0.0);
    CHECK(std::abs(lyapunov_rate(sys, in_kernel)) <= 1e-20 * sys.C1.squaredNorm());

    const Eigen::MatrixXd a = assemble_error_generator(sys);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd v = fixtures::random_vector(rng, 12);
        const ErrorState e = ErrorState::from_stacked(v);
        const double directional = 2.0 * v.dot(a * v);
        const double rate = lyapunov_rate(sys, e);
        CHECK(rate <= 0.0);
        CHECK(std::abs(rate - directional) <= 1e-10 * std::abs(rate));
    }
}

TEST_CASE("rate matches a central difference along the flow") {
    const auto sys = fixtures::default_system(6, 6.0);
    std::mt19937 rng(5);
    const ErrorState e0 = ErrorState::from_stacked(fixtures::random_vector(rng, 12));
    const double t = 0.3;
    const double exact = lyapunov_rate(sys, propagate_error(sys, e0, {0.0, t}).states.back());
    std::vector<double> errors;
    for (double h : {1e-3, 1e-4, 1e-5}) {
        const auto tr = propagate_error(sys, e0, {0.0, t - h, t + h});
        const double fd = (tr.lyapunov[2] - tr.lyapunov[1]) / (2.0 * h);
        errors.push_back(std::abs(fd - exact));
        CAPTURE(h);
        CHECK(std::abs(fd - exact) <= 1e-3 * std::abs(exact));
    }
    // second order: a decade in h buys two decades in error
    CHECK(errors[0] / errors[1] >= 50.0);
}

TEST_CASE("exact propagation") {
    SUBCASE("zero initial error stays zero") {
        const auto sys = fixtures::default_system(6, 6.0);
        const auto tr = propagate_error(sys, ErrorState::zero(6), uniform_grid(5.0, 50));
        for (double w : tr.lyapunov) CHECK(w == 0.0);
    }
    SUBCASE("damped scalar oscillator in closed form") {
        // Delta' = -Delta + delta, delta' = -Delta; roots of l^2 + l + 1
        const auto sys = scalar_system(1.0, 1.0);
        const ErrorState e0{Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1)};
        const auto grid = uniform_grid(10.0, 201);
        const auto tr = propagate_error(sys, e0, grid);
        const double beta = std::sqrt(3.0) / 2.0;
        const double b = -1.0 / (2.0 * beta);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double t = grid[k];
            const double env = std::exp(-0.5 * t);
            const double c = std::cos(beta * t), s = std::sin(beta * t);
            const double big = env * (c + b * s);
            const double dbig = env * (-0.5 * (c + b * s) + beta * (b * c - s));
            const double small = big + dbig;
            CHECK(std::abs(tr.states[k].Delta[0] - big) <= 1e-8);
            CHECK(std::abs(tr.states[k].delta[0] - small) <= 1e-8);
            CHECK(std::sqrt(tr.norm_sq[k]) == doctest::Approx(std::hypot(big, small)).epsilon(1e-8));
        }
    }
    SUBCASE("F = 0 conserves W") {
        const auto sys = fixtures::default_system(16, 6.0);
        const Eigen::MatrixXd skew = skew_generator(sys.omegas);
        const auto tr = propagate_error(skew, default_initial_error(sys.omegas), uniform_grid(20.0, 2000));
        for (double w : tr.lyapunov) CHECK(std::abs(w - tr.lyapunov.front()) <= 1e-10 * tr.lyapunov.front());
        CHECK(std::abs(decay_metrics(tr, skew).fitted_rate) < 1e-6);
    }
    SUBCASE("trajectory bookkeeping") {
        const auto sys = fixtures::default_system(6, 6.0);
        const auto tr = propagate_error(sys, default_initial_error(sys.omegas), uniform_grid(2.0, 21));
        REQUIRE(tr.size() == 21);
        for (std::size_t k = 0; k < tr.size(); ++k) {
            CHECK(tr.lyapunov[k] == doctest::Approx(lyapunov(tr.states[k])).epsilon(1e-14));
            CHECK(tr.norm_sq[k] == tr.lyapunov[k]);
            if (k > 0) CHECK(tr.times[k] > tr.times[k - 1]);
        }
    }
}

TEST_CASE("default initial condition") {
    Eigen::VectorXd w(3);
    w << 2.0, 5.0, 10.0;
    const ErrorState e = default_initial_error(w);
    CHECK(e.Delta[0] == 0.5);
    CHECK(e.delta[1] == doctest::Approx(0.1));
    CHECK(e.Delta[2] == doctest::Approx(1.0 / 30.0));
}

TEST_CASE("monotone dissipation and spectrum location") {
    for (int n : {6, 16, 40}) {
        for (double gamma : {0.8, 6.0, 12.0}) {
            CAPTURE(n);
            CAPTURE(gamma);
            const auto sys = fixtures::default_system(n, gamma);
            const Eigen::MatrixXd a = assemble_error_generator(sys);
            const auto tr = propagate_error(a, default_initial_error(sys.omegas), uniform_grid(20.0, 2000));
            bool monotone = true;
            for (std::size_t k = 1; k < tr.size(); ++k)
                monotone = monotone && tr.lyapunov[k] <= tr.lyapunov[k - 1] * (1.0 + 1e-10);
            CHECK(monotone);
            CHECK(tr.lyapunov.back() < tr.lyapunov.front());
            CHECK(spectral_abscissa(a) < 0.0);
        }
    }
}

TEST_CASE("decay metrics") {
    SUBCASE("scalar case: rate -gamma/2") {
        const auto sys = scalar_system(1.0, 1.0);
        const Eigen::MatrixXd a = assemble_error_generator(sys);
        const ErrorState e0{Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1)};
        const auto m = decay_metrics(propagate_error(a, e0, uniform_grid(40.0, 4001)), a);
        CHECK(m.fitted_rate == doctest::Approx(-0.5).epsilon(0.05));
        CHECK(m.spectral_abscissa == doctest::Approx(-0.5).epsilon(1e-12));
    }
    SUBCASE("shipped scenario N = 6, gamma = 6") {
        const auto sys = fixtures::default_system(6, 6.0);
        const Eigen::MatrixXd a = assemble_error_generator(sys);
        const auto m = decay_metrics(propagate_error(a, default_initial_error(sys.omegas), uniform_grid(20.0, 2000)), a);
        CHECK(m.w_ratio <= 1e-2);
        CHECK(m.fitted_rate == doctest::Approx(m.spectral_abscissa).epsilon(0.2));
    }
    SUBCASE("zero initial error") {
        const auto sys = fixtures::default_system(2, 6.0);
        const Eigen::MatrixXd a = assemble_error_generator(sys);
        try {
            decay_metrics(propagate_error(a, ErrorState::zero(2), uniform_grid(1.0, 10)), a);
            FAIL("expected undefined-metric");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::UndefinedMetric);
        }
    }
}

TEST_CASE("plant and observer") {
    SUBCASE("identical initial states give identical trajectories") {
        const auto sys = fixtures::default_system(4, 6.0);
        std::mt19937 rng(3);
        const PlantState z0 = PlantState::from_stacked(fixtures::random_vector(rng, 8));
        const InputSignal u = [](double t) { return Eigen::VectorXd::Constant(2, std::sin(3.0 * t)); };
        const auto run = propagate_plant_observer(sys, z0, z0, u, uniform_grid(1.0, 11));
        const auto err = error_between(run.plant, run.observer);
        for (double w : err.norm_sq) CHECK(w <= 1e-28 * run.plant.norm_sq.front());
    }
    SUBCASE("zero input: RK4 error matches exact propagation") {
        const auto sys = fixtures::default_system(6, 6.0);
        const ErrorState e0 = default_initial_error(sys.omegas);
        const PlantState z0{e0.Delta, e0.delta};
        const auto grid = uniform_grid(2.0, 201);
        const auto run = propagate_plant_observer(sys, z0, PlantState::zero(6), nullptr, grid);
        const auto rk = error_between(run.plant, run.observer);
        const auto exact = propagate_error(sys, e0, grid);
        CHECK(rel_diff(rk.states.back().stacked(), exact.states.back().stacked()) <= 1e-6);
        CHECK(rk.lyapunov.back() == doctest::Approx(exact.lyapunov.back()).epsilon(1e-6));
    }
    SUBCASE("error dynamics ignore the input and the plant state") {
        const auto sys = fixtures::default_system(2, 6.0);
        std::mt19937 rng(9);
        const Eigen::VectorXd e0 = fixtures::random_vector(rng, 4);
        const Eigen::VectorXd z0 = fixtures::random_vector(rng, 4);
        const auto grid = uniform_grid(3.0, 61);
        const InputSignal sine = [](double t) {
            Eigen::VectorXd v = Eigen::VectorXd::Zero(2);
            v[0] = 5.0 * std::sin(7.0 * t);
            return v;
        };
        const auto quiet = propagate_plant_observer(sys, PlantState::from_stacked(e0),
                                                    PlantState::zero(2), nullptr, grid);
        const auto forced = propagate_plant_observer(sys, PlantState::from_stacked(z0 + e0),
                                                     PlantState::from_stacked(z0), sine, grid);
        const auto a = error_between(quiet.plant, quiet.observer);
        const auto b = error_between(forced.plant, forced.observer);
        for (std::size_t k = 0; k < grid.size(); ++k)
            CHECK(rel_diff(a.states[k].stacked(), b.states[k].stacked()) <= 1e-6);
        // and the forced plant really moved differently
        CHECK(rel_diff(quiet.plant.states.back().stacked(), forced.plant.states.back().stacked()) > 1e-2);
    }
    SUBCASE("step budget is enforced") {
        const auto sys = fixtures::default_system(6, 6.0);
        RkOptions opts;
        opts.max_steps = 10;
        try {
            propagate_plant_observer(sys, PlantState::zero(6), PlantState::zero(6), nullptr,
                                     uniform_grid(20.0, 3), opts);
            FAIL("expected configuration error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Configuration);
        }
    }
}

TEST_CASE("grid helpers") {
    const auto g = uniform_grid(2.0, 5);
    REQUIRE(g.size() == 5);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 2.0);
    CHECK(g[1] == 0.5);
    CHECK_THROWS_AS(uniform_grid(1.0, 1), Error);
    const auto sys = fixtures::default_system(2, 6.0);
    CHECK_THROWS_AS(propagate_error(sys, ErrorState::zero(2), {0.0, 1.0, 0.5}), Error);
}

}
