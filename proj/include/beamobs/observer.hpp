#pragma once

// Plant, observer and observation-error dynamics on a modal truncation.
//
//   plant      z'    = A z + B u,                 y = C z
//   observer   zbar' = (A - F C) zbar + B u + F y
//   error      e'    = (A - F C) e,               e = z - zbar = (Delta, delta)
//
// W(e) = sum(Delta_j^2 + delta_j^2) is non-increasing along the error flow with
// W' = -2 sum_s gamma_s (sum_j c_sj Delta_j)^2.

#include <Eigen/Core>

#include <functional>
#include <vector>

#include "beamobs/modal.hpp"

namespace beamobs {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Observation error (Delta, delta) on the xi- and eta-components.
template <typename Scalar>
struct ErrorStateT {
    VectorX<Scalar> Delta;
    VectorX<Scalar> delta;

    Eigen::Index size() const { return Delta.size(); }

    VectorX<Scalar> stacked() const {
        VectorX<Scalar> v(Delta.size() + delta.size());
        v << Delta, delta;
        return v;
    }

    template <typename Derived>
    static ErrorStateT from_stacked(const Eigen::MatrixBase<Derived>& v) {
        const Eigen::Index n = v.size() / 2;
        return {v.head(n), v.tail(n)};
    }

    static ErrorStateT zero(Eigen::Index n) {
        return {VectorX<Scalar>::Zero(n), VectorX<Scalar>::Zero(n)};
    }
};

/// Plant state with xi_j = omega_j q_j and eta_j = q_j'.
template <typename Scalar>
struct PlantStateT {
    VectorX<Scalar> xi;
    VectorX<Scalar> eta;

    Eigen::Index size() const { return xi.size(); }

    VectorX<Scalar> stacked() const {
        VectorX<Scalar> v(xi.size() + eta.size());
        v << xi, eta;
        return v;
    }

    template <typename Derived>
    static PlantStateT from_stacked(const Eigen::MatrixBase<Derived>& v) {
        const Eigen::Index n = v.size() / 2;
        return {v.head(n), v.tail(n)};
    }

    static PlantStateT zero(Eigen::Index n) {
        return {VectorX<Scalar>::Zero(n), VectorX<Scalar>::Zero(n)};
    }
};

using ErrorState = ErrorStateT<double>;
using PlantState = PlantStateT<double>;

template <typename State>
struct BasicTrajectory {
    std::vector<double> times;
    std::vector<State> states;
    std::vector<double> lyapunov;  // sum of squares of the paired state
    std::vector<double> norm_sq;   // same quantity, reported as |e_N|^2

    std::size_t size() const { return times.size(); }
};

using Trajectory = BasicTrajectory<ErrorState>;
using PlantTrajectory = BasicTrajectory<PlantState>;

// ---------------------------------------------------------------------------
// Lyapunov functional

template <typename Scalar>
Scalar lyapunov(const ErrorStateT<Scalar>& e) {
    return e.Delta.squaredNorm() + e.delta.squaredNorm();
}

double lyapunov(const ModalSystem& system, const ErrorState& e);

/// -2 sum_s gamma_s (C1 Delta)_s^2; depends on Delta only.
template <typename DerivedC, typename DerivedG, typename DerivedD>
typename DerivedD::Scalar lyapunov_rate(const Eigen::MatrixBase<DerivedC>& C1,
                                        const Eigen::MatrixBase<DerivedG>& gammas,
                                        const Eigen::MatrixBase<DerivedD>& Delta) {
    using Scalar = typename DerivedD::Scalar;
    const VectorX<Scalar> outputs = C1.template cast<Scalar>() * Delta;
    return Scalar(-2) * (gammas.template cast<Scalar>().array() * outputs.array().square()).sum();
}

double lyapunov_rate(const ModalSystem& system, const ErrorState& e);

// ---------------------------------------------------------------------------
// Generators

/// A - F C for gains f_js = gamma_s c_sj:
///   [ -C1^T diag(gamma) C1   Omega ]
///   [ -Omega                 0     ]
template <typename DerivedW, typename DerivedC, typename DerivedG>
MatrixX<typename DerivedW::Scalar> error_generator(const Eigen::MatrixBase<DerivedW>& omegas,
                                                   const Eigen::MatrixBase<DerivedC>& C1,
                                                   const Eigen::MatrixBase<DerivedG>& gammas) {
    using Scalar = typename DerivedW::Scalar;
    const Eigen::Index n = omegas.size();
    MatrixX<Scalar> a = MatrixX<Scalar>::Zero(2 * n, 2 * n);
    if (C1.rows() > 0) {
        const MatrixX<Scalar> c = C1.template cast<Scalar>();
        const MatrixX<Scalar> gc = gammas.template cast<Scalar>().asDiagonal() * c;
        const MatrixX<Scalar> damping = c.transpose() * gc;
        // exactly symmetric, independent of summation order
        a.topLeftCorner(n, n) = Scalar(-0.5) * (damping + damping.transpose());
    }
    a.topRightCorner(n, n).diagonal() = omegas;
    a.bottomLeftCorner(n, n).diagonal() = -omegas;
    return a;
}

/// Generator with F = 0; exactly skew-symmetric.
template <typename DerivedW>
MatrixX<typename DerivedW::Scalar> skew_generator(const Eigen::MatrixBase<DerivedW>& omegas) {
    using Scalar = typename DerivedW::Scalar;
    const Eigen::Index n = omegas.size();
    MatrixX<Scalar> a = MatrixX<Scalar>::Zero(2 * n, 2 * n);
    a.topRightCorner(n, n).diagonal() = omegas;
    a.bottomLeftCorner(n, n).diagonal() = -omegas;
    return a;
}

Eigen::MatrixXd assemble_error_generator(const ModalSystem& system);

/// Largest real part of the generator spectrum.
double spectral_abscissa(const Eigen::MatrixXd& generator);

// ---------------------------------------------------------------------------
// Propagation

/// t_k = k t_end / (samples - 1), k = 0..samples-1.
std::vector<double> uniform_grid(double t_end, int samples);

/// Delta_j(0) = delta_j(0) = 1/(j omega_j).
ErrorState default_initial_error(const Eigen::VectorXd& omegas);

/// e(t_k) = exp(t_k A_hat) e0 by exact propagation over the grid increments.
/// The step propagator exp(dt A_hat) is reused while the increment is unchanged.
Trajectory propagate_error(const Eigen::MatrixXd& generator, const ErrorState& e0,
                           const std::vector<double>& t_grid);

Trajectory propagate_error(const ModalSystem& system, const ErrorState& e0,
                           const std::vector<double>& t_grid);

using InputSignal = std::function<Eigen::VectorXd(double)>;

// The substep resolves omega_N with steps_per_radian steps per radian and keeps
// h |f C1|_2 <= stiff_step.  The gain block only has to stay inside the RK4
// stability interval; its components decay within a few substeps.
struct RkOptions {
    double steps_per_radian = 100.0;
    double stiff_step = 1.0;
    /// Upper bound on the total number of substeps.
    long max_steps = 50'000'000;
};

struct PlantObserverRun {
    PlantTrajectory plant;
    PlantTrajectory observer;
    double step = 0.0;   // largest RK4 substep used
    long steps = 0;
};

/// Classical RK4 on the coupled plant + observer system.
PlantObserverRun propagate_plant_observer(const ModalSystem& system, const PlantState& z0,
                                          const PlantState& zbar0, const InputSignal& u,
                                          const std::vector<double>& t_grid,
                                          const RkOptions& options = {});

/// z - zbar along two trajectories on the same grid.
Trajectory error_between(const PlantTrajectory& plant, const PlantTrajectory& observer);

/// |f C1|_2, the stiffest rate of the gain block.
double gain_rate(const ModalSystem& system);

/// RK4 substep for a grid whose smallest increment is dt_min.
double rk4_step(const ModalSystem& system, double dt_min, const RkOptions& options = {});

// ---------------------------------------------------------------------------

struct DecayMetrics {
    double w_ratio = 0.0;             // W(t_end)/W(0)
    double fitted_rate = 0.0;         // slope of log |e| over the last half
    double spectral_abscissa = 0.0;   // max Re eig(A_hat)
};

DecayMetrics decay_metrics(const Trajectory& trajectory, const Eigen::MatrixXd& generator);

} // namespace beamobs
