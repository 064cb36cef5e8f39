#include "beamobs/observer.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <sstream>

namespace beamobs {

namespace {

void check_dims(const ModalSystem& sys, Eigen::Index n, const char* who) {
    if (n != sys.n_modes()) {
        std::ostringstream os;
        os << who << ": state has " << n << " modes, system has " << sys.n_modes();
        throw Error(ErrorKind::Parameter, os.str());
    }
}

void check_grid(const std::vector<double>& t, const char* who) {
    if (t.empty()) throw Error(ErrorKind::Parameter, std::string(who) + ": empty time grid");
    if (!(t.front() >= 0.0)) throw Error(ErrorKind::Parameter, std::string(who) + ": grid must start at t >= 0");
    for (std::size_t k = 1; k < t.size(); ++k)
        if (!(t[k] > t[k - 1]))
            throw Error(ErrorKind::Parameter, std::string(who) + ": grid must be strictly increasing");
}

template <typename State>
void record(BasicTrajectory<State>& traj, double t, State state) {
    const double w = state.stacked().squaredNorm();
    traj.times.push_back(t);
    traj.states.push_back(std::move(state));
    traj.lyapunov.push_back(w);
    traj.norm_sq.push_back(w);
}

bool same_increment(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(a, b); }

Eigen::MatrixXd step_propagator(const Eigen::MatrixXd& generator, double dt) {
    Eigen::MatrixXd p = (dt * generator).exp();
    if (!p.allFinite()) {
        std::ostringstream os;
        os << "propagator exp(" << dt << " * A) has non-finite entries";
        throw Error(ErrorKind::Conditioning, os.str());
    }
    return p;
}

} // namespace

double lyapunov(const ModalSystem& sys, const ErrorState& e) {
    check_dims(sys, e.size(), "lyapunov");
    return lyapunov(e);
}

double lyapunov_rate(const ModalSystem& sys, const ErrorState& e) {
    check_dims(sys, e.size(), "lyapunov_rate");
    return lyapunov_rate(sys.C1, sys.gammas, e.Delta);
}

Eigen::MatrixXd assemble_error_generator(const ModalSystem& sys) {
    return error_generator(sys.omegas, sys.C1, sys.gammas);
}

double spectral_abscissa(const Eigen::MatrixXd& generator) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(generator, false);
    if (es.info() != Eigen::Success)
        throw Error(ErrorKind::Conditioning, "eigenvalue computation did not converge");
    return es.eigenvalues().real().maxCoeff();
}

std::vector<double> uniform_grid(double t_end, int samples) {
    if (samples < 2 || !(t_end > 0.0))
        throw Error(ErrorKind::Parameter, "uniform_grid: need t_end > 0 and at least 2 samples");
    std::vector<double> t(static_cast<std::size_t>(samples));
    for (int k = 0; k < samples; ++k) t[static_cast<std::size_t>(k)] = t_end * k / (samples - 1);
    return t;
}

ErrorState default_initial_error(const Eigen::VectorXd& omegas) {
    const Eigen::Index n = omegas.size();
    Eigen::VectorXd v(n);
    for (Eigen::Index j = 0; j < n; ++j) v[j] = 1.0 / (static_cast<double>(j + 1) * omegas[j]);
    return {v, v};
}

Trajectory propagate_error(const Eigen::MatrixXd& generator, const ErrorState& e0,
                           const std::vector<double>& t_grid) {
    check_grid(t_grid, "propagate_error");
    if (generator.rows() != 2 * e0.size() || generator.cols() != generator.rows())
        throw Error(ErrorKind::Parameter, "propagate_error: generator and state sizes differ");

    Trajectory traj;
    traj.times.reserve(t_grid.size());
    traj.states.reserve(t_grid.size());

    Eigen::VectorXd e = e0.stacked();
    if (t_grid.front() > 0.0) e = step_propagator(generator, t_grid.front()) * e;
    record(traj, t_grid.front(), ErrorState::from_stacked(e));

    Eigen::MatrixXd propagator;
    double cached_dt = -1.0;
    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        const double dt = t_grid[k] - t_grid[k - 1];
        if (cached_dt < 0.0 || !same_increment(dt, cached_dt)) {
            propagator = step_propagator(generator, dt);
            cached_dt = dt;
        }
        e = propagator * e;
        record(traj, t_grid[k], ErrorState::from_stacked(e));
    }
    return traj;
}

Trajectory propagate_error(const ModalSystem& sys, const ErrorState& e0,
                           const std::vector<double>& t_grid) {
    check_dims(sys, e0.size(), "propagate_error");
    return propagate_error(assemble_error_generator(sys), e0, t_grid);
}

double gain_rate(const ModalSystem& sys) {
    const Eigen::MatrixXd injection = sys.gain_upper() * sys.C1;
    if (injection.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(injection);
    return svd.singularValues()[0];
}

double rk4_step(const ModalSystem& sys, double dt_min, const RkOptions& opt) {
    if (!std::isfinite(dt_min)) return dt_min;
    const double oscillation = sys.omegas.cwiseAbs().maxCoeff() * opt.steps_per_radian;
    const double damping = gain_rate(sys) / opt.stiff_step;
    const double per_unit = std::max(oscillation, damping);
    return per_unit > 0.0 ? dt_min / std::ceil(dt_min * per_unit) : dt_min;
}

PlantObserverRun propagate_plant_observer(const ModalSystem& sys, const PlantState& z0,
                                          const PlantState& zbar0, const InputSignal& u,
                                          const std::vector<double>& t_grid,
                                          const RkOptions& opt) {
    check_grid(t_grid, "propagate_plant_observer");
    check_dims(sys, z0.size(), "propagate_plant_observer");
    check_dims(sys, zbar0.size(), "propagate_plant_observer");
    const Eigen::Index n = sys.n_modes();

    // x = (z, zbar):  x' = G x + H u(t)
    //   G = [ A      0       ]      H = [ B ]
    //       [ F C    A - F C ]          [ B ]
    const Eigen::MatrixXd a = skew_generator(sys.omegas);
    const Eigen::MatrixXd fc = sys.F.topRows(n) * sys.C1;
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(4 * n, 4 * n);
    g.topLeftCorner(2 * n, 2 * n) = a;
    g.block(2 * n, 0, n, n) = fc;
    g.bottomRightCorner(2 * n, 2 * n) = a;
    g.block(2 * n, 2 * n, n, n) -= fc;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(4 * n, sys.n_inputs());
    h.block(n, 0, n, sys.n_inputs()) = sys.B1;
    h.block(3 * n, 0, n, sys.n_inputs()) = sys.B1;

    auto input = [&](double t) -> Eigen::VectorXd {
        if (!u) return Eigen::VectorXd::Zero(sys.n_inputs());
        Eigen::VectorXd v = u(t);
        if (v.size() != sys.n_inputs()) {
            std::ostringstream os;
            os << "input signal has " << v.size() << " channels, system has " << sys.n_inputs();
            throw Error(ErrorKind::Parameter, os.str());
        }
        if (!v.allFinite()) throw Error(ErrorKind::Parameter, "input signal is not finite");
        return v;
    };
    auto rhs = [&](double t, const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return g * x + h * input(t);
    };

    double dt_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < t_grid.size(); ++k) dt_min = std::min(dt_min, t_grid[k] - t_grid[k - 1]);
    const double step = rk4_step(sys, dt_min, opt);

    long total = 0;
    if (t_grid.size() > 1) {
        for (std::size_t k = 1; k < t_grid.size(); ++k)
            total += static_cast<long>(std::ceil((t_grid[k] - t_grid[k - 1]) / step * (1.0 - 1e-12)));
        if (!(step > 0.0) || total > opt.max_steps) {
            std::ostringstream os;
            os << "RK4 step " << step << " needs " << total << " substeps (limit " << opt.max_steps
               << "); shorten the horizon or lower the gains";
            throw Error(ErrorKind::Configuration, os.str());
        }
    }

    PlantObserverRun run;
    Eigen::VectorXd x(4 * n);
    x << z0.stacked(), zbar0.stacked();
    auto store = [&](double t) {
        record(run.plant, t, PlantState::from_stacked(x.head(2 * n)));
        record(run.observer, t, PlantState::from_stacked(x.tail(2 * n)));
    };
    store(t_grid.front());

    for (std::size_t k = 1; k < t_grid.size(); ++k) {
        const double t0 = t_grid[k - 1];
        const double span = t_grid[k] - t0;
        const long substeps = std::max(1L, static_cast<long>(std::ceil(span / step * (1.0 - 1e-12))));
        const double hk = span / static_cast<double>(substeps);
        for (long i = 0; i < substeps; ++i) {
            const double t = t0 + static_cast<double>(i) * hk;
            const Eigen::VectorXd k1 = rhs(t, x);
            const Eigen::VectorXd k2 = rhs(t + 0.5 * hk, x + 0.5 * hk * k1);
            const Eigen::VectorXd k3 = rhs(t + 0.5 * hk, x + 0.5 * hk * k2);
            const Eigen::VectorXd k4 = rhs(t + hk, x + hk * k3);
            x += (hk / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        run.steps += substeps;
        run.step = std::max(run.step, hk);
        if (!x.allFinite()) throw Error(ErrorKind::Conditioning, "RK4 state became non-finite");
        store(t_grid[k]);
    }
    return run;
}

Trajectory error_between(const PlantTrajectory& plant, const PlantTrajectory& observer) {
    if (plant.size() != observer.size())
        throw Error(ErrorKind::Parameter, "error_between: trajectories differ in length");
    Trajectory e;
    for (std::size_t k = 0; k < plant.size(); ++k) {
        if (plant.times[k] != observer.times[k])
            throw Error(ErrorKind::Parameter, "error_between: trajectories on different grids");
        record(e, plant.times[k],
               ErrorState{plant.states[k].xi - observer.states[k].xi,
                          plant.states[k].eta - observer.states[k].eta});
    }
    return e;
}

DecayMetrics decay_metrics(const Trajectory& traj, const Eigen::MatrixXd& generator) {
    if (traj.size() < 2) throw Error(ErrorKind::UndefinedMetric, "decay_metrics: need at least two samples");
    const double w0 = traj.lyapunov.front();
    if (!(w0 > 0.0)) throw Error(ErrorKind::UndefinedMetric, "decay_metrics: zero initial error");

    DecayMetrics m;
    m.w_ratio = traj.lyapunov.back() / w0;

    // Least-squares slope of 0.5 log |e|^2 against t on the second half.
    double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
    int count = 0;
    for (std::size_t k = traj.size() / 2; k < traj.size(); ++k) {
        if (!(traj.norm_sq[k] > 0.0)) continue;
        const double t = traj.times[k];
        const double y = 0.5 * std::log(traj.norm_sq[k]);
        st += t;
        sy += y;
        stt += t * t;
        sty += t * y;
        ++count;
    }
    if (count < 2) throw Error(ErrorKind::UndefinedMetric, "decay_metrics: error underflowed before the fit window");
    const double denom = count * stt - st * st;
    m.fitted_rate = (count * sty - st * sy) / denom;
    m.spectral_abscissa = spectral_abscissa(generator);
    return m;
}

} // namespace beamobs
