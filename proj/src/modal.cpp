#include "beamobs/modal.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace beamobs {

void SensorConfig::validate(const BeamParams& p) const {
    if (n_outputs() == 0) throw Error(ErrorKind::Parameter, "sensor configuration has no outputs");
    for (std::size_t i = 0; i < positions.size(); ++i) {
        const double x = positions[i];
        if (!(x > 0.0 && x < p.l)) {
            std::ostringstream os;
            os << "sensor " << i + 1 << " at x=" << x << " must lie strictly inside (0, " << p.l
               << "); curvature vanishes at the pinned ends";
            throw Error(ErrorKind::Domain, os.str());
        }
        for (std::size_t k = 0; k < i; ++k) {
            if (positions[k] == x) {
                std::ostringstream os;
                os << "sensors " << k + 1 << " and " << i + 1 << " share position " << x;
                throw Error(ErrorKind::Domain, os.str());
            }
        }
    }
}

void ActuatorShape::validate(const BeamParams& p) const {
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const auto& piece = pieces[i];
        std::ostringstream os;
        os << "actuator piece " << i + 1 << " [" << piece.x_begin << ", " << piece.x_end << "]";
        if (!std::isfinite(piece.amplitude))
            throw Error(ErrorKind::Shape, os.str() + " has a non-finite amplitude");
        if (!(piece.x_begin < piece.x_end))
            throw Error(ErrorKind::Shape, os.str() + " is empty or reversed");
        if (!(piece.x_begin > 0.0 && piece.x_end < p.l))
            throw Error(ErrorKind::Shape, os.str() + " must lie strictly inside (0, l)");
        if (piece.x_begin <= p.l0 && p.l0 <= piece.x_end)
            throw Error(ErrorKind::Shape, os.str() + " touches the attachment point l0");
    }
}

Eigen::MatrixXd build_output_matrix(const std::vector<Mode>& modes, const SensorConfig& sensors) {
    if (modes.empty()) throw Error(ErrorKind::Parameter, "build_output_matrix: no modes");
    const double l = modes.front().l;
    for (double x : sensors.positions) {
        if (!(x > 0.0 && x < l)) {
            std::ostringstream os;
            os << "sensor at x=" << x << " gives an identically zero output row";
            throw Error(ErrorKind::Domain, os.str());
        }
    }
    const auto n = static_cast<Eigen::Index>(modes.size());
    Eigen::MatrixXd c(sensors.n_outputs(), n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Mode& mode = modes[static_cast<std::size_t>(j)];
        Eigen::Index row = 0;
        if (sensors.body_output) c(row++, j) = eval_mode(mode, mode.l0, 0);
        for (double x : sensors.positions) c(row++, j) = eval_mode(mode, x, 2);
    }
    return c;
}

Eigen::MatrixXd build_input_matrix(const std::vector<Mode>& modes,
                                   const std::vector<ActuatorShape>& actuators,
                                   const BeamParams& params) {
    if (modes.empty()) throw Error(ErrorKind::Parameter, "build_input_matrix: no modes");
    for (const auto& a : actuators) a.validate(params);

    const auto n = static_cast<Eigen::Index>(modes.size());
    Eigen::MatrixXd b(n, static_cast<Eigen::Index>(actuators.size()) + 1);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Mode& mode = modes[static_cast<std::size_t>(j)];
        if (!(mode.norm_sq > 0.0))
            throw Error(ErrorKind::Parameter, "build_input_matrix: mode without a positive norm");
        b(j, 0) = eval_mode(mode, mode.l0, 0) / mode.norm_sq;
        for (std::size_t p = 0; p < actuators.size(); ++p) {
            // int psi W'' dx over a constant piece is amplitude * [W']_a^b.
            double integral = 0.0;
            for (const auto& piece : actuators[p].pieces)
                integral += piece.amplitude *
                            (eval_mode(mode, piece.x_end, 1) - eval_mode(mode, piece.x_begin, 1));
            b(j, static_cast<Eigen::Index>(p) + 1) = integral / mode.norm_sq;
        }
    }
    return b;
}

Eigen::MatrixXd build_gain(const Eigen::MatrixXd& C1, const Eigen::VectorXd& gammas) {
    if (gammas.size() != C1.rows()) {
        std::ostringstream os;
        os << "build_gain: " << gammas.size() << " gains for " << C1.rows() << " outputs";
        throw Error(ErrorKind::Parameter, os.str());
    }
    for (Eigen::Index s = 0; s < gammas.size(); ++s) {
        if (!(gammas[s] > 0.0) || !std::isfinite(gammas[s])) {
            std::ostringstream os;
            os << "build_gain: gamma_" << s + 1 << "=" << gammas[s] << " must be positive";
            throw Error(ErrorKind::Parameter, os.str());
        }
    }
    const Eigen::Index n = C1.cols();
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(2 * n, C1.rows());
    for (Eigen::Index s = 0; s < C1.rows(); ++s)
        for (Eigen::Index j = 0; j < n; ++j) f(j, s) = gammas[s] * C1(s, j);
    return f;
}

Eigen::VectorXd expand_gains(const std::vector<double>& gains, Eigen::Index n_outputs) {
    if (gains.size() == 1) return Eigen::VectorXd::Constant(n_outputs, gains.front());
    if (static_cast<Eigen::Index>(gains.size()) != n_outputs) {
        std::ostringstream os;
        os << gains.size() << " gains given for " << n_outputs << " outputs (give 1 or "
           << n_outputs << ")";
        throw Error(ErrorKind::Parameter, os.str());
    }
    return Eigen::Map<const Eigen::VectorXd>(gains.data(), n_outputs);
}

ModalSystem make_system(Eigen::VectorXd omegas, Eigen::MatrixXd B1, Eigen::MatrixXd C1,
                        Eigen::VectorXd gammas) {
    if (C1.cols() != omegas.size() || B1.rows() != omegas.size()) {
        std::ostringstream os;
        os << "inconsistent operator sizes: " << omegas.size() << " frequencies, B1 "
           << B1.rows() << "x" << B1.cols() << ", C1 " << C1.rows() << "x" << C1.cols();
        throw Error(ErrorKind::Parameter, os.str());
    }
    ModalSystem sys;
    sys.F = build_gain(C1, gammas);
    sys.omegas = std::move(omegas);
    sys.B1 = std::move(B1);
    sys.C1 = std::move(C1);
    sys.gammas = std::move(gammas);
    return sys;
}

ModalSystem build_system(const std::vector<Mode>& modes, const SensorConfig& sensors,
                         const std::vector<ActuatorShape>& actuators,
                         const Eigen::VectorXd& gammas, const BeamParams& params) {
    sensors.validate(params);
    Eigen::VectorXd omegas(static_cast<Eigen::Index>(modes.size()));
    for (std::size_t j = 0; j < modes.size(); ++j) omegas[static_cast<Eigen::Index>(j)] = modes[j].omega;
    return make_system(std::move(omegas), build_input_matrix(modes, actuators, params),
                       build_output_matrix(modes, sensors), gammas);
}

ModalSystem truncate(const ModalSystem& sys, Eigen::Index n) {
    if (n < 1 || n > sys.n_modes()) {
        std::ostringstream os;
        os << "cannot truncate a " << sys.n_modes() << "-mode system to " << n << " modes";
        throw Error(ErrorKind::Parameter, os.str());
    }
    return make_system(sys.omegas.head(n), sys.B1.topRows(n), sys.C1.leftCols(n), sys.gammas);
}

AssumptionReport check_assumptions(const ModalSystem& sys, int tail_probe) {
    AssumptionReport rep;
    const Eigen::Index n = sys.n_modes();
    const Eigen::VectorXd& w = sys.omegas;

    rep.frequencies_ordered = n > 0 && w[0] > 0.0;
    for (Eigen::Index j = 1; j < n && rep.frequencies_ordered; ++j) {
        if (!(w[j] > w[j - 1])) {
            rep.frequencies_ordered = false;
            rep.first_order_violation = static_cast<int>(j) + 1;
        }
    }
    if (n > 0 && !(w[0] > 0.0)) rep.first_order_violation = 1;

    double sum = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
        sum += 1.0 / (w[j] * w[j]);
        rep.partial_sums.push_back(sum);
    }
    const Eigen::Index block = std::max(1, tail_probe);
    for (Eigen::Index start = 0; start + block <= n; start += block)
        rep.block_sums.push_back(
            (w.segment(start, block).array().square().inverse()).sum());
    rep.blocks_shrinking = rep.block_sums.size() >= 2;
    for (std::size_t b = 1; b < rep.block_sums.size(); ++b)
        if (!(rep.block_sums[b] < rep.block_sums[b - 1])) rep.blocks_shrinking = false;

    // log omega_j = log alpha + p log j over the upper half of the spectrum.
    const Eigen::Index first = n >= 4 ? n / 2 : 0;
    const Eigen::Index m = n - first;
    if (m >= 2 && rep.frequencies_ordered) {
        Eigen::MatrixXd design(m, 2);
        Eigen::VectorXd rhs(m);
        for (Eigen::Index k = 0; k < m; ++k) {
            design(k, 0) = 1.0;
            design(k, 1) = std::log(static_cast<double>(first + k + 1));
            rhs[k] = std::log(w[first + k]);
        }
        const Eigen::Vector2d fit = design.colPivHouseholderQr().solve(rhs);
        rep.growth_coefficient = std::exp(fit[0]);
        rep.growth_exponent = fit[1];
        const double p = rep.growth_exponent;
        rep.tail_estimate = p > 0.5 ? 1.0 / (rep.growth_coefficient * rep.growth_coefficient *
                                             (2.0 * p - 1.0) *
                                             std::pow(static_cast<double>(n) + 0.5, 2.0 * p - 1.0))
                                    : std::numeric_limits<double>::infinity();
    } else {
        rep.tail_estimate = std::numeric_limits<double>::infinity();
    }
    rep.series_converges = rep.frequencies_ordered && rep.blocks_shrinking &&
                           rep.growth_exponent > 0.5 && std::isfinite(rep.tail_estimate);

    const Eigen::MatrixXd& c = sys.C1;
    Eigen::VectorXd row_max = c.rowwise().lpNorm<Eigen::Infinity>();
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
        bool nonzero = false;
        for (Eigen::Index s = 0; s < c.rows(); ++s)
            if (row_max[s] > 0.0 && std::abs(c(s, j)) > 1e-10 * row_max[s]) nonzero = true;
        rep.column_nonzero.push_back(nonzero);
        if (!nonzero) rep.zero_columns.push_back(static_cast<int>(j) + 1);
    }
    rep.outputs_cover_modes = c.cols() > 0 && rep.zero_columns.empty();

    if (c.size() > 0) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(c);
        lu.setThreshold(1e-10);
        rep.c1_rank = static_cast<int>(lu.rank());
    }

    rep.assumption3_note =
        "not checked independently: implied by every mode being observed together with "
        "distinct frequencies (linear independence of the modal exponentials)";
    return rep;
}

std::string format_report(const AssumptionReport& r) {
    std::ostringstream os;
    os.precision(10);
    auto verdict = [](bool ok) { return ok ? "PASS" : "FAIL"; };
    os << "assumption 1 (distinct increasing positive frequencies): "
       << verdict(r.frequencies_ordered);
    if (!r.frequencies_ordered) os << " first violation at mode " << r.first_order_violation;
    os << "\n";

    os << "assumption 2 (sum of 1/omega_j^2 converges): " << verdict(r.series_converges) << "\n";
    os << "  partial sum S_N = " << (r.partial_sums.empty() ? 0.0 : r.partial_sums.back()) << "\n";
    os << "  block sums:";
    for (double b : r.block_sums) os << " " << b;
    os << "\n  blocks shrinking: " << (r.blocks_shrinking ? "yes" : "no") << "\n";
    os << "  growth fit omega_j ~ " << r.growth_coefficient << " * j^" << r.growth_exponent << "\n";
    os << "  tail estimate sum_{j>N} 1/omega_j^2 = " << r.tail_estimate << "\n";

    os << "assumption 3 (no nontrivial invariant subspace in Ker C): " << r.assumption3_note
       << "\n";

    os << "assumption 4 (every mode seen by an output): " << verdict(r.outputs_cover_modes);
    if (!r.zero_columns.empty()) {
        os << " unobserved modes:";
        for (int j : r.zero_columns) os << " " << j;
    }
    os << "\n  rank C1 = " << r.c1_rank << "\n";
    return os.str();
}

} // namespace beamobs
