#include "beamobs/resolvent.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace beamobs {

namespace {

double spectral_norm(const Eigen::MatrixXd& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    return svd.singularValues()[0];
}

} // namespace

ResolventContext build_context(const ModalSystem& sys, double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw Error(ErrorKind::Parameter, "resolvent shift lambda must be positive");
    const Eigen::VectorXd inv_d =
        (lambda * lambda + sys.omegas.array().square()).inverse().matrix();
    const Eigen::Index r = sys.n_outputs();

    ResolventContext ctx;
    ctx.lambda = lambda;
    ctx.truncation = sys.n_modes();
    // M = I + lambda (C1 D^{-1} C1^T) diag(gamma)
    const Eigen::MatrixXd gram = sys.C1 * inv_d.asDiagonal() * sys.C1.transpose();
    ctx.M = Eigen::MatrixXd::Identity(r, r) + lambda * gram * sys.gammas.asDiagonal();

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(ctx.M);
    ctx.rcond = lu.rcond();
    if (!(ctx.rcond > 1e-13)) {
        std::ostringstream os;
        os << "M is numerically singular at lambda=" << lambda << " (rcond=" << ctx.rcond
           << "); use a smaller shift";
        throw Error(ErrorKind::ShiftTooLarge, os.str());
    }
    ctx.M_inv = lu.inverse();
    return ctx;
}

ErrorState resolvent_apply(const ResolventContext& ctx, const ModalSystem& sys,
                           const ErrorState& rhs) {
    if (rhs.size() != sys.n_modes() || ctx.truncation != sys.n_modes())
        throw Error(ErrorKind::Parameter, "resolvent_apply: dimension mismatch");
    const double lam = ctx.lambda;
    const Eigen::ArrayXd w = sys.omegas.array();
    const Eigen::ArrayXd d = lam * lam + w.square();

    // (lambda Delta_bar_i + omega_i delta_bar_i) / d_i
    const Eigen::VectorXd forcing =
        ((lam * rhs.Delta.array() + w * rhs.delta.array()) / d).matrix();
    const Eigen::VectorXd phi = -ctx.M_inv * (sys.C1 * forcing);
    const Eigen::ArrayXd injection = (sys.C1.transpose() * sys.gammas.asDiagonal() * phi).array();

    ErrorState out;
    out.Delta = (-(lam * rhs.Delta.array() + w * rhs.delta.array() + lam * injection) / d).matrix();
    out.delta = ((w * rhs.Delta.array() - lam * rhs.delta.array() + w * injection) / d).matrix();
    return out;
}

Eigen::MatrixXd coupling_kernel(const ResolventContext& ctx, const ModalSystem& sys) {
    return sys.C1.transpose() * sys.gammas.asDiagonal() * ctx.M_inv * sys.C1;
}

ResolventBlocks resolvent_blocks(const ResolventContext& ctx, const ModalSystem& sys) {
    const Eigen::Index n = sys.n_modes();
    const double lam = ctx.lambda;
    const Eigen::VectorXd& w = sys.omegas;
    const Eigen::ArrayXd d = lam * lam + w.array().square();
    const Eigen::MatrixXd k = coupling_kernel(ctx, sys);

    ResolventBlocks b;
    b.R1.resize(n, n);
    b.R2.resize(n, n);
    b.R3.resize(n, n);
    b.R4.resize(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double kron = (i == j) ? 1.0 : 0.0;
            b.R1(j, i) = lam / d[j] * (lam / d[i] * k(j, i) - kron);
            b.R2(j, i) = 1.0 / d[j] * (lam * w[i] / d[i] * k(j, i) - w[j] * kron);
            b.R3(j, i) = -(w[j] / lam) * b.R1(j, i);
            b.R4(j, i) = -1.0 / d[j] * (w[j] * w[i] / d[i] * k(j, i) + lam * kron);
        }
    }
    return b;
}

Eigen::MatrixXd ResolventBlocks::assembled() const {
    const Eigen::Index n = R1.rows();
    Eigen::MatrixXd r(2 * n, 2 * n);
    r << R1, R2, R3, R4;
    return r;
}

double hs_bound(const ResolventContext& ctx, const ModalSystem& sys) {
    const Eigen::MatrixXd k = coupling_kernel(ctx, sys);
    const Eigen::ArrayXd inv_w2 = sys.omegas.array().square().inverse();
    const Eigen::Index n = sys.n_modes();
    double total = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            total += inv_w2[j] * (inv_w2[i] * k(j, i) * k(j, i) + 2.0);
    return 2.0 * total;
}

double hs_bound(const ModalSystem& sys, double lambda) {
    return hs_bound(build_context(sys, lambda), sys);
}

double hs_norm(const ResolventBlocks& b) {
    return std::sqrt(b.R1.squaredNorm() + b.R2.squaredNorm() + b.R3.squaredNorm() +
                     b.R4.squaredNorm());
}

std::vector<HsTrendPoint> hs_trend(const ModalSystem& sys, double lambda,
                                   const std::vector<Eigen::Index>& truncations) {
    std::vector<HsTrendPoint> out;
    for (Eigen::Index n : truncations) {
        const ModalSystem sub = truncate(sys, n);
        const ResolventContext ctx = build_context(sub, lambda);
        out.push_back({n, hs_norm(resolvent_blocks(ctx, sub)), hs_bound(ctx, sub)});
    }
    return out;
}

MPerturbationReport m_perturbation(const ModalSystem& sys, const std::vector<double>& lambdas) {
    MPerturbationReport rep;
    for (double lam : lambdas) {
        const ResolventContext ctx = build_context(sys, lam);
        const Eigen::Index r = ctx.M.rows();
        MShiftSample s;
        s.lambda = lam;
        s.distance_to_identity = spectral_norm(ctx.M - Eigen::MatrixXd::Identity(r, r));
        s.inverse_norm = spectral_norm(ctx.M_inv);
        rep.identity_constant = std::max(rep.identity_constant, s.distance_to_identity / lam);
        rep.inverse_constant = std::max(rep.inverse_constant, (s.inverse_norm - 1.0) / lam);
        rep.samples.push_back(s);
    }
    const Eigen::ArrayXd col_energy = sys.C1.colwise().squaredNorm().transpose().array();
    rep.predicted_constant =
        sys.gammas.maxCoeff() * (col_energy / sys.omegas.array().square()).sum();
    return rep;
}

DensityReport eigenvalue_density(const std::vector<double>& omegas, double window) {
    if (omegas.size() < 10) {
        std::ostringstream os;
        os << "eigenvalue_density needs at least 10 frequencies, got " << omegas.size();
        throw Error(ErrorKind::InsufficientData, os.str());
    }
    if (!(window > 0.0)) throw Error(ErrorKind::Parameter, "density window must be positive");

    DensityReport rep;
    rep.window = window;
    const double lo = omegas.front();
    const double hi = omegas.back();
    for (double y = lo; y + window <= hi * (1.0 + 1e-12); y += window) {
        const int q = static_cast<int>(std::count_if(
            omegas.begin(), omegas.end(), [&](double w) { return w >= y && w < y + window; }));
        rep.window_starts.push_back(y);
        rep.counts.push_back(q);
        rep.densities.push_back(q / window);
    }
    if (rep.densities.size() < 3) {
        std::ostringstream os;
        os << "window " << window << " leaves only " << rep.densities.size()
           << " full windows on [" << lo << ", " << hi << "]";
        throw Error(ErrorKind::InsufficientData, os.str());
    }

    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (std::size_t k = 0; k < rep.densities.size(); ++k) {
        if (rep.counts[k] == 0) continue;
        const double x = std::log(rep.window_starts[k] + 0.5 * window);
        const double y = std::log(rep.densities[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n >= 2) rep.fitted_exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    rep.decreasing = n >= 2 && rep.fitted_exponent < -0.1 &&
                     rep.densities.back() < rep.densities.front();
    return rep;
}

} // namespace beamobs
