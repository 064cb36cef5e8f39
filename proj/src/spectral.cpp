#include "beamobs/spectral.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace beamobs {

namespace {

// Singular-value ratios separating "root" from "not a root" and a simple from a
// repeated null direction of the equilibrated matching system.
constexpr double kNullTol = 1e-7;

std::string fmt_params(const BeamParams& p) {
    std::ostringstream os;
    os << "rho=" << p.rho << " EI=" << p.EI << " m=" << p.m << " kappa=" << p.kappa
       << " l=" << p.l << " l0=" << p.l0;
    return os.str();
}

// exp(-mu*s) * {sinh, cosh}(mu*x) for 0 <= x <= s.
struct ScaledHyperbolic {
    double sinh_part;
    double cosh_part;
};

ScaledHyperbolic scaled_hyperbolic(double mu, double x, double s) {
    const double up = std::exp(mu * (x - s));
    const double down = std::exp(-mu * (x + s));
    return {0.5 * (up - down), 0.5 * (up + down)};
}

// G for small a by power series.  The closed form loses every digit near
// mu = 0, where G = O(mu^5) is a difference of O(mu^3) terms.
double g_series(double a, double c) {
    const double aa = a * a, cc = c * c;
    const double gap = (c - a) * (c + a);
    double total = 0.0;
    double fact_even = 1.0;  // (2k)!
    for (int k = 1; k <= 10; ++k) {
        fact_even *= (2.0 * k - 1.0) * (2.0 * k);
        // (c^2k - a^2k) = (c^2 - a^2) sum_i c^2i a^2(k-1-i)
        double diff = 0.0, cp = 1.0;
        for (int i = 0; i < k; ++i) {
            diff += cp * std::pow(aa, k - 1 - i);
            cp *= cc;
        }
        diff *= gap;
        double odd = a, fact_odd = 1.0;  // a^(2m+1), (2m+1)!
        for (int m = 0; m <= 10; ++m) {
            if (m > 0) {
                odd *= aa;
                fact_odd *= (2.0 * m) * (2.0 * m + 1.0);
            }
            if ((k + m) % 2 != 0) continue;
            total += 2.0 * (m % 2 == 0 ? 1.0 : -1.0) * diff / fact_even * odd / fact_odd;
        }
    }
    return total;
}

constexpr double kSeriesLimit = 0.5;

// Terms of the scaled characteristic function.  With a = mu l, c = mu (l - 2 l0),
// E = exp(-a - |c|):
//   S = (m mu/rho - kappa/(EI mu^3)) * G E - 4 sin(a) sinh(a) E,
//   G = (cosh c - cosh a) sin a + (cos c - cos a) sinh a.
struct ScaledTerms {
    double value;
    double magnitude;
};

ScaledTerms scaled_terms(double mu, const BeamParams& p) {
    const double a = mu * p.l;
    const double c = std::abs(mu * (p.l - 2.0 * p.l0));
    const double cosh_c = 0.5 * (std::exp(-a) + std::exp(-a - 2.0 * c));
    const double cosh_a = 0.5 * (std::exp(-c) + std::exp(-2.0 * a - c));
    const double sinh_a = 0.5 * (std::exp(-c) - std::exp(-2.0 * a - c));
    const double sa = std::sin(a);
    const double cos_c = std::cos(c);
    const double cos_a = std::cos(a);

    const double mass_coef = p.m * mu / p.rho;
    const double spring_coef = p.kappa / (p.EI * mu * mu * mu);
    const double g = a < kSeriesLimit ? g_series(a, c) * std::exp(-a - c)
                                      : (cosh_c - cosh_a) * sa + (cos_c - cos_a) * sinh_a;
    // envelope of the terms, with every trigonometric factor bounded by one
    const double g_abs = cosh_c + cosh_a + 2.0 * sinh_a;
    const double beam = 4.0 * sa * sinh_a;
    return {(mass_coef - spring_coef) * g - beam,
            (mass_coef + spring_coef) * g_abs + 4.0 * sinh_a};
}

double default_mu_max(const BeamParams& p) {
    // exp(-mu l) is the smallest factor formed in scaled_terms.
    return 680.0 / p.l;
}

double bisect(double lo, double hi, double f_lo, const BeamParams& p, double rel_width) {
    for (int it = 0; it < 200 && (hi - lo) > rel_width * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double f_mid = char_fn_scaled(mid, p);
        if (f_mid == 0.0) return mid;
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Golden-section search for the minimum of |f| on [lo, hi].
double argmin_abs(double lo, double hi, const BeamParams& p) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - inv_phi * (hi - lo);
    double x2 = lo + inv_phi * (hi - lo);
    double f1 = std::abs(char_fn_scaled(x1, p));
    double f2 = std::abs(char_fn_scaled(x2, p));
    for (int it = 0; it < 80; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = std::abs(char_fn_scaled(x1, p));
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = std::abs(char_fn_scaled(x2, p));
        }
    }
    return f1 < f2 ? x1 : x2;
}

bool same_sign(double a, double b) { return (a < 0.0) == (b < 0.0); }

} // namespace

void BeamParams::validate() const {
    auto fail = [this](const char* what) {
        throw Error(ErrorKind::Parameter, std::string("invalid beam parameters: ") + what +
                                              " (" + fmt_params(*this) + ")");
    };
    if (!std::isfinite(rho) || !std::isfinite(EI) || !std::isfinite(m) ||
        !std::isfinite(kappa) || !std::isfinite(l) || !std::isfinite(l0))
        fail("non-finite value");
    if (rho <= 0.0) fail("rho must be positive");
    if (EI <= 0.0) fail("EI must be positive");
    if (l <= 0.0) fail("l must be positive");
    if (m < 0.0) fail("m must be non-negative");
    if (kappa < 0.0) fail("kappa must be non-negative");
    if (!(l0 > 0.0 && l0 < l)) fail("l0 must lie strictly inside (0, l)");
}

double BeamParams::omega_from_mu(double mu) const { return mu * mu * std::sqrt(EI / rho); }

double BeamParams::mu_from_omega(double omega) const {
    return std::sqrt(omega / std::sqrt(EI / rho));
}

std::pair<double, double> Mode::coeffs_left() const {
    return {coeffs[0], coeffs[1] * std::exp(-mu * l0)};
}

std::pair<double, double> Mode::coeffs_right() const {
    return {coeffs[2], coeffs[3] * std::exp(-mu * (l - l0))};
}

double char_fn(double mu, const BeamParams& p) {
    if (!(mu > 0.0)) throw Error(ErrorKind::Domain, "char_fn: mu must be positive");
    const double a = mu * p.l;
    const double c = mu * (p.l - 2.0 * p.l0);
    const double g = a < kSeriesLimit ? g_series(a, c)
                                      : (std::cosh(c) - std::cosh(a)) * std::sin(a) +
                                            (std::cos(c) - std::cos(a)) * std::sinh(a);
    const double mu5 = mu * mu * mu * mu * mu;
    const double value = (p.m / (4.0 * mu * p.rho) - p.kappa / (4.0 * p.EI * mu5)) * g -
                         std::sin(a) * std::sinh(a) / (mu * mu);
    if (!std::isfinite(value)) {
        std::ostringstream os;
        os << "char_fn overflow at mu=" << mu << "; use char_fn_scaled";
        throw Error(ErrorKind::NumericRange, os.str());
    }
    return value;
}

double char_fn_scaled(double mu, const BeamParams& p) {
    if (!(mu > 0.0)) throw Error(ErrorKind::Domain, "char_fn_scaled: mu must be positive");
    return scaled_terms(mu, p).value;
}

double char_fn_scaled_magnitude(double mu, const BeamParams& p) {
    if (!(mu > 0.0)) throw Error(ErrorKind::Domain, "char_fn_scaled: mu must be positive");
    return scaled_terms(mu, p).magnitude;
}

namespace {

Eigen::Matrix4d raw_matching_matrix(double mu, const BeamParams& p) {
    const double s = p.l0;
    const double t = p.l - p.l0;
    const auto hs = scaled_hyperbolic(mu, s, s);
    const auto ht = scaled_hyperbolic(mu, t, t);
    const double ss = std::sin(mu * s), cs = std::cos(mu * s);
    const double st = std::sin(mu * t), ct = std::cos(mu * t);
    // jump coefficient (kappa - omega^2 m)/EI divided by mu^3
    const double q = p.kappa / (p.EI * mu * mu * mu) - mu * p.m / p.rho;

    Eigen::Matrix4d a;
    a << ss, hs.sinh_part, -st, -ht.sinh_part,
         cs, hs.cosh_part, ct, ht.cosh_part,
         -ss, hs.sinh_part, st, -ht.sinh_part,
         -cs - q * ss, hs.cosh_part - q * hs.sinh_part, -ct, ht.cosh_part;
    return a;
}

} // namespace

Eigen::Matrix4d matching_matrix(double mu, const BeamParams& p) {
    Eigen::Matrix4d a = raw_matching_matrix(mu, p);
    for (int r = 0; r < 4; ++r) {
        const double scale = a.row(r).cwiseAbs().maxCoeff();
        if (scale > 0.0) a.row(r) /= scale;
    }
    return a;
}

Eigen::Vector4d matching_residuals(double mu, const BeamParams& p, const Eigen::Vector4d& coeffs) {
    const double cmax = coeffs.cwiseAbs().maxCoeff();
    Eigen::Vector4d res = matching_matrix(mu, p) * coeffs;
    if (cmax > 0.0) res /= cmax;
    return res;
}

Eigen::Vector4d solve_eigenfunction(double mu, const BeamParams& p) {
    const Eigen::Matrix4d a = matching_matrix(mu, p);
    Eigen::JacobiSVD<Eigen::Matrix4d> svd(a, Eigen::ComputeFullV);
    const Eigen::Vector4d sv = svd.singularValues();
    if (sv[3] > kNullTol * sv[0]) {
        std::ostringstream os;
        os << "mu=" << mu << " is not an eigenvalue: matching system has sigma_min/sigma_max="
           << sv[3] / sv[0];
        throw Error(ErrorKind::NotAnEigenvalue, os.str());
    }
    if (sv[2] <= kNullTol * sv[0]) {
        std::ostringstream os;
        os << "mu=" << mu << " has a null space of dimension >= 2";
        throw Error(ErrorKind::DegenerateMode, os.str());
    }

    // Fix the coefficient on the largest column to one and solve for the rest;
    // fall back to the smallest right singular vector if that is ill-posed.
    Eigen::Index pivot = 0;
    a.colwise().norm().maxCoeff(&pivot);
    Eigen::Matrix<double, 4, 3> rest;
    for (int c = 0, k = 0; c < 4; ++c)
        if (c != pivot) rest.col(k++) = a.col(c);
    Eigen::ColPivHouseholderQR<Eigen::Matrix<double, 4, 3>> qr(rest);
    qr.setThreshold(kNullTol);
    Eigen::Vector4d v;
    bool solved = false;
    if (qr.rank() == 3) {
        const Eigen::Vector3d y = qr.solve(-a.col(pivot));
        for (int c = 0, k = 0; c < 4; ++c) v[c] = (c == pivot) ? 1.0 : y[k++];
        solved = (a * v).norm() <= 1e-9 * v.norm();
    }
    if (!solved) v = svd.matrixV().col(3);

    Eigen::Index imax = 0;
    v.cwiseAbs().maxCoeff(&imax);
    v /= v[imax];

    const double slope_left = v[0] + v[1] * std::exp(-mu * p.l0);
    const double slope_right = v[2] + v[3] * std::exp(-mu * (p.l - p.l0));
    const double sign_ref = std::abs(slope_left) > 1e-8 ? slope_left : slope_right;
    if (sign_ref < 0.0) v = -v;
    return v;
}

std::vector<double> find_wavenumbers(const BeamParams& p, int n, const RootSearchOptions& opt) {
    p.validate();
    if (n < 1) throw Error(ErrorKind::Parameter, "find_modes: n must be >= 1");
    const double mu_max = opt.mu_max > 0.0 ? opt.mu_max : default_mu_max(p);
    const double base_step = std::numbers::pi / (4.0 * p.l);

    std::vector<double> roots;
    roots.reserve(static_cast<std::size_t>(n));
    double min_gap = std::numeric_limits<double>::infinity();
    auto push_root = [&](double r) {
        const double prev = roots.empty() ? 0.0 : roots.back();
        min_gap = std::min(min_gap, r - prev);
        roots.push_back(r);
    };

    double x_prev = 0.0, f_prev = 0.0;
    bool have_prev = false;
    double x0 = opt.mu_start;
    double f0 = char_fn_scaled(x0, p);
    while (static_cast<int>(roots.size()) < n) {
        const double step = std::min(base_step, 0.5 * min_gap);
        const double x1 = x0 + step;
        if (x1 > mu_max) {
            std::ostringstream os;
            os << "found " << roots.size() << " of " << n << " roots scanning mu in ["
               << opt.mu_start << ", " << mu_max << "]";
            throw Error(ErrorKind::SearchRange, os.str());
        }
        const double f1 = char_fn_scaled(x1, p);
        if (f0 == 0.0) {
            push_root(x0);
        } else if (!same_sign(f0, f1) && f1 != 0.0) {
            push_root(bisect(x0, x1, f0, p, opt.rel_width));
        } else if (have_prev && f1 != 0.0 && same_sign(f_prev, f0) && same_sign(f0, f1) &&
                   std::abs(f0) < std::abs(f_prev) && std::abs(f0) < std::abs(f1)) {
            // |f| dips without crossing: either two roots inside one step pair or a
            // (near-)double root.
            const double xm = argmin_abs(x_prev, x1, p);
            const double fm = char_fn_scaled(xm, p);
            if (fm != 0.0 && !same_sign(fm, f0)) {
                push_root(bisect(x_prev, xm, f_prev, p, opt.rel_width));
                if (static_cast<int>(roots.size()) < n)
                    push_root(bisect(xm, x1, fm, p, opt.rel_width));
            } else if (std::abs(fm) <= 1e-12 * std::max(std::abs(f_prev), std::abs(f1))) {
                std::ostringstream os;
                os << "double root near mu=" << xm << " (" << fmt_params(p) << ")";
                throw Error(ErrorKind::DegenerateSpectrum, os.str());
            }
        }
        x_prev = x0;
        f_prev = f0;
        have_prev = true;
        x0 = x1;
        f0 = f1;
    }
    return roots;
}

Mode make_mode(int index, double mu, const BeamParams& p) {
    Mode mode;
    mode.index = index;
    mode.mu = mu;
    mode.omega = p.omega_from_mu(mu);
    mode.coeffs = solve_eigenfunction(mu, p);
    mode.l = p.l;
    mode.l0 = p.l0;
    mode.norm_sq = inner_product(mode, mode, p);
    return mode;
}

std::vector<Mode> find_modes(const BeamParams& p, int n, const RootSearchOptions& opt) {
    const std::vector<double> mus = find_wavenumbers(p, n, opt);
    std::vector<Mode> modes;
    modes.reserve(mus.size());
    for (std::size_t j = 0; j < mus.size(); ++j)
        modes.push_back(make_mode(static_cast<int>(j) + 1, mus[j], p));
    return modes;
}

double eval_mode(const Mode& mode, double x, int order, Side side) {
    if (order < 0 || order > 3)
        throw Error(ErrorKind::Domain, "eval_mode: derivative order must be 0..3");
    if (!(x >= 0.0 && x <= mode.l)) {
        std::ostringstream os;
        os << "eval_mode: x=" << x << " outside [0, " << mode.l << "]";
        throw Error(ErrorKind::Domain, os.str());
    }
    if (order == 3 && x == mode.l0 && side == Side::Unspecified)
        throw Error(ErrorKind::Ambiguity,
                    "eval_mode: third derivative at l0 is one-sided; pass Side::Left or Side::Right");

    const double mu = mode.mu;
    const double mu_pow = std::pow(mu, order);
    const bool left = x < mode.l0 || (x == mode.l0 && side != Side::Right);
    // Local coordinate measured from the pinned end of the piece.
    const double y = left ? x : mode.l - x;
    const double span = left ? mode.l0 : mode.l - mode.l0;
    const double a = left ? mode.coeffs[0] : mode.coeffs[2];
    const double b = left ? mode.coeffs[1] : mode.coeffs[3];

    double trig = 0.0;
    switch (order) {
    case 0: trig = std::sin(mu * y); break;
    case 1: trig = std::cos(mu * y); break;
    case 2: trig = -std::sin(mu * y); break;
    default: trig = -std::cos(mu * y); break;
    }
    const auto h = scaled_hyperbolic(mu, y, span);
    const double hyp = (order % 2 == 0) ? h.sinh_part : h.cosh_part;
    // d/dx = -d/dy on the right piece.
    const double sign = (!left && order % 2 == 1) ? -1.0 : 1.0;
    return sign * mu_pow * (a * trig + b * hyp);
}

namespace {

struct PanelSum {
    double value = 0.0;
    double error = 0.0;
    double roundoff = 0.0;  // error estimates of panels limited by roundoff
    double l1 = 0.0;
    bool converged = true;
};

struct PanelEstimate {
    double value = 0.0;
    double error = 0.0;
    double l1 = 0.0;
};

template <class F>
PanelEstimate kronrod(const F& f, double a, double b) {
    using boost::math::quadrature::gauss_kronrod;
    PanelEstimate e;
    e.value = gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &e.error, &e.l1);
    return e;
}

// Adaptive Gauss-Kronrod.  A panel is accepted when its error is within
// rate * width, or when halving it no longer lowers the error (roundoff).
template <class F>
void panel(const F& f, double a, double b, const PanelEstimate& est, double rate, int depth,
           PanelSum& acc) {
    auto accept = [&](const PanelEstimate& e, bool noisy = false) {
        acc.value += e.value;
        (noisy ? acc.roundoff : acc.error) += e.error;
        acc.l1 += e.l1;
    };
    if (est.error <= rate * (b - a)) return accept(est);
    const double mid = 0.5 * (a + b);
    const PanelEstimate left = kronrod(f, a, mid);
    const PanelEstimate right = kronrod(f, mid, b);
    if (left.error + right.error >= 0.5 * est.error) return accept(est, true);
    if (depth == 0) {
        acc.converged = false;
        return accept(est);
    }
    panel(f, a, mid, left, rate, depth - 1, acc);
    panel(f, mid, b, right, rate, depth - 1, acc);
}

template <class F>
void integrate_piece(const F& f, double a, double b, double mu, double rate, PanelSum& acc) {
    // start from panels about half a wavelength long
    const int n = 1 + static_cast<int>(std::ceil(mu * (b - a) / std::numbers::pi));
    const double h = (b - a) / n;
    for (int k = 0; k < n; ++k) {
        const double lo = a + k * h, hi = k + 1 == n ? b : a + (k + 1) * h;
        panel(f, lo, hi, kronrod(f, lo, hi), rate, 30, acc);
    }
}

} // namespace

double inner_product(const Mode& mi, const Mode& mj, const BeamParams& p) {
    auto integrand = [&](double x) { return p.rho * eval_mode(mi, x, 0) * eval_mode(mj, x, 0); };
    const double mu = std::max(mi.mu, mj.mu);
    const bool known = mi.norm_sq > 0.0 && mj.norm_sq > 0.0;
    double scale = known ? std::sqrt(mi.norm_sq * mj.norm_sq) : 0.0;
    if (!known) {
        // coarse pass for the size of the integrand
        PanelSum coarse;
        const double inf = std::numeric_limits<double>::infinity();
        integrate_piece(integrand, 0.0, p.l0, mu, inf, coarse);
        integrate_piece(integrand, p.l0, p.l, mu, inf, coarse);
        scale = coarse.l1;
    }
    const double rate = 0.5e-12 * scale / p.l;

    PanelSum acc;
    integrate_piece(integrand, 0.0, p.l0, mu, rate, acc);
    integrate_piece(integrand, p.l0, p.l, mu, rate, acc);
    // Roundoff-limited panels cannot be refined further; they are held to a
    // looser bound than the truncation error.
    if (!acc.converged || !(acc.error <= 1e-12 * scale) || !(acc.roundoff <= 1e-10 * scale)) {
        std::ostringstream os;
        os << "inner_product(" << mi.index << ", " << mj.index << "): quadrature reached only "
           << acc.error + acc.roundoff << " absolute error";
        throw Error(ErrorKind::Accuracy, os.str());
    }
    return acc.value + p.m * eval_mode(mi, p.l0, 0) * eval_mode(mj, p.l0, 0);
}

Eigen::MatrixXd gram_matrix(const std::vector<Mode>& modes, const BeamParams& p) {
    const auto n = static_cast<Eigen::Index>(modes.size());
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i; j < n; ++j)
            g(i, j) = g(j, i) = inner_product(modes[static_cast<std::size_t>(i)],
                                              modes[static_cast<std::size_t>(j)], p);
    return g;
}

} // namespace beamobs
