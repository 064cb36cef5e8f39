#pragma once

// Spectral problem of a pinned-pinned Euler-Bernoulli beam carrying a point
// mass m on a spring kappa at x = l0:
//
//   W'''' = omega^2 (rho/EI) W        on (0, l) \ {l0}
//   W(0) = W(l) = W''(0) = W''(l) = 0, W in C^2[0, l]
//   W'''(l0-) - W'''(l0+) = (kappa - omega^2 m)/EI * W(l0)
//
// with wavenumber mu, mu^4 = omega^2 rho / EI.  Each eigenfunction is stored
// piecewise as
//
//   W(x) = a1 sin(mu x)     + b1 sinh(mu x)        on [0, l0]
//   W(x) = a2 sin(mu (l-x)) + b2 sinh(mu (l-x))    on [l0, l]
//
// which satisfies the four pinned boundary conditions identically.  The
// hyperbolic amplitudes are kept exponent-scaled, b1 = b1s exp(-mu l0) and
// b2 = b2s exp(-mu (l - l0)), so nothing overflows for large mu l.

#include <Eigen/Core>

#include <utility>
#include <vector>

#include "beamobs/error.hpp"

namespace beamobs {

struct BeamParams {
    double rho = 0.0;   // linear mass density, kg/m
    double EI = 0.0;    // bending stiffness, N m^2
    double m = 0.0;     // attached mass, kg
    double kappa = 0.0; // spring stiffness, N/m
    double l = 0.0;     // beam length, m
    double l0 = 0.0;    // attachment abscissa, m

    /// Throws Error(Parameter) unless rho, EI, l > 0, m, kappa >= 0 and 0 < l0 < l.
    void validate() const;

    double omega_from_mu(double mu) const;
    double mu_from_omega(double omega) const;
};

enum class Side { Unspecified, Left, Right };

struct Mode {
    int index = 0;         // 1-based
    double mu = 0.0;       // wavenumber, 1/m
    double omega = 0.0;    // angular frequency, rad/s
    /// (a1, b1s, a2, b2s): sine amplitudes and exponent-scaled sinh amplitudes.
    Eigen::Vector4d coeffs = Eigen::Vector4d::Zero();
    double norm_sq = 0.0;  // squared norm in the mass-weighted inner product
    double l = 0.0;
    double l0 = 0.0;

    /// Unscaled (a1, b1) of the left piece.  b1 may underflow to zero for large mu l0.
    std::pair<double, double> coeffs_left() const;
    /// Unscaled (a2, b2) of the right piece.
    std::pair<double, double> coeffs_right() const;
};

/// Characteristic function Delta expressed in mu.  Its positive roots are the
/// wavenumbers of the spectral problem; det(matching system) = 4 mu^5 Delta.
/// Throws Error(NumericRange) when the unscaled value overflows.
double char_fn(double mu, const BeamParams& params);

/// Delta * 4 mu^2 * exp(-mu l) * exp(-mu |l - 2 l0|), evaluated without forming
/// any overflowing hyperbolic.  Same roots as char_fn.
double char_fn_scaled(double mu, const BeamParams& params);

/// Envelope of the terms of char_fn_scaled (trigonometric factors replaced
/// by one); the yardstick for a relative residual.
double char_fn_scaled_magnitude(double mu, const BeamParams& params);

/// Row-equilibrated 4x4 matching system in the scaled unknowns
/// (a1, b1s, a2, b2s): continuity of W, W', W'' and the W''' jump at l0.
Eigen::Matrix4d matching_matrix(double mu, const BeamParams& params);

/// Residuals of the four matching conditions for a coefficient quadruple,
/// each relative to its row's largest entry times max|coeff|.
Eigen::Vector4d matching_residuals(double mu, const BeamParams& params,
                                   const Eigen::Vector4d& coeffs);

/// Null vector of the matching system, normalized to max|coeff| = 1 with
/// W'(0) > 0.  Throws NotAnEigenvalue when the system is numerically regular and
/// DegenerateMode when the null space is at least two-dimensional.
Eigen::Vector4d solve_eigenfunction(double mu, const BeamParams& params);

struct RootSearchOptions {
    double mu_start = 1e-6;
    double mu_max = 0.0;       // <= 0 picks the largest mu with no underflow in char_fn_scaled
    double rel_width = 1e-13;  // bisection stops at (hi - lo) <= rel_width * hi
};

/// The n smallest modes, ordered by frequency, with eigenfunctions and norms.
std::vector<Mode> find_modes(const BeamParams& params, int n,
                             const RootSearchOptions& options = {});

/// Wavenumbers only; the scan + bisection half of find_modes.
std::vector<double> find_wavenumbers(const BeamParams& params, int n,
                                     const RootSearchOptions& options = {});

/// Builds a Mode for a known root mu (norm_sq filled in).
Mode make_mode(int index, double mu, const BeamParams& params);

/// W^(order)(x), order in 0..3.  At x == l0 the third derivative is one-sided
/// and needs side = Left or Right.
double eval_mode(const Mode& mode, double x, int order, Side side = Side::Unspecified);

/// <Wi, Wj> = int_0^l rho Wi Wj dx + m Wi(l0) Wj(l0), by adaptive
/// Gauss-Kronrod quadrature on [0, l0] and [l0, l].
double inner_product(const Mode& mode_i, const Mode& mode_j, const BeamParams& params);

Eigen::MatrixXd gram_matrix(const std::vector<Mode>& modes, const BeamParams& params);

} // namespace beamobs
