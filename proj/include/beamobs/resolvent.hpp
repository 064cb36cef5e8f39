#pragma once

// Resolvent (A_hat - lambda I)^{-1} of the error generator on a truncation,
// written through the r x r matrix
//
//   M_sp = lambda gamma_p sum_i c_si c_pi / (lambda^2 + omega_i^2) + delta_sp
//
// so that only an r x r system is ever solved.  Used to check the
// Hilbert-Schmidt estimate behind precompactness of error trajectories; the
// simulator does not go through here.

#include <Eigen/Core>

#include <vector>

#include "beamobs/observer.hpp"

namespace beamobs {

struct ResolventContext {
    double lambda = 0.0;
    Eigen::MatrixXd M;
    Eigen::MatrixXd M_inv;
    Eigen::Index truncation = 0;
    double rcond = 0.0;  // reciprocal condition estimate of M
};

/// Throws Error(Parameter) for lambda <= 0 and Error(ShiftTooLarge) when M is
/// numerically singular.
ResolventContext build_context(const ModalSystem& system, double lambda);

/// Solves (A_hat - lambda I)(Delta, delta) = rhs component-wise.
ErrorState resolvent_apply(const ResolventContext& ctx, const ModalSystem& system,
                           const ErrorState& rhs);

struct ResolventBlocks {
    Eigen::MatrixXd R1;  // Delta  <- Delta_bar
    Eigen::MatrixXd R2;  // Delta  <- delta_bar
    Eigen::MatrixXd R3;  // delta  <- Delta_bar, equal to -(omega_j/lambda) R1
    Eigen::MatrixXd R4;  // delta  <- delta_bar

    /// [R1 R2; R3 R4], equal to (A_hat - lambda I)^{-1}.
    Eigen::MatrixXd assembled() const;
};

ResolventBlocks resolvent_blocks(const ResolventContext& ctx, const ModalSystem& system);

/// K_ji = sum_{s,p} gamma_s Minv_sp c_sj c_pi.
Eigen::MatrixXd coupling_kernel(const ResolventContext& ctx, const ModalSystem& system);

/// 2 sum_{j,i} (1/omega_j^2) ((1/omega_i^2) K_ji^2 + 2) over the truncation.
/// The constant term is summed over both indices exactly as the estimate is
/// written, so this value grows linearly with the truncation order even when
/// the resolvent's Hilbert-Schmidt norm converges.
double hs_bound(const ResolventContext& ctx, const ModalSystem& system);
double hs_bound(const ModalSystem& system, double lambda);

/// Frobenius norm of the assembled blocks.
double hs_norm(const ResolventBlocks& blocks);

struct HsTrendPoint {
    Eigen::Index n_modes = 0;
    double norm = 0.0;
    double bound = 0.0;
};

/// hs_norm and hs_bound on nested truncations of the system.
std::vector<HsTrendPoint> hs_trend(const ModalSystem& system, double lambda,
                                   const std::vector<Eigen::Index>& truncations);

struct MShiftSample {
    double lambda = 0.0;
    double distance_to_identity = 0.0;  // |M - I|_2
    double inverse_norm = 0.0;          // |M^{-1}|_2
};

struct MPerturbationReport {
    std::vector<MShiftSample> samples;
    double identity_constant = 0.0;   // max |M - I| / lambda
    double inverse_constant = 0.0;    // max (|M^{-1}| - 1) / lambda, floored at 0
    double predicted_constant = 0.0;  // gamma_max sum_i (sum_s c_si^2) / omega_i^2
};

MPerturbationReport m_perturbation(const ModalSystem& system, const std::vector<double>& lambdas);

struct DensityReport {
    double window = 0.0;
    std::vector<double> window_starts;
    std::vector<int> counts;
    std::vector<double> densities;   // counts / window
    double fitted_exponent = 0.0;    // slope of log density vs log window centre
    bool decreasing = false;
};

/// Counting-function densities Q[y, y + window)/window over consecutive
/// windows starting at omega_1.  Needs at least 10 frequencies.
DensityReport eigenvalue_density(const std::vector<double>& omegas, double window);

} // namespace beamobs
