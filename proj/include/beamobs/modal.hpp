#pragma once

// Truncated modal control system
//
//   xi'  =  Omega eta
//   eta' = -Omega xi + B1 u,      y = C1 xi
//
// assembled from beam modes, sensors and actuators, together with the
// observer gain F = (f; 0), f_js = gamma_s c_sj.

#include <Eigen/Core>

#include <string>
#include <vector>

#include "beamobs/spectral.hpp"

namespace beamobs {

struct SensorConfig {
    /// Include the body displacement row c_1j = W_j(l0).
    bool body_output = true;
    /// Curvature sensor abscissae; each contributes a row c_sj = W_j''(position).
    std::vector<double> positions;

    int n_outputs() const { return static_cast<int>(positions.size()) + (body_output ? 1 : 0); }
    void validate(const BeamParams& params) const;
};

struct ActuatorPiece {
    double x_begin = 0.0;
    double x_end = 0.0;
    double amplitude = 0.0;
};

/// Piecewise-constant distributed actuator psi(x).  The point force at l0 is
/// always input channel 0 and is not represented here.
struct ActuatorShape {
    std::vector<ActuatorPiece> pieces;

    void validate(const BeamParams& params) const;
};

struct ModalSystem {
    Eigen::VectorXd omegas;  // N
    Eigen::MatrixXd B1;      // N x (k+1)
    Eigen::MatrixXd C1;      // r x N
    Eigen::VectorXd gammas;  // r
    Eigen::MatrixXd F;       // 2N x r

    Eigen::Index n_modes() const { return omegas.size(); }
    Eigen::Index n_outputs() const { return C1.rows(); }
    Eigen::Index n_inputs() const { return B1.cols(); }

    /// Upper block f of F, N x r.
    auto gain_upper() const { return F.topRows(n_modes()); }
};

/// r x N output matrix: W_j(l0) (if body_output) then W_j'' at each sensor.
Eigen::MatrixXd build_output_matrix(const std::vector<Mode>& modes, const SensorConfig& sensors);

/// N x (k+1) input matrix: column 0 is W_j(l0)/|W_j|^2, column p the
/// actuator integral int psi_p W_j'' dx / |W_j|^2 (exact for piecewise-constant psi).
Eigen::MatrixXd build_input_matrix(const std::vector<Mode>& modes,
                                   const std::vector<ActuatorShape>& actuators,
                                   const BeamParams& params);

/// 2N x r gain operator with f_js = gamma_s c_sj and a zero lower block.
/// Throws Error(Parameter) for a non-positive gamma or a length mismatch.
Eigen::MatrixXd build_gain(const Eigen::MatrixXd& C1, const Eigen::VectorXd& gammas);

/// Gains as given, or broadcast when a single value is supplied.
Eigen::VectorXd expand_gains(const std::vector<double>& gains, Eigen::Index n_outputs);

ModalSystem build_system(const std::vector<Mode>& modes, const SensorConfig& sensors,
                         const std::vector<ActuatorShape>& actuators,
                         const Eigen::VectorXd& gammas, const BeamParams& params);

/// System from raw operator data, e.g. a reloaded dump.  F is rebuilt from C1 and gammas.
ModalSystem make_system(Eigen::VectorXd omegas, Eigen::MatrixXd B1, Eigen::MatrixXd C1,
                        Eigen::VectorXd gammas);

/// First n modes of a system (frequencies, rows of B1, columns of C1); F is rebuilt.
ModalSystem truncate(const ModalSystem& system, Eigen::Index n);

struct AssumptionReport {
    // distinct, increasing, positive frequencies
    bool frequencies_ordered = false;
    int first_order_violation = 0;  // 1-based mode index, 0 if none

    // convergence of sum 1/omega_j^2
    std::vector<double> partial_sums;     // S_n, n = 1..N
    std::vector<double> block_sums;       // sums over consecutive blocks of tail_probe modes
    bool blocks_shrinking = false;
    double growth_exponent = 0.0;         // fitted p in omega_j ~ alpha j^p
    double growth_coefficient = 0.0;      // fitted alpha
    double tail_estimate = 0.0;           // estimated sum_{j>N} 1/omega_j^2
    bool series_converges = false;

    // every mode is seen by some output
    std::vector<bool> column_nonzero;
    std::vector<int> zero_columns;        // 1-based mode indices
    bool outputs_cover_modes = false;
    int c1_rank = 0;

    std::string assumption3_note;

    bool all_pass() const { return frequencies_ordered && series_converges && outputs_cover_modes; }
};

/// Diagnostic check of frequency ordering, summability of 1/omega^2 and the
/// per-mode output condition.  tail_probe is the block length of the Cauchy test.
AssumptionReport check_assumptions(const ModalSystem& system, int tail_probe);

std::string format_report(const AssumptionReport& report);

} // namespace beamobs
