#pragma once

#include <random>
#include <vector>

#include "beamobs/modal.hpp"

namespace fixtures {

// Stand-in physical constants for the shipped scenario geometry.
inline beamobs::BeamParams default_beam() {
    return {.rho = 0.518, .EI = 4.9, .m = 0.1, .kappa = 10.0, .l = 1.875, .l0 = 1.378};
}

// m = kappa = 0: simply supported beam with W_j = sin(j pi x / l).
inline beamobs::BeamParams pinned_beam(double l = 1.0, double rho = 1.0) {
    return {.rho = rho, .EI = 1.0, .m = 0.0, .kappa = 0.0, .l = l, .l0 = 0.37 * l};
}

inline beamobs::SensorConfig default_sensors(bool body_output = true) {
    return {body_output, {0.075, 0.716, 1.128, 1.555}};
}

inline std::vector<beamobs::ActuatorShape> dummy_actuator() {
    return {beamobs::ActuatorShape{{{0.2, 0.4, 1.0}}}};
}

inline beamobs::ModalSystem default_system(int n, double gamma, bool body_output = true) {
    const auto beam = default_beam();
    const auto modes = beamobs::find_modes(beam, n);
    const auto sensors = default_sensors(body_output);
    return beamobs::build_system(modes, sensors, dummy_actuator(),
                                 beamobs::expand_gains({gamma}, sensors.n_outputs()), beam);
}

// Random system with given frequencies and a dense random output matrix.
inline beamobs::ModalSystem random_system(std::mt19937& rng, int n, int r, double gamma) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Eigen::VectorXd omegas(n);
    double w = 0.0;
    for (int j = 0; j < n; ++j) {
        w += 0.5 + std::abs(unit(rng)) * 2.0 + j;
        omegas[j] = w;
    }
    Eigen::MatrixXd c1(r, n);
    for (int s = 0; s < r; ++s)
        for (int j = 0; j < n; ++j) c1(s, j) = unit(rng);
    return beamobs::make_system(omegas, Eigen::MatrixXd::Zero(n, 1), c1,
                                Eigen::VectorXd::Constant(r, gamma));
}

inline Eigen::VectorXd random_vector(std::mt19937& rng, Eigen::Index n) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
    return v;
}

} // namespace fixtures
