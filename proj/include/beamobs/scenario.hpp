#pragma once

// Declarative experiment description read from an INI file:
//
//   [beam]       rho, EI, m, kappa, l, l0
//   [sensors]    body_output (true|false), positions (comma list)
//   [actuators]  one key per actuator, value "x_begin:x_end:amplitude, ..."
//   [observer]   gains (one value or one per output), n_modes
//   [initial]    rule = paper | explicit; Delta, delta (comma lists) for explicit
//   [time]       t_end, samples
//   [sweep]      gammas, n_modes (comma lists)
//   [resolvent]  lambdas (comma list), trend (comma list of truncations),
//                density_window (0 picks one)
//   [check]      tail_probe, n_modes (truncation used by the assumption check)
//
// Unknown sections or keys are rejected.

#include <Eigen/Core>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "beamobs/modal.hpp"
#include "beamobs/observer.hpp"

namespace beamobs {

struct InitialConditions {
    enum class Rule { Paper, Explicit };
    Rule rule = Rule::Paper;
    Eigen::VectorXd Delta;  // explicit rule only
    Eigen::VectorXd delta;

    ErrorState resolve(const Eigen::VectorXd& omegas) const;
};

struct Scenario {
    BeamParams beam;
    SensorConfig sensors;
    std::vector<ActuatorShape> actuators;
    std::vector<double> gains{6.0};
    int n_modes = 6;
    InitialConditions initial;
    double t_end = 20.0;
    int samples = 2000;
    std::vector<double> sweep_gammas;
    std::vector<int> sweep_n_modes;
    std::vector<double> lambdas{1e-3, 1e-2, 1e-1};
    std::vector<int> trend_n_modes{5, 20, 40};
    double density_window = 0.0;
    int tail_probe = 10;
    int check_n_modes = 40;

    /// Throws Error(Configuration) naming the offending field.
    void validate() const;
};

Scenario parse_scenario(std::istream& in, const std::string& origin);
Scenario load_scenario(const std::filesystem::path& path);

/// Modes, operators and gains of a scenario at its truncation order.
struct Assembly {
    std::vector<Mode> modes;
    ModalSystem system;
};

Assembly assemble(const Scenario& scenario);
Assembly assemble(const Scenario& scenario, const std::vector<Mode>& modes);

} // namespace beamobs
