#pragma once

// Subcommands of the beamobs tool.  Each writes its files into an output
// directory and returns their paths plus a short summary for the terminal.
// Outputs depend only on the scenario (and the seed for the resolvent
// round-trip probe), never on timing or thread scheduling.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "beamobs/resolvent.hpp"
#include "beamobs/scenario.hpp"

namespace beamobs {

struct RunResult {
    std::vector<std::filesystem::path> files;
    std::string summary;
};

/// modes.csv, eigenfunctions.csv
RunResult run_modes(const Scenario& scenario, const std::filesystem::path& out);

/// omega.csv, B1.csv, C1.csv, F.csv, gains.csv
RunResult run_assemble(const Scenario& scenario, const std::filesystem::path& out);

/// trajectory.csv, simulate_report.txt.  With a dump directory the operators
/// are read from a previous `assemble` instead of being rebuilt.
RunResult run_simulate(const Scenario& scenario, const std::filesystem::path& out,
                       const std::optional<std::filesystem::path>& from_dump = std::nullopt);

/// resolvent_M_<k>.csv, resolvent_blocks_<k>.csv for each shift, resolvent_report.txt
RunResult run_resolvent(const Scenario& scenario, const std::filesystem::path& out,
                        unsigned seed = 1);

/// check_report.txt
RunResult run_check(const Scenario& scenario, const std::filesystem::path& out);

struct SweepEntry {
    double gamma = 0.0;
    int n_modes = 0;
    DecayMetrics metrics;
    double w_end = 0.0;
};

/// Decay metrics for every (gamma, N) of the scenario's sweep lists, in
/// gamma-major order.  Entries run concurrently.
std::vector<SweepEntry> sweep(const Scenario& scenario);

/// sweep.csv, sweep_report.txt
RunResult run_sweep(const Scenario& scenario, const std::filesystem::path& out);

/// Operators written by run_assemble.
ModalSystem load_dump(const std::filesystem::path& dir);

} // namespace beamobs
