// beamobs: modal observer experiments for a beam with an attached body.
//
//   beamobs <modes|assemble|simulate|resolvent|check|sweep> --config FILE [options]

#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "beamobs/commands.hpp"

namespace {

struct Options {
    std::string config;
    std::string out = "out";
    std::optional<int> n_modes;
    std::vector<double> gammas;
    std::optional<double> t_end;
    std::optional<int> samples;
    unsigned seed = 1;
    bool curvature_only = false;
    std::optional<std::string> from_dump;
};

beamobs::Scenario configure(const Options& o, const std::string& command) {
    beamobs::Scenario sc = beamobs::load_scenario(o.config);
    if (o.curvature_only && sc.sensors.body_output) {
        sc.sensors.body_output = false;
        if (sc.gains.size() > 1) sc.gains.erase(sc.gains.begin());
    }
    if (o.n_modes) {
        sc.n_modes = *o.n_modes;
        if (command == "sweep") sc.sweep_n_modes = {*o.n_modes};
    }
    if (!o.gammas.empty()) {
        sc.gains = o.gammas;
        if (command == "sweep") sc.sweep_gammas = o.gammas;
    }
    if (o.t_end) sc.t_end = *o.t_end;
    if (o.samples) sc.samples = *o.samples;
    sc.validate();
    return sc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Luenberger-type observers for a beam with an attached mass-spring body"};
    app.require_subcommand(1);
    app.fallthrough();

    Options o;
    app.add_option("--config", o.config, "scenario file (INI)")->required()->check(CLI::ExistingFile);
    app.add_option("--out", o.out, "output directory")->capture_default_str();
    app.add_option("--n-modes", o.n_modes, "truncation order N");
    app.add_option("--gamma", o.gammas, "gain, or one gain per output (comma list)")->delimiter(',');
    app.add_option("--t-end", o.t_end, "simulation horizon in seconds");
    app.add_option("--samples", o.samples, "output samples on [0, t_end]");
    app.add_option("--seed", o.seed, "seed for the randomized resolvent probe")->capture_default_str();
    app.add_flag("--curvature-only", o.curvature_only, "drop the body displacement output (r = 4)");

    app.add_subcommand("modes", "eigenfrequency table and eigenfunction samples");
    app.add_subcommand("assemble", "dump Omega, B1, C1, F and gains");
    auto* simulate = app.add_subcommand("simulate", "error trajectory by exact propagation");
    simulate->add_option("--from-dump", o.from_dump, "directory written by assemble")
        ->check(CLI::ExistingDirectory);
    app.add_subcommand("resolvent", "M matrix, resolvent blocks and Hilbert-Schmidt report");
    app.add_subcommand("check", "assumption report");
    app.add_subcommand("sweep", "decay metrics over the gain and truncation lists");

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        const beamobs::Scenario sc = configure(o, command);
        beamobs::RunResult r;
        if (command == "modes") r = beamobs::run_modes(sc, o.out);
        else if (command == "assemble") r = beamobs::run_assemble(sc, o.out);
        else if (command == "simulate")
            r = beamobs::run_simulate(sc, o.out, o.from_dump ? std::optional<std::filesystem::path>(*o.from_dump)
                                                             : std::nullopt);
        else if (command == "resolvent") r = beamobs::run_resolvent(sc, o.out, o.seed);
        else if (command == "check") r = beamobs::run_check(sc, o.out);
        else r = beamobs::run_sweep(sc, o.out);
        std::cout << r.summary;
        for (const auto& f : r.files) std::cout << "wrote " << f.string() << "\n";
        return 0;
    } catch (const beamobs::Error& e) {
        std::cerr << "beamobs " << command << ": " << beamobs::to_string(e.kind()) << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "beamobs " << command << ": " << e.what() << "\n";
        return 3;
    }
}
