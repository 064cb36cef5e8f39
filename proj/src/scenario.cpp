#include "beamobs/scenario.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace beamobs {

namespace pt = boost::property_tree;

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& what) {
    throw Error(ErrorKind::Configuration, field + ": " + what);
}

double parse_double(const std::string& text, const std::string& field) {
    const std::string t = boost::algorithm::trim_copy(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
        bad_field(field, "expected a number, got '" + text + "'");
    return v;
}

int parse_int(const std::string& text, const std::string& field) {
    const std::string t = boost::algorithm::trim_copy(text);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty())
        bad_field(field, "expected an integer, got '" + text + "'");
    return v;
}

bool parse_bool(const std::string& text, const std::string& field) {
    const std::string t = boost::algorithm::to_lower_copy(boost::algorithm::trim_copy(text));
    if (t == "true" || t == "yes" || t == "1") return true;
    if (t == "false" || t == "no" || t == "0") return false;
    bad_field(field, "expected true or false, got '" + text + "'");
}

std::vector<std::string> split(const std::string& text, const char* seps) {
    std::vector<std::string> parts;
    const std::string t = boost::algorithm::trim_copy(text);
    if (t.empty()) return parts;
    boost::algorithm::split(parts, t, boost::algorithm::is_any_of(seps));
    for (auto& p : parts) boost::algorithm::trim(p);
    return parts;
}

std::vector<double> parse_list(const std::string& text, const std::string& field) {
    std::vector<double> out;
    for (const auto& p : split(text, ",")) out.push_back(parse_double(p, field));
    return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& field) {
    std::vector<int> out;
    for (const auto& p : split(text, ",")) out.push_back(parse_int(p, field));
    return out;
}

ActuatorShape parse_actuator(const std::string& text, const std::string& field) {
    ActuatorShape shape;
    for (const auto& piece : split(text, ",")) {
        const auto parts = split(piece, ":");
        if (parts.size() != 3) bad_field(field, "piece '" + piece + "' is not x_begin:x_end:amplitude");
        shape.pieces.push_back({parse_double(parts[0], field), parse_double(parts[1], field),
                                parse_double(parts[2], field)});
    }
    if (shape.pieces.empty()) bad_field(field, "no pieces given");
    return shape;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys{
        {"beam", {"rho", "EI", "m", "kappa", "l", "l0"}},
        {"sensors", {"body_output", "positions"}},
        {"actuators", {}},
        {"observer", {"gains", "n_modes"}},
        {"initial", {"rule", "Delta", "delta"}},
        {"time", {"t_end", "samples"}},
        {"sweep", {"gammas", "n_modes"}},
        {"resolvent", {"lambdas", "trend", "density_window"}},
        {"check", {"tail_probe", "n_modes"}},
    };
    return keys;
}

} // namespace

ErrorState InitialConditions::resolve(const Eigen::VectorXd& omegas) const {
    if (rule == Rule::Paper) return default_initial_error(omegas);
    const Eigen::Index n = omegas.size();
    if (Delta.size() < n || delta.size() < n) {
        std::ostringstream os;
        os << "initial.Delta/delta: explicit initial conditions have " << Delta.size() << "/"
           << delta.size() << " entries, truncation needs " << n;
        throw Error(ErrorKind::Configuration, os.str());
    }
    return {Delta.head(n), delta.head(n)};
}

void Scenario::validate() const {
    try {
        beam.validate();
    } catch (const Error& e) {
        bad_field("beam", e.what());
    }
    try {
        sensors.validate(beam);
    } catch (const Error& e) {
        bad_field("sensors.positions", e.what());
    }
    for (std::size_t i = 0; i < actuators.size(); ++i) {
        try {
            actuators[i].validate(beam);
        } catch (const Error& e) {
            bad_field("actuators." + std::to_string(i + 1), e.what());
        }
    }
    if (gains.empty()) bad_field("observer.gains", "no gains given");
    if (gains.size() != 1 && static_cast<int>(gains.size()) != sensors.n_outputs())
        bad_field("observer.gains", std::to_string(gains.size()) + " gains for " +
                                        std::to_string(sensors.n_outputs()) + " outputs");
    for (double g : gains)
        if (!(g > 0.0)) bad_field("observer.gains", "gains must be positive");
    if (n_modes < 1) bad_field("observer.n_modes", "must be at least 1");
    if (!(t_end > 0.0)) bad_field("time.t_end", "must be positive");
    if (samples < 2) bad_field("time.samples", "must be at least 2");
    for (double g : sweep_gammas)
        if (!(g > 0.0)) bad_field("sweep.gammas", "gains must be positive");
    for (int n : sweep_n_modes)
        if (n < 1) bad_field("sweep.n_modes", "must be at least 1");
    if (lambdas.empty()) bad_field("resolvent.lambdas", "no shifts given");
    for (double lam : lambdas)
        if (!(lam > 0.0)) bad_field("resolvent.lambdas", "shifts must be positive");
    for (int n : trend_n_modes)
        if (n < 1) bad_field("resolvent.trend", "must be at least 1");
    if (density_window < 0.0) bad_field("resolvent.density_window", "must be non-negative");
    if (tail_probe < 1) bad_field("check.tail_probe", "must be at least 1");
    if (check_n_modes < 1) bad_field("check.n_modes", "must be at least 1");
    if (initial.rule == InitialConditions::Rule::Explicit && initial.Delta.size() != initial.delta.size())
        bad_field("initial", "Delta and delta lengths differ");
}

Scenario parse_scenario(std::istream& in, const std::string& origin) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorKind::Configuration, origin + ": " + e.message() + " (line " +
                                                  std::to_string(e.line()) + ")");
    }

    for (const auto& [section, body] : tree) {
        const auto it = known_keys().find(section);
        if (it == known_keys().end()) bad_field(section, "unknown section");
        if (section == "actuators") continue;
        if (!body.data().empty()) bad_field(section, "value outside a section");
        for (const auto& [key, value] : body)
            if (!it->second.count(key)) bad_field(section + "." + key, "unknown key");
    }

    auto get = [&](const std::string& section, const std::string& key) -> const std::string* {
        const auto sec = tree.find(section);
        if (sec == tree.not_found()) return nullptr;
        const auto kv = sec->second.find(key);
        if (kv == sec->second.not_found()) return nullptr;
        return &kv->second.data();
    };
    auto number = [&](const std::string& section, const std::string& key, double& out) {
        if (const auto* v = get(section, key)) out = parse_double(*v, section + "." + key);
    };
    auto integer = [&](const std::string& section, const std::string& key, int& out) {
        if (const auto* v = get(section, key)) out = parse_int(*v, section + "." + key);
    };
    auto require = [&](const std::string& section, const std::string& key, double& out) {
        if (!get(section, key)) bad_field(section + "." + key, "missing");
        number(section, key, out);
    };

    Scenario sc;
    require("beam", "rho", sc.beam.rho);
    require("beam", "EI", sc.beam.EI);
    require("beam", "m", sc.beam.m);
    require("beam", "kappa", sc.beam.kappa);
    require("beam", "l", sc.beam.l);
    require("beam", "l0", sc.beam.l0);

    if (const auto* v = get("sensors", "body_output")) sc.sensors.body_output = parse_bool(*v, "sensors.body_output");
    if (const auto* v = get("sensors", "positions")) sc.sensors.positions = parse_list(*v, "sensors.positions");

    if (const auto sec = tree.find("actuators"); sec != tree.not_found())
        for (const auto& [key, value] : sec->second)
            sc.actuators.push_back(parse_actuator(value.data(), "actuators." + key));

    if (const auto* v = get("observer", "gains")) sc.gains = parse_list(*v, "observer.gains");
    integer("observer", "n_modes", sc.n_modes);

    if (const auto* v = get("initial", "rule")) {
        const std::string rule = boost::algorithm::trim_copy(*v);
        if (rule == "paper") {
            sc.initial.rule = InitialConditions::Rule::Paper;
        } else if (rule == "explicit") {
            sc.initial.rule = InitialConditions::Rule::Explicit;
            const auto* d = get("initial", "Delta");
            const auto* e = get("initial", "delta");
            if (!d || !e) bad_field("initial", "explicit rule needs Delta and delta");
            const auto dv = parse_list(*d, "initial.Delta");
            const auto ev = parse_list(*e, "initial.delta");
            sc.initial.Delta = Eigen::Map<const Eigen::VectorXd>(dv.data(), static_cast<Eigen::Index>(dv.size()));
            sc.initial.delta = Eigen::Map<const Eigen::VectorXd>(ev.data(), static_cast<Eigen::Index>(ev.size()));
        } else {
            bad_field("initial.rule", "expected paper or explicit, got '" + rule + "'");
        }
    }

    number("time", "t_end", sc.t_end);
    integer("time", "samples", sc.samples);
    if (const auto* v = get("sweep", "gammas")) sc.sweep_gammas = parse_list(*v, "sweep.gammas");
    if (const auto* v = get("sweep", "n_modes")) sc.sweep_n_modes = parse_int_list(*v, "sweep.n_modes");
    if (const auto* v = get("resolvent", "lambdas")) sc.lambdas = parse_list(*v, "resolvent.lambdas");
    if (const auto* v = get("resolvent", "trend")) sc.trend_n_modes = parse_int_list(*v, "resolvent.trend");
    number("resolvent", "density_window", sc.density_window);
    integer("check", "tail_probe", sc.tail_probe);
    integer("check", "n_modes", sc.check_n_modes);

    sc.validate();
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open scenario file " + path.string());
    return parse_scenario(in, path.string());
}

Assembly assemble(const Scenario& sc, const std::vector<Mode>& modes) {
    Assembly a;
    a.modes = modes;
    a.system = build_system(modes, sc.sensors, sc.actuators,
                            expand_gains(sc.gains, sc.sensors.n_outputs()), sc.beam);
    return a;
}

Assembly assemble(const Scenario& sc) {
    return assemble(sc, find_modes(sc.beam, sc.n_modes));
}

} // namespace beamobs
