#include "beamobs/commands.hpp"

#include <Eigen/Dense>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <fstream>
#include <future>
#include <random>

#include "beamobs/csv.hpp"

namespace beamobs {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create output directory " + out.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "cannot write " + path.string());
    f << text;
}

csv::Table with_index(const std::string& index_name, const Eigen::MatrixXd& m,
                      std::vector<std::string> columns) {
    csv::Table t;
    t.header.push_back(index_name);
    t.header.insert(t.header.end(), columns.begin(), columns.end());
    t.data.resize(m.rows(), m.cols() + 1);
    t.data.col(0) = Eigen::VectorXd::LinSpaced(m.rows(), 1.0, static_cast<double>(m.rows()));
    t.data.rightCols(m.cols()) = m;
    return t;
}

std::vector<std::string> output_names(Eigen::Index r, bool body_output) {
    std::vector<std::string> names;
    for (Eigen::Index s = 0; s < r; ++s)
        names.push_back(body_output && s == 0 ? std::string("y_body") : fmt::format("y_{}", s + 1));
    return names;
}

std::string describe(const Scenario& sc, const ModalSystem& sys) {
    return fmt::format("N = {}, r = {} ({}), gains = [{}]\n", sys.n_modes(), sys.n_outputs(),
                       sc.sensors.body_output ? "body displacement + curvature" : "curvature only",
                       fmt::join(sys.gammas, ", "));
}

DecayMetrics decay_of(const ModalSystem& sys, const ErrorState& e0, const std::vector<double>& grid,
                      double* w_end) {
    const Eigen::MatrixXd a = assemble_error_generator(sys);
    const Trajectory tr = propagate_error(a, e0, grid);
    if (w_end) *w_end = tr.lyapunov.back();
    return decay_metrics(tr, a);
}

} // namespace

RunResult run_modes(const Scenario& sc, const fs::path& out) {
    ensure_dir(out);
    const auto modes = find_modes(sc.beam, sc.n_modes);
    const auto n = static_cast<Eigen::Index>(modes.size());

    csv::Table table;
    table.header = {"j", "mu", "omega", "a1", "b1_scaled", "a2", "b2_scaled", "norm_sq"};
    table.data.resize(n, 8);
    for (Eigen::Index j = 0; j < n; ++j) {
        const Mode& m = modes[static_cast<std::size_t>(j)];
        table.data.row(j) << m.index, m.mu, m.omega, m.coeffs[0], m.coeffs[1], m.coeffs[2],
            m.coeffs[3], m.norm_sq;
    }
    csv::write(out / "modes.csv", table);

    constexpr int kPoints = 201;
    csv::Table shapes;
    shapes.header = {"x"};
    for (const auto& name : csv::numbered("W", n)) shapes.header.push_back(name);
    shapes.data.resize(kPoints, n + 1);
    for (int k = 0; k < kPoints; ++k) {
        const double x = k + 1 == kPoints ? sc.beam.l : sc.beam.l * k / (kPoints - 1);
        shapes.data(k, 0) = x;
        for (Eigen::Index j = 0; j < n; ++j)
            shapes.data(k, j + 1) = eval_mode(modes[static_cast<std::size_t>(j)], x, 0);
    }
    csv::write(out / "eigenfunctions.csv", shapes);

    std::string summary = fmt::format("{} modes, omega_1 = {:.6g}, omega_{} = {:.6g}\n", n,
                                      modes.front().omega, n, modes.back().omega);
    return {{out / "modes.csv", out / "eigenfunctions.csv"}, summary};
}

RunResult run_assemble(const Scenario& sc, const fs::path& out) {
    ensure_dir(out);
    const ModalSystem sys = assemble(sc).system;
    const Eigen::Index n = sys.n_modes();

    csv::write(out / "omega.csv", with_index("j", sys.omegas, {"omega"}));
    csv::write(out / "B1.csv", with_index("j", sys.B1, csv::numbered("u", sys.n_inputs())));
    csv::write(out / "C1.csv", with_index("s", sys.C1, csv::numbered("mode", n)));
    csv::write(out / "F.csv", with_index("row", sys.F, output_names(sys.n_outputs(), sc.sensors.body_output)));
    csv::write(out / "gains.csv", with_index("s", sys.gammas, {"gamma"}));
    return {{out / "omega.csv", out / "B1.csv", out / "C1.csv", out / "F.csv", out / "gains.csv"},
            describe(sc, sys)};
}

ModalSystem load_dump(const fs::path& dir) {
    const auto omega = csv::read(dir / "omega.csv");
    const auto b1 = csv::read(dir / "B1.csv");
    const auto c1 = csv::read(dir / "C1.csv");
    const auto gains = csv::read(dir / "gains.csv");
    auto body = [&](const csv::Table& t, const char* name) -> Eigen::MatrixXd {
        if (t.data.cols() < 2) throw Error(ErrorKind::Io, fmt::format("{}: no data columns", name));
        return t.data.rightCols(t.data.cols() - 1);
    };
    return make_system(body(omega, "omega.csv").col(0), body(b1, "B1.csv"), body(c1, "C1.csv"),
                       body(gains, "gains.csv").col(0));
}

RunResult run_simulate(const Scenario& sc, const fs::path& out, const std::optional<fs::path>& from_dump) {
    ensure_dir(out);
    const ModalSystem sys = from_dump ? load_dump(*from_dump) : assemble(sc).system;
    const Eigen::Index n = sys.n_modes();
    const ErrorState e0 = sc.initial.resolve(sys.omegas);
    const auto grid = uniform_grid(sc.t_end, sc.samples);
    const Eigen::MatrixXd a = assemble_error_generator(sys);
    const Trajectory tr = propagate_error(a, e0, grid);

    csv::Table t;
    t.header = {"t"};
    for (const auto& h : csv::numbered("Delta", n)) t.header.push_back(h);
    for (const auto& h : csv::numbered("delta", n)) t.header.push_back(h);
    t.header.push_back("W");
    t.header.push_back("norm_sq");
    t.data.resize(static_cast<Eigen::Index>(tr.size()), 2 * n + 3);
    bool monotone = true;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        const auto row = static_cast<Eigen::Index>(k);
        t.data(row, 0) = tr.times[k];
        t.data.row(row).segment(1, n) = tr.states[k].Delta.transpose();
        t.data.row(row).segment(1 + n, n) = tr.states[k].delta.transpose();
        t.data(row, 2 * n + 1) = tr.lyapunov[k];
        t.data(row, 2 * n + 2) = tr.norm_sq[k];
        if (k > 0 && tr.lyapunov[k] > tr.lyapunov[k - 1] * (1.0 + 1e-10)) monotone = false;
    }
    csv::write(out / "trajectory.csv", t);

    std::string report = "simulate\n" + describe(sc, sys);
    report += fmt::format("operators: {}\n", from_dump ? "dump " + from_dump->string() : std::string("assembled"));
    report += fmt::format("t_end = {}, samples = {}\n", sc.t_end, sc.samples);
    if (lyapunov(e0) > 0.0) {
        const DecayMetrics m = decay_metrics(tr, a);
        report += fmt::format("W(0) = {}\nW(t_end) = {}\nW(t_end)/W(0) = {}\n", tr.lyapunov.front(),
                              tr.lyapunov.back(), m.w_ratio);
        report += fmt::format("fitted rate (last half) = {}\nmax Re eig(A_hat) = {}\n", m.fitted_rate,
                              m.spectral_abscissa);
    } else {
        report += "zero initial error: decay metrics undefined\n";
    }
    report += fmt::format("W nonincreasing: {}\n", monotone ? "yes" : "NO");
    write_text(out / "simulate_report.txt", report);
    return {{out / "trajectory.csv", out / "simulate_report.txt"}, report};
}

RunResult run_resolvent(const Scenario& sc, const fs::path& out, unsigned seed) {
    ensure_dir(out);
    const int trend_max = sc.trend_n_modes.empty()
                              ? 0
                              : *std::max_element(sc.trend_n_modes.begin(), sc.trend_n_modes.end());
    const int n_all = std::max({sc.n_modes, trend_max, 10});
    const auto modes = find_modes(sc.beam, n_all);
    const ModalSystem full = assemble(sc, modes).system;
    const ModalSystem sys = truncate(full, sc.n_modes);

    RunResult result;
    std::string report = "resolvent\n" + describe(sc, sys);
    std::mt19937 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const Eigen::Index n2 = 2 * sys.n_modes();

    for (std::size_t k = 0; k < sc.lambdas.size(); ++k) {
        const double lam = sc.lambdas[k];
        const ResolventContext ctx = build_context(sys, lam);
        const ResolventBlocks blocks = resolvent_blocks(ctx, sys);
        const fs::path m_file = out / fmt::format("resolvent_M_{}.csv", k + 1);
        const fs::path b_file = out / fmt::format("resolvent_blocks_{}.csv", k + 1);
        csv::write(m_file, with_index("s", ctx.M, csv::numbered("p", ctx.M.cols())));
        csv::write(b_file, with_index("row", blocks.assembled(), csv::numbered("col", n2)));
        result.files.push_back(m_file);
        result.files.push_back(b_file);

        const Eigen::MatrixXd shifted =
            assemble_error_generator(sys) - lam * Eigen::MatrixXd::Identity(n2, n2);
        const Eigen::PartialPivLU<Eigen::MatrixXd> dense(shifted);
        double residual = 0.0, oracle_gap = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::VectorXd rhs(n2);
            for (Eigen::Index i = 0; i < n2; ++i) rhs[i] = normal(rng);
            const Eigen::VectorXd x = resolvent_apply(ctx, sys, ErrorState::from_stacked(rhs)).stacked();
            residual = std::max(residual, (shifted * x - rhs).norm() / rhs.norm());
            const Eigen::VectorXd ref = dense.solve(rhs);
            oracle_gap = std::max(oracle_gap, (x - ref).norm() / ref.norm());
        }
        const double norm = hs_norm(blocks);
        const double bound = hs_bound(ctx, sys);
        report += fmt::format(
            "\nlambda = {}\n  rcond(M) = {:.3e}\n  round trip residual (10 rhs) = {:.3e}\n"
            "  gap to dense solve = {:.3e}\n  hs_norm = {}\n  hs_norm^2 = {}\n  truncated bound = {}\n"
            "  hs_norm^2 <= bound: {}\n",
            lam, ctx.rcond, residual, oracle_gap, norm, norm * norm, bound,
            norm * norm <= bound ? "yes" : "NO");
    }

    const MPerturbationReport mp = m_perturbation(sys, sc.lambdas);
    report += "\nM perturbation\n";
    for (const auto& s : mp.samples)
        report += fmt::format("  lambda = {}: |M - I| = {:.6e}, |M^-1| = {:.12f}\n", s.lambda,
                              s.distance_to_identity, s.inverse_norm);
    report += fmt::format("  K for |M - I| <= K lambda: {}\n  K for |M^-1| <= 1 + K lambda: {}\n"
                          "  gamma_max sum_i |c_i|^2/omega_i^2: {}\n",
                          mp.identity_constant, mp.inverse_constant, mp.predicted_constant);

    if (!sc.trend_n_modes.empty()) {
        std::vector<Eigen::Index> ns(sc.trend_n_modes.begin(), sc.trend_n_modes.end());
        report += fmt::format("\ntruncation trend at lambda = {}\n", sc.lambdas.front());
        for (const auto& pt : hs_trend(full, sc.lambdas.front(), ns))
            report += fmt::format("  N = {}: hs_norm = {}, bound = {}\n", pt.n_modes, pt.norm, pt.bound);
    }

    std::vector<double> omegas(full.omegas.data(), full.omegas.data() + full.omegas.size());
    const double window = sc.density_window > 0.0 ? sc.density_window
                                                  : (omegas.back() - omegas.front()) / 8.0;
    report += fmt::format("\neigenvalue density over {} frequencies, window {}\n", omegas.size(), window);
    try {
        const DensityReport d = eigenvalue_density(omegas, window);
        for (std::size_t k = 0; k < d.counts.size(); ++k)
            report += fmt::format("  [{:.6g}, {:.6g}): {} -> {:.6g}\n", d.window_starts[k],
                                  d.window_starts[k] + window, d.counts[k], d.densities[k]);
        report += fmt::format("  fitted exponent = {}\n  decreasing: {}\n", d.fitted_exponent,
                              d.decreasing ? "yes" : "no");
    } catch (const Error& e) {
        report += fmt::format("  skipped: {}\n", e.what());
    }

    write_text(out / "resolvent_report.txt", report);
    result.files.push_back(out / "resolvent_report.txt");
    result.summary = report;
    return result;
}

RunResult run_check(const Scenario& sc, const fs::path& out) {
    ensure_dir(out);
    const int n = std::max(sc.n_modes, sc.check_n_modes);
    const ModalSystem sys = assemble(sc, find_modes(sc.beam, n)).system;
    const AssumptionReport rep = check_assumptions(sys, sc.tail_probe);
    std::string text = "check\n" + describe(sc, sys);
    text += fmt::format("tail probe = {}\n\n", sc.tail_probe);
    text += format_report(rep);
    text += fmt::format("\noverall: {}\n", rep.all_pass() ? "PASS" : "FAIL");
    write_text(out / "check_report.txt", text);
    return {{out / "check_report.txt"}, text};
}

std::vector<SweepEntry> sweep(const Scenario& sc) {
    const std::vector<double> gammas = sc.sweep_gammas.empty() ? std::vector<double>{sc.gains.front()}
                                                               : sc.sweep_gammas;
    const std::vector<int> ns = sc.sweep_n_modes.empty() ? std::vector<int>{sc.n_modes} : sc.sweep_n_modes;
    const int n_max = *std::max_element(ns.begin(), ns.end());
    // nested truncations share one mode solve
    const auto modes = find_modes(sc.beam, n_max);
    const auto grid = uniform_grid(sc.t_end, sc.samples);
    const Eigen::Index r = sc.sensors.n_outputs();

    std::vector<std::future<SweepEntry>> jobs;
    for (double gamma : gammas) {
        const ModalSystem full = build_system(modes, sc.sensors, sc.actuators,
                                              Eigen::VectorXd::Constant(r, gamma), sc.beam);
        for (int n : ns) {
            jobs.push_back(std::async(std::launch::async, [&sc, &grid, full, gamma, n] {
                const ModalSystem sys = truncate(full, n);
                SweepEntry e;
                e.gamma = gamma;
                e.n_modes = n;
                e.metrics = decay_of(sys, sc.initial.resolve(sys.omegas), grid, &e.w_end);
                return e;
            }));
        }
    }
    std::vector<SweepEntry> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

RunResult run_sweep(const Scenario& sc, const fs::path& out) {
    ensure_dir(out);
    const auto entries = sweep(sc);
    csv::Table t;
    t.header = {"gamma", "n_modes", "w_ratio", "w_end", "fitted_rate", "spectral_abscissa"};
    t.data.resize(static_cast<Eigen::Index>(entries.size()), 6);
    std::string report = fmt::format("sweep\nt_end = {}, samples = {}\n\n", sc.t_end, sc.samples);
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto& e = entries[k];
        t.data.row(static_cast<Eigen::Index>(k)) << e.gamma, e.n_modes, e.metrics.w_ratio, e.w_end,
            e.metrics.fitted_rate, e.metrics.spectral_abscissa;
        report += fmt::format("gamma = {:<5} N = {:<3} W(t_end)/W(0) = {:<12.4e} max Re eig = {:.6g}\n",
                              e.gamma, e.n_modes, e.metrics.w_ratio, e.metrics.spectral_abscissa);
    }
    csv::write(out / "sweep.csv", t);

    // larger truncations are expected to decay more slowly
    report += "\nW(t_end) against truncation order\n";
    for (std::size_t a = 0; a < entries.size(); ++a)
        for (std::size_t b = 0; b < entries.size(); ++b)
            if (entries[a].gamma == entries[b].gamma && entries[b].n_modes > entries[a].n_modes &&
                std::none_of(entries.begin(), entries.end(), [&](const SweepEntry& c) {
                    return c.gamma == entries[a].gamma && c.n_modes > entries[a].n_modes &&
                           c.n_modes < entries[b].n_modes;
                })) {
                const bool slower = entries[b].w_end >= entries[a].w_end;
                report += fmt::format("  gamma = {}: W_N={}(t_end) = {:.4e} {} W_N={}(t_end) = {:.4e}{}\n",
                                      entries[a].gamma, entries[b].n_modes, entries[b].w_end,
                                      slower ? ">=" : "<", entries[a].n_modes, entries[a].w_end,
                                      slower ? "" : "  (warning: larger truncation decayed faster)");
            }
    write_text(out / "sweep_report.txt", report);
    return {{out / "sweep.csv", out / "sweep_report.txt"}, report};
}

} // namespace beamobs
