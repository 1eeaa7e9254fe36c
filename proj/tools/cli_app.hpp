#ifndef CAVCOOL_TOOLS_CLI_APP_HPP
#define CAVCOOL_TOOLS_CLI_APP_HPP

// Command-line front end: analytic, simulate, sweep.
// Exit codes: 0 success, 1 usage or config error, 2 numerical abort, 3 budget refusal.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cavcool/cavcool.hpp"
#include "cavcool/io.hpp"
#include "cavcool/presets.hpp"

namespace cavcool::cli {

enum ExitCode { ok = 0, usage_error = 1, numerical_abort = 2, budget_refusal = 3 };

struct RunOptions {
    std::string config_path;
    std::string preset;
    std::string scale = "paper";
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<int> trajectories;
    std::optional<int> workers;
    std::vector<std::string> overrides;
    bool dry_run = false;
    bool allow_large = false;
    bool quiet = false;
};

namespace detail {

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Loads the requested documents and applies command-line overrides.
inline std::vector<PresetSeries> load_series(const RunOptions& o, bool& is_sweep_preset)
{
    if (o.config_path.empty() == o.preset.empty()) throw ConfigError("", "give exactly one of --config or --preset");
    if (o.scale != "paper" && o.scale != "ci") throw ConfigError("--scale", "expected paper or ci");
    std::vector<PresetSeries> series;
    is_sweep_preset = false;
    if (!o.preset.empty()) {
        Preset p = make_preset(o.preset, o.scale == "ci" ? Scale::ci : Scale::paper);
        is_sweep_preset = p.is_sweep;
        series = std::move(p.series);
    } else {
        series.push_back({"", parse_document(read_file(o.config_path))});
    }
    for (auto& s : series) {
        Json j = document_json(s.doc);
        for (const auto& ov : o.overrides) apply_override(j, ov);
        if (o.seed) j["seed"] = *o.seed;
        if (o.trajectories) {
            j["trajectories"] = *o.trajectories;
            if (j.contains("sweep")) j["sweep"].erase("trajectory_budget");
        }
        if (o.workers) j["workers"] = *o.workers;
        if (o.allow_large) j["max_particle_steps"] = std::numeric_limits<double>::max();
        s.doc = parse_document(j);
    }
    return series;
}

inline std::filesystem::path series_dir(const RunOptions& o, const PresetSeries& s)
{
    std::filesystem::path dir(o.out_dir);
    if (!s.label.empty()) dir /= s.label;
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

// Every configuration about to run, with derived quantities, for the record.
inline void print_configs(std::ostream& out, const std::vector<PresetSeries>& series)
{
    for (const auto& s : series) {
        Json j;
        if (!s.label.empty()) j["series"] = s.label;
        j["config"] = document_json(s.doc);
        if (s.doc.sweep) {
            j["derived"] = Json::array();
            for (double v : s.doc.sweep->values) {
                const ExperimentConfig c = apply_sweep_value(s.doc.sweep_config(), v);
                Json d = derived_json(c);
                d["value"] = v;
                d["trajectories"] = c.trajectories;
                j["derived"].push_back(d);
            }
        } else {
            j["derived"] = derived_json(s.doc.config);
        }
        out << j.dump(2) << '\n';
    }
}

// Largest single-run estimate against its budget; throws BudgetExceeded.
inline void check_budgets(std::ostream& out, const std::vector<PresetSeries>& series)
{
    double total = 0.0;
    for (const auto& s : series) {
        std::vector<ExperimentConfig> runs;
        if (s.doc.sweep) {
            for (double v : s.doc.sweep->values) runs.push_back(apply_sweep_value(s.doc.sweep_config(), v));
        } else {
            runs.push_back(s.doc.config);
        }
        for (const auto& c : runs) {
            const double est = estimate_particle_steps(c);
            total += est;
            if (est > c.max_particle_steps) throw BudgetExceeded(est, c.max_particle_steps);
        }
    }
    out << "estimated particle-steps: " << format_double(total) << '\n';
}

inline int report_budget(std::ostream& err, const BudgetExceeded& e)
{
    err << "refusing to run: " << e.what()
        << "\nraise max_particle_steps (--override max_particle_steps=...) or pass --allow-large\n";
    return budget_refusal;
}

inline ProgressCallback progress_printer(std::ostream& err, bool quiet, const std::string& label)
{
    if (quiet) return {};
    return [&err, label](int done, int total) {
        const int step = std::max(1, total / 10);
        if (done % step == 0 || done == total)
            err << "  " << (label.empty() ? "run" : label) << ": " << done << "/" << total << " trajectories\n";
    };
}

} // namespace detail

inline int cmd_analytic(std::ostream& out, std::optional<double> kappa, std::optional<double> delta_c,
                        const std::vector<double>& alphas)
{
    if (!kappa && !delta_c && alphas.empty()) {
        out << "nothing to do: give --kappa/--delta-c and/or --alpha\n";
        return usage_error;
    }
    if (kappa || delta_c) {
        if (!kappa) throw InvalidArgument("--delta-c needs --kappa");
        const double k = *kappa;
        const double dc = delta_c.value_or(-k);
        cavcool::detail::require(std::isfinite(k) && k > 0.0, "kappa must be > 0");
        cavcool::detail::require(std::isfinite(dc) && dc < 0.0, "delta_c must be < 0");
        const ProtocolOptimum p = protocol_optimum(dc, k);
        out << "kappa            " << format_double(k) << '\n'
            << "delta_c          " << format_double(dc) << '\n'
            << "V_fer_opt        " << format_double(p.v_fer_opt) << '\n'
            << "E_fer(V_opt)     " << format_double(p.e_kin_fer) << '\n'
            << "omega_0(V_opt)   " << format_double(p.omega_0) << '\n'
            << "E_min            " << format_double(p.e_kin_min) << '\n';
    }
    if (!alphas.empty()) {
        out << "alpha,theta,branch,demag_ratio,asymptotic_ratio\n";
        for (double a : alphas) {
            cavcool::detail::require(std::isfinite(a) && a >= 0.0, "alpha must be >= 0");
            const FixpointSolution s = magnetization_fixpoint(a);
            const DemagRatio d = demag_ratio(a);
            const char* branch = s.branch == Branch::paramagnetic ? "paramagnetic" : "ferromagnetic";
            out << format_double(a) << ',' << format_double(s.theta) << ',' << branch << ','
                << format_double(d.value) << ',' << (a > 0.0 ? format_double(asymptotic_ratio(a)) : "inf") << '\n';
        }
    }
    return ok;
}

inline int cmd_simulate(const RunOptions& o, bool sweep_mode, std::ostream& out, std::ostream& err)
{
    bool sweep_preset = false;
    const auto series = detail::load_series(o, sweep_preset);
    for (const auto& s : series) {
        if (sweep_mode && !s.doc.sweep)
            throw ConfigError("sweep", "configuration has no sweep block (use simulate)");
        if (!sweep_mode && s.doc.sweep)
            throw ConfigError("sweep", "configuration describes a sweep (use the sweep command)");
    }
    if (!o.preset.empty()) {
        const Preset p = make_preset(o.preset, o.scale == "ci" ? Scale::ci : Scale::paper);
        out << "preset " << p.name << " (" << o.scale << " scale): " << p.description << '\n';
    }
    detail::print_configs(out, series);
    try {
        detail::check_budgets(out, series);
    } catch (const BudgetExceeded& e) {
        return detail::report_budget(err, e);
    }
    if (o.dry_run) return ok;

    for (const auto& s : series) {
        const auto dir = detail::series_dir(o, s);
        if (sweep_mode) {
            const auto start = std::chrono::steady_clock::now();
            const SweepConfig sc = s.doc.sweep_config();
            std::vector<SweepRow> rows;
            for (double v : sc.values) {
                const ExperimentConfig c = apply_sweep_value(sc, v);
                const RunRecord rec =
                    run_ensemble(c, detail::progress_printer(err, o.quiet, s.label + " " + sc.parameter + "=" +
                                                                              format_double(v)));
                rows.push_back({v, rec.frames.back().e_kin_mean, rec.frames.back().e_kin_stderr, c.trajectories});
            }
            const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            std::ostringstream csv;
            write_sweep_csv(csv, rows);
            detail::write_text(dir / "sweep.csv", csv.str());
            detail::write_text(dir / "summary.json", sweep_summary_json(s.doc, rows, wall).dump(2) + "\n");
            out << "wrote " << (dir / "sweep.csv").string() << '\n';
        } else {
            const RunRecord rec = run_ensemble(s.doc.config, detail::progress_printer(err, o.quiet, s.label));
            std::ostringstream csv;
            write_frames_csv(csv, rec.frames);
            detail::write_text(dir / "frames.csv", csv.str());
            detail::write_text(dir / "summary.json", summary_json(s.doc, rec).dump(2) + "\n");
            const ObservableFrame& f = rec.frames.back();
            out << "wrote " << (dir / "frames.csv").string() << " (final e_kin " << format_double(f.e_kin_mean)
                << " +- " << format_double(f.e_kin_stderr) << ", " << format_double(rec.wall_seconds) << " s)\n";
        }
    }
    return ok;
}

inline void add_run_options(CLI::App* cmd, RunOptions& o)
{
    cmd->add_option("--config", o.config_path, "experiment document (JSON); a previous summary.json also works");
    cmd->add_option("--preset", o.preset, "built-in figure setup: fig3a, fig3b, fig4a, fig4b, fig5");
    cmd->add_option("--scale", o.scale, "preset scale: paper or ci")->check(CLI::IsMember({"paper", "ci"}));
    cmd->add_option("--out-dir", o.out_dir, "output directory");
    cmd->add_option("--seed", o.seed, "base seed");
    cmd->add_option("--trajectories", o.trajectories, "trajectories per run")->check(CLI::PositiveNumber);
    cmd->add_option("--workers", o.workers, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
    cmd->add_option("--override", o.overrides, "set a document field, e.g. params.kappa=40 or stages.0.duration=5");
    cmd->add_flag("--dry-run", o.dry_run, "print the configuration and cost estimate, then stop");
    cmd->add_flag("--allow-large", o.allow_large, "lift the particle-step budget");
    cmd->add_flag("--quiet", o.quiet, "no progress output");
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Cavity cooling by adiabatic demagnetization: analytic predictions and trajectory simulations"};
    app.require_subcommand(1);

    std::optional<double> kappa;
    std::optional<double> delta_c;
    std::vector<double> alphas;
    auto* analytic = app.add_subcommand("analytic", "mean-field and protocol formulas");
    analytic->add_option("--kappa", kappa, "cavity linewidth (omega_R)");
    analytic->add_option("--delta-c", delta_c, "cavity detuning (omega_R), default -kappa");
    analytic->add_option("--alpha", alphas, "pump parameters alpha = V / (2 E_kin)");

    RunOptions sim_opts;
    auto* simulate = app.add_subcommand("simulate", "run one trajectory ensemble per configuration");
    add_run_options(simulate, sim_opts);

    RunOptions sweep_opts;
    auto* sweep_cmd = app.add_subcommand("sweep", "final kinetic energy over a parameter list");
    add_run_options(sweep_cmd, sweep_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o;
        std::ostringstream e2;
        const int code = app.exit(e, o, e2);
        out << o.str();
        err << e2.str();
        return code == 0 ? ok : usage_error;
    }

    try {
        if (analytic->parsed()) return cmd_analytic(out, kappa, delta_c, alphas);
        if (simulate->parsed()) return cmd_simulate(sim_opts, false, out, err);
        return cmd_simulate(sweep_opts, true, out, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return usage_error;
    } catch (const BudgetExceeded& e) {
        return detail::report_budget(err, e);
    } catch (const NumericalAbort& e) {
        err << "numerical abort at step " << e.step() << ", t = " << format_double(e.time()) << ": " << e.what()
            << '\n';
        return numerical_abort;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return usage_error;
    }
}

} // namespace cavcool::cli

#endif // CAVCOOL_TOOLS_CLI_APP_HPP
