#ifndef CAVCOOL_ENSEMBLE_HPP
#define CAVCOOL_ENSEMBLE_HPP

// Many-trajectory runs, parameter sweeps and the two-stage cooling protocol.
//
// Trajectory k of a run draws its initial state from stream
// (base_seed, k, initial_state) and its noise from (base_seed, k, dynamics).
// Results are reduced in trajectory order, so the output is bitwise identical
// for any number of workers.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cavcool/core.hpp"
#include "cavcool/dynamics.hpp"
#include "cavcool/meanfield.hpp"
#include "cavcool/observables.hpp"
#include "cavcool/random.hpp"

namespace cavcool {

class BudgetExceeded : public std::runtime_error {
public:
    BudgetExceeded(double estimated, double budget)
        : std::runtime_error("estimated " + short_number(estimated) + " particle-steps exceeds the budget of " +
                             short_number(budget)),
          estimated_(estimated), budget_(budget)
    {
    }
    double estimated() const { return estimated_; }
    double budget() const { return budget_; }

private:
    static std::string short_number(double x)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3g", x);
        return buf;
    }
    double estimated_;
    double budget_;
};

class EnsembleAbort : public NumericalAbort {
public:
    EnsembleAbort(const NumericalAbort& inner, int trajectory)
        : NumericalAbort("trajectory " + std::to_string(trajectory) + ": " + inner.what(), inner.step(),
                         inner.time()),
          trajectory_(trajectory)
    {
    }
    int trajectory() const { return trajectory_; }

private:
    int trajectory_;
};

enum class InitialKind { thermal, homogeneous };

struct InitialCondition {
    InitialKind kind = InitialKind::thermal;
    double alpha = 0.0;   // thermal only
    double e_kin = 1.0;
    int sign = +1;        // side of the organized pattern: +1 at x = 0, -1 at x = pi
    bool random_sign = false;

    void validate() const
    {
        detail::require(std::isfinite(e_kin) && e_kin > 0.0, "initial: e_kin must be > 0");
        detail::require(std::isfinite(alpha) && alpha >= 0.0, "initial: alpha must be >= 0");
        detail::require(sign == 1 || sign == -1, "initial: sign must be +1 or -1");
    }
};

struct ExperimentConfig {
    std::string name = "run";
    SystemParams params;
    Model model = Model::reduced;
    InitialCondition initial;
    std::vector<Stage> stages;
    int trajectories = 1;
    std::uint64_t base_seed = 1;
    IntegratorConfig integrator;
    int workers = 0;  // 0: one per hardware thread
    double max_particle_steps = 5e10;
    int bootstrap_resamples = 200;

    void validate() const
    {
        params.validate();
        initial.validate();
        integrator.validate();
        detail::require(!stages.empty(), "config: at least one stage is required");
        for (const auto& s : stages) {
            s.schedule.validate();
            detail::require(std::isfinite(s.duration) && s.duration >= 0.0, "config: stage duration must be >= 0");
        }
        detail::require(trajectories >= 1, "config: trajectories must be >= 1");
        detail::require(workers >= 0, "config: workers must be >= 0");
        detail::require(bootstrap_resamples >= 2, "config: bootstrap_resamples must be >= 2");
    }

    double total_duration() const
    {
        double t = 0.0;
        for (const auto& s : stages) t += s.duration;
        return t;
    }
};

struct RunRecord {
    std::vector<ObservableFrame> frames;
    std::vector<std::size_t> stage_first_frame;
    std::vector<StagePlan> plan;
    std::vector<TrajectoryState> final_states;
    double wall_seconds = 0.0;
};

/// Momentum scale used to plan the step: five thermal widths of the initial state.
inline double initial_momentum_scale(const ExperimentConfig& cfg) { return 5.0 * std::sqrt(cfg.initial.e_kin); }

inline std::vector<StagePlan> plan_experiment(const ExperimentConfig& cfg)
{
    return plan_stages(cfg.integrator, cfg.stages, initial_momentum_scale(cfg));
}

/// trajectories x N x total steps.
inline double estimate_particle_steps(const ExperimentConfig& cfg)
{
    double steps = 0.0;
    for (const auto& p : plan_experiment(cfg)) steps += static_cast<double>(p.steps);
    return steps * cfg.trajectories * cfg.params.n_particles;
}

/// Initial particles and field for trajectory k.
inline TrajectoryState initial_state(const ExperimentConfig& cfg, std::uint32_t k)
{
    RandomStream rng(cfg.base_seed, k, Substream::initial_state);
    int sign = cfg.initial.sign;
    if (cfg.initial.random_sign) sign = rng.uniform() < 0.5 ? -1 : 1;
    const double alpha = cfg.initial.kind == InitialKind::thermal ? cfg.initial.alpha : 0.0;
    TrajectoryState st(sample_thermal_state(alpha, cfg.initial.e_kin, cfg.params.n_particles, rng, sign));
    if (cfg.model == Model::full) {
        const double s_before = scatter_rate_for_coupling(schedule_value_before(cfg.stages.front().schedule),
                                                          cfg.params);
        st.field = sample_initial_field(st.theta, cfg.params, s_before, rng);
    }
    return st;
}

using ProgressCallback = std::function<void(int done, int total)>;

/// Runs cfg.trajectories independent trajectories and aggregates their frames.
inline RunRecord run_ensemble(const ExperimentConfig& cfg, const ProgressCallback& progress = {})
{
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const auto plan = plan_experiment(cfg);
    double steps = 0.0;
    for (const auto& p : plan) steps += static_cast<double>(p.steps);
    const double particle_steps = steps * cfg.trajectories * cfg.params.n_particles;
    if (particle_steps > cfg.max_particle_steps) throw BudgetExceeded(particle_steps, cfg.max_particle_steps);

    const int n = cfg.trajectories;
    std::vector<TrajectoryRecord> records(static_cast<std::size_t>(n));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
    std::atomic<int> next{0};
    std::atomic<int> done{0};
    std::mutex progress_mutex;

    auto worker = [&] {
        for (;;) {
            const int k = next.fetch_add(1);
            if (k >= n) return;
            try {
                RandomStream noise(cfg.base_seed, static_cast<std::uint32_t>(k), Substream::dynamics);
                records[static_cast<std::size_t>(k)] =
                    run_protocol(initial_state(cfg, static_cast<std::uint32_t>(k)), cfg.model, cfg.params,
                                 cfg.stages, cfg.integrator, plan, noise);
            } catch (...) {
                errors[static_cast<std::size_t>(k)] = std::current_exception();
                next.store(n);
            }
            const int d = done.fetch_add(1) + 1;
            if (progress) {
                std::lock_guard lock(progress_mutex);
                progress(d, n);
            }
        }
    };

    int workers = cfg.workers > 0 ? cfg.workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, n);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    }

    for (int k = 0; k < n; ++k) {
        if (!errors[static_cast<std::size_t>(k)]) continue;
        try {
            std::rethrow_exception(errors[static_cast<std::size_t>(k)]);
        } catch (const NumericalAbort& e) {
            throw EnsembleAbort(e, k);
        }
    }

    RunRecord out;
    out.frames = aggregate_frames(records, {cfg.bootstrap_resamples, cfg.base_seed});
    out.stage_first_frame = records.front().stage_first_frame;
    out.plan = plan;
    out.final_states.reserve(records.size());
    for (auto& r : records) out.final_states.push_back(std::move(r.final_state));
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

// Sweeps ---------------------------------------------------------------------------

struct SweepConfig {
    ExperimentConfig base;
    std::string parameter = "t_ramp";
    std::vector<double> values;
    std::optional<double> trajectory_budget;  // trajectories = budget / N when set

    void validate() const
    {
        base.validate();
        detail::require(!values.empty(), "sweep: value list is empty");
        for (double v : values) detail::require(std::isfinite(v), "sweep: values must be finite");
        if (trajectory_budget) detail::require(*trajectory_budget >= 1.0, "sweep: trajectory budget must be >= 1");
    }
};

struct SweepRow {
    double value = 0.0;
    double e_kin_final_mean = 0.0;
    double e_kin_final_stderr = 0.0;
    int trajectories = 0;
};

inline std::vector<std::string> sweepable_parameters()
{
    return {"t_ramp", "n_particles", "kappa", "delta_c", "v0", "e_kin", "alpha", "trajectories"};
}

/// Applies one swept value to a copy of the base configuration. For t_ramp the
/// last stage is an exponential ramp whose duration follows its ramp time, so
/// the final frame is the kinetic energy at t = t_ramp.
inline ExperimentConfig apply_sweep_value(const SweepConfig& sweep, double value)
{
    ExperimentConfig cfg = sweep.base;
    const std::string& p = sweep.parameter;
    if (p == "t_ramp") {
        Stage& last = cfg.stages.back();
        detail::require(last.schedule.kind == ScheduleKind::exp_ramp, "sweep: t_ramp needs a final exp_ramp stage");
        last.schedule.t_ramp = value;
        last.duration = value;
    } else if (p == "n_particles") {
        cfg.params.n_particles = static_cast<int>(std::lround(value));
    } else if (p == "kappa") {
        cfg.params.kappa = value;
    } else if (p == "delta_c") {
        cfg.params.delta_c = value;
    } else if (p == "v0") {
        cfg.stages.front().schedule.v0 = value;
    } else if (p == "e_kin") {
        cfg.initial.e_kin = value;
    } else if (p == "alpha") {
        cfg.initial.alpha = value;
    } else if (p == "trajectories") {
        cfg.trajectories = static_cast<int>(std::lround(value));
    } else {
        throw InvalidArgument("sweep: unknown parameter '" + p + "'");
    }
    if (sweep.trajectory_budget)
        cfg.trajectories = std::max(1, static_cast<int>(std::lround(*sweep.trajectory_budget / cfg.params.n_particles)));
    return cfg;
}

/// One ensemble per value; records the final kinetic energy of each.
inline std::vector<SweepRow> sweep(const SweepConfig& sweep_cfg,
                                   const std::function<void(std::size_t, const RunRecord&)>& on_run = {})
{
    sweep_cfg.validate();
    std::vector<SweepRow> rows;
    for (std::size_t i = 0; i < sweep_cfg.values.size(); ++i) {
        const ExperimentConfig cfg = apply_sweep_value(sweep_cfg, sweep_cfg.values[i]);
        const RunRecord rec = run_ensemble(cfg);
        rows.push_back({sweep_cfg.values[i], rec.frames.back().e_kin_mean, rec.frames.back().e_kin_stderr,
                        cfg.trajectories});
        if (on_run) on_run(i, rec);
    }
    return rows;
}

// Two-stage protocol -------------------------------------------------------------

struct TwoStageOptions {
    SystemParams params;
    int trajectories = 200;
    std::uint64_t base_seed = 1;
    double e_kin_initial = 0.0;    // <= 0: kappa / 4
    std::optional<double> v_fer;  // default: the optimal coupling
    double t_hold = 3000.0;
    double t_ramp = 10.0;
    double decades = 5.0;
    IntegratorConfig integrator;
    int workers = 0;
    double max_particle_steps = 5e10;
};

/// Full-model configuration: homogeneous gas quenched to v_fer and held for
/// t_hold, then exponentially ramped down over t_ramp.
inline ExperimentConfig make_two_stage_config(const TwoStageOptions& o)
{
    detail::require(o.params.delta_c < 0.0, "two_stage_protocol: delta_c must be < 0");
    ExperimentConfig cfg;
    cfg.name = "two_stage";
    cfg.params = o.params;
    cfg.model = Model::full;
    cfg.initial.kind = InitialKind::homogeneous;
    cfg.initial.e_kin = o.e_kin_initial > 0.0 ? o.e_kin_initial : o.params.kappa / 4.0;
    const double v = o.v_fer.value_or(optimal_coupling(o.params.delta_c, o.params.kappa));
    cfg.stages = {{Schedule::quench(v, 0.0), o.t_hold}, {Schedule::exp_ramp(v, o.t_ramp, o.decades), o.t_ramp}};
    cfg.trajectories = o.trajectories;
    cfg.base_seed = o.base_seed;
    cfg.integrator = o.integrator;
    cfg.workers = o.workers;
    cfg.max_particle_steps = o.max_particle_steps;
    return cfg;
}

struct TwoStagePrediction {
    double v_fer = 0.0;
    double e_kin_fer = 0.0;       // steady state of the first stage
    double alpha_fer = 0.0;       // v_fer / (2 e_kin_fer)
    double theta2_fer = 0.0;      // theta(alpha_fer)^2
    double e_kin_par = 0.0;       // large-alpha estimate after the ramp
    double e_kin_demag = 0.0;     // e_kin_fer * demag_ratio(alpha_fer)
    ProtocolOptimum optimum;
};

inline TwoStagePrediction two_stage_prediction(const SystemParams& params, double v_fer)
{
    TwoStagePrediction p;
    p.v_fer = v_fer;
    p.e_kin_fer = ferro_kinetic_energy(v_fer, params.delta_c, params.kappa);
    p.alpha_fer = v_fer / (2.0 * p.e_kin_fer);
    const double th = magnetization(p.alpha_fer);
    p.theta2_fer = th * th;
    p.e_kin_par = v_fer > 0.0 ? paramagnetic_energy(p.e_kin_fer, v_fer) : p.e_kin_fer;
    p.e_kin_demag = p.e_kin_fer * demag_ratio(p.alpha_fer).value;
    p.optimum = protocol_optimum(params.delta_c, params.kappa);
    return p;
}

/// Splits a multi-stage record at the start of stage k. The returned record
/// contains the stage's initial frame and times measured from the stage start.
inline RunRecord stage_record(const RunRecord& rec, std::size_t k)
{
    detail::require(k < rec.stage_first_frame.size(), "stage_record: no such stage");
    std::size_t begin = rec.stage_first_frame[k];
    if (k > 0) --begin;  // final frame of the previous stage is this stage's initial frame
    const std::size_t end = k + 1 < rec.stage_first_frame.size() ? rec.stage_first_frame[k + 1] : rec.frames.size();
    RunRecord out;
    const double t0 = rec.frames[begin].t;
    out.frames.assign(rec.frames.begin() + static_cast<std::ptrdiff_t>(begin),
                      rec.frames.begin() + static_cast<std::ptrdiff_t>(end));
    for (auto& f : out.frames) f.t -= t0;
    out.stage_first_frame = {0};
    out.plan = {rec.plan[k]};
    if (k + 1 == rec.stage_first_frame.size()) out.final_states = rec.final_states;
    out.wall_seconds = rec.wall_seconds;
    return out;
}

struct TwoStageResult {
    RunRecord cooling;        // quench and hold
    RunRecord demagnetizing;  // exponential ramp
    TwoStagePrediction prediction;
    ExperimentConfig config;
};

inline TwoStageResult two_stage_protocol(const ExperimentConfig& cfg, const ProgressCallback& progress = {})
{
    detail::require(cfg.stages.size() == 2, "two_stage_protocol: expected exactly two stages");
    const RunRecord all = run_ensemble(cfg, progress);
    TwoStageResult r;
    r.cooling = stage_record(all, 0);
    r.demagnetizing = stage_record(all, 1);
    r.prediction = two_stage_prediction(cfg.params, cfg.stages.front().schedule.v0);
    r.config = cfg;
    return r;
}

inline TwoStageResult two_stage_protocol(const TwoStageOptions& o, const ProgressCallback& progress = {})
{
    return two_stage_protocol(make_two_stage_config(o), progress);
}

// Summaries of recorded runs --------------------------------------------------------

/// Largest ensemble-mean kinetic energy over the record.
inline double peak_kinetic_energy(const RunRecord& rec)
{
    double m = 0.0;
    for (const auto& f : rec.frames) m = std::max(m, f.e_kin_mean);
    return m;
}

/// Mean of a frame quantity over frames with t in [t_lo, t_hi].
inline double window_mean(const RunRecord& rec, double t_lo, double t_hi, double ObservableFrame::*field)
{
    double s = 0.0;
    int n = 0;
    for (const auto& f : rec.frames) {
        if (f.t < t_lo || f.t > t_hi) continue;
        s += f.*field;
        ++n;
    }
    detail::require(n > 0, "window_mean: no frames in window");
    return s / n;
}

} // namespace cavcool

#endif // CAVCOOL_ENSEMBLE_HPP
