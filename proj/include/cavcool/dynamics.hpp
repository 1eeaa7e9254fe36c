#ifndef CAVCOOL_DYNAMICS_HPP
#define CAVCOOL_DYNAMICS_HPP

// Time integration of the particle-cavity system.
//
// Reduced (conservative) model, cavity adiabatically eliminated:
//   dx_j = 2 p_j dt
//   dp_j = -2 V(t) sin(x_j) Theta dt
// Full (dissipative) model:
//   dx_j = 2 p_j dt
//   dp_j = 2 S E_r sin(x_j) dt
//   dE_r = (-delta_c E_i - kappa E_r) dt + dxi_r
//   dE_i = ( delta_c E_r - kappa E_i - N S Theta) dt + dxi_i
// with <dxi^2> = kappa dt / 2 per quadrature. In complex form, a = E_r + i E_i,
//   da = -mu a dt - i N S Theta dt + dxi,   mu = kappa - i delta_c.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cavcool/core.hpp"
#include "cavcool/detail/simd_math.hpp"
#include "cavcool/meanfield.hpp"
#include "cavcool/random.hpp"

namespace cavcool {

class NumericalAbort : public std::runtime_error {
public:
    NumericalAbort(const std::string& what, std::int64_t step, double time)
        : std::runtime_error(what + " (step " + std::to_string(step) + ", t = " + std::to_string(time) + ")"),
          step_(step), time_(time)
    {
    }

    std::int64_t step() const { return step_; }
    double time() const { return time_; }

private:
    std::int64_t step_;
    double time_;
};

struct ParticleEnsemble {
    std::vector<double> positions;  // phases k x in [0, 2pi)
    std::vector<double> momenta;    // units of hbar k

    std::size_t size() const { return positions.size(); }

    void validate() const
    {
        detail::require(!positions.empty(), "ParticleEnsemble: no particles");
        detail::require(positions.size() == momenta.size(), "ParticleEnsemble: length mismatch");
        for (std::size_t i = 0; i < positions.size(); ++i) {
            detail::require(std::isfinite(positions[i]) && std::isfinite(momenta[i]),
                            "ParticleEnsemble: non-finite entry");
            detail::require(positions[i] >= 0.0 && positions[i] < two_pi,
                            "ParticleEnsemble: position outside [0, 2pi)");
        }
    }
};

/// Theta = (1/N) sum_j cos(x_j).
inline double order_parameter(std::span<const double> positions)
{
    detail::require(!positions.empty(), "order_parameter: empty ensemble");
    double sum = 0.0;
    for (double x : positions) sum += std::cos(x);
    return sum / static_cast<double>(positions.size());
}

inline double order_parameter(const ParticleEnsemble& e) { return order_parameter(e.positions); }

/// H_eff = sum_j p_j^2 - N V Theta^2 in hbar omega_R.
inline double effective_hamiltonian(const ParticleEnsemble& e, double v)
{
    double kinetic = 0.0;
    for (double p : e.momenta) kinetic += p * p;
    const double theta = order_parameter(e);
    return kinetic - static_cast<double>(e.size()) * v * theta * theta;
}

/// dp_j/dt in the reduced model, -2 V sin(x_j) Theta.
inline std::vector<double> reduced_forces(const ParticleEnsemble& e, double v)
{
    const double theta = order_parameter(e);
    std::vector<double> f(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) f[i] = -2.0 * v * std::sin(e.positions[i]) * theta;
    return f;
}

// Schedules ----------------------------------------------------------------

enum class ScheduleKind { hold, quench, exp_ramp, piecewise };

struct ScheduleSegment;

/// Coupling V(t) within one stage, t measured from the stage start.
struct Schedule {
    ScheduleKind kind = ScheduleKind::hold;
    double v0 = 0.0;
    double t_ramp = 1.0;
    double decades = 5.0;
    double v_before = 0.0;  // quench: coupling in effect before t = 0
    std::vector<ScheduleSegment> segments;

    static Schedule hold(double v) { return {ScheduleKind::hold, v, 1.0, 5.0, v, {}}; }
    static Schedule quench(double v, double v_before = 0.0)
    {
        return {ScheduleKind::quench, v, 1.0, 5.0, v_before, {}};
    }
    static Schedule exp_ramp(double v0, double t_ramp, double decades = 5.0)
    {
        return {ScheduleKind::exp_ramp, v0, t_ramp, decades, v0, {}};
    }
    static Schedule piecewise(std::vector<ScheduleSegment> segs);

    void validate() const;
};

/// Piece of a piecewise schedule, active from t_start (its own clock restarts there).
struct ScheduleSegment {
    double t_start = 0.0;
    Schedule schedule;
};

inline Schedule Schedule::piecewise(std::vector<ScheduleSegment> segs)
{
    Schedule s;
    s.kind = ScheduleKind::piecewise;
    s.segments = std::move(segs);
    return s;
}

inline void Schedule::validate() const
{
    switch (kind) {
    case ScheduleKind::hold:
    case ScheduleKind::quench:
        detail::require(std::isfinite(v0) && v0 >= 0.0 && std::isfinite(v_before) && v_before >= 0.0,
                        "schedule: coupling must be finite and >= 0");
        break;
    case ScheduleKind::exp_ramp:
        detail::require(std::isfinite(v0) && v0 >= 0.0, "schedule: v0 must be finite and >= 0");
        detail::require(std::isfinite(t_ramp) && t_ramp > 0.0, "schedule: t_ramp must be > 0");
        detail::require(std::isfinite(decades), "schedule: decades must be finite");
        break;
    case ScheduleKind::piecewise:
        detail::require(!segments.empty(), "schedule: piecewise needs at least one segment");
        detail::require(segments.front().t_start == 0.0, "schedule: first segment must start at t = 0");
        for (std::size_t i = 0; i < segments.size(); ++i) {
            if (i > 0)
                detail::require(segments[i].t_start > segments[i - 1].t_start,
                                "schedule: segment start times must increase");
            detail::require(segments[i].schedule.kind != ScheduleKind::piecewise,
                            "schedule: nested piecewise schedules are not supported");
            segments[i].schedule.validate();
        }
        break;
    }
}

/// V(t) for t >= 0. An exponential ramp V0 10^(-decades t / t_ramp) holds its
/// final value after t_ramp.
inline double schedule_value(const Schedule& s, double t)
{
    switch (s.kind) {
    case ScheduleKind::hold:
    case ScheduleKind::quench:
        return s.v0;
    case ScheduleKind::exp_ramp: {
        const double tau = std::clamp(t / s.t_ramp, 0.0, 1.0);
        return s.v0 * std::pow(10.0, -s.decades * tau);
    }
    case ScheduleKind::piecewise: {
        auto it = std::upper_bound(s.segments.begin(), s.segments.end(), t,
                                   [](double tt, const ScheduleSegment& seg) { return tt < seg.t_start; });
        const auto& seg = it == s.segments.begin() ? s.segments.front() : *std::prev(it);
        return schedule_value(seg.schedule, t - seg.t_start);
    }
    }
    return 0.0;
}

/// Coupling in effect just before the stage starts.
inline double schedule_value_before(const Schedule& s)
{
    if (s.kind == ScheduleKind::quench) return s.v_before;
    if (s.kind == ScheduleKind::piecewise) return schedule_value_before(s.segments.front().schedule);
    return schedule_value(s, 0.0);
}

/// Upper bound on V(t) over [0, duration].
inline double schedule_max(const Schedule& s, double duration)
{
    switch (s.kind) {
    case ScheduleKind::hold:
    case ScheduleKind::quench:
        return s.v0;
    case ScheduleKind::exp_ramp:
        return std::max(schedule_value(s, 0.0), schedule_value(s, duration));
    case ScheduleKind::piecewise: {
        double m = 0.0;
        for (std::size_t i = 0; i < s.segments.size(); ++i) {
            const double start = s.segments[i].t_start;
            if (start > duration) break;
            const double end = i + 1 < s.segments.size() ? std::min(s.segments[i + 1].t_start, duration) : duration;
            m = std::max(m, schedule_max(s.segments[i].schedule, end - start));
        }
        return m;
    }
    }
    return 0.0;
}

// Integrator configuration ----------------------------------------------------

enum class Model { reduced, full };
enum class FullScheme { hybrid, euler_maruyama };

/// How the cavity drive N S Theta is represented inside one exact field step:
/// frozen at its end-of-step value, or interpolated linearly across the step.
enum class FieldHold { frozen, linear };

struct IntegratorConfig {
    double dt = 0.0;            // <= 0 selects the step automatically
    int sampler_stride = 100;   // steps between recorded frames
    FullScheme scheme = FullScheme::hybrid;
    FieldHold hold = FieldHold::linear;
    double step_bound = 0.05;   // dt <= step_bound / omega_0

    void validate() const
    {
        detail::require(std::isfinite(dt), "integrator: dt must be finite");
        detail::require(sampler_stride >= 1, "integrator: sampler_stride must be >= 1");
        detail::require(step_bound > 0.0 && step_bound <= 0.05, "integrator: step_bound must lie in (0, 0.05]");
    }
};

/// Trap frequency of the organized pattern, omega_0 = sqrt(4 V).
inline double trap_frequency(double v) { return std::sqrt(4.0 * std::max(v, 0.0)); }

/// Largest time step for a stage: the configured dt, checked against the
/// trap-frequency bound, or when dt <= 0 the largest step allowed by both the
/// trap frequency and the momentum scale (a bound on |p| at the stage start).
inline double resolve_time_step(const IntegratorConfig& cfg, double v_max, double momentum_scale)
{
    const double omega0 = trap_frequency(v_max);
    if (cfg.dt > 0.0) {
        if (omega0 > 0.0 && cfg.dt > cfg.step_bound / omega0 * (1.0 + 1e-12))
            throw InvalidArgument("integrator: dt = " + std::to_string(cfg.dt) + " exceeds " +
                                  std::to_string(cfg.step_bound) + " / omega_0 = " +
                                  std::to_string(cfg.step_bound / omega0));
        return cfg.dt;
    }
    const double rate = std::max({omega0, 2.0 * std::abs(momentum_scale), 1.0});
    return cfg.step_bound / rate;
}

struct StagePlan {
    double dt = 0.0;
    std::int64_t steps = 0;
};

// Trajectory state and stepping kernels ---------------------------------------

/// Particles plus cavity field, with cached sin/cos of every position.
struct TrajectoryState {
    ParticleEnsemble particles;
    CavityField field;
    std::vector<double> sin_x;
    std::vector<double> cos_x;
    double theta = 0.0;

    TrajectoryState() = default;
    explicit TrajectoryState(ParticleEnsemble p, CavityField f = {}) : particles(std::move(p)), field(f)
    {
        refresh();
    }

    void refresh()
    {
        const std::size_t n = particles.size();
        sin_x.resize(n);
        cos_x.resize(n);
        const double* __restrict x = particles.positions.data();
        double* __restrict s = sin_x.data();
        double* __restrict c = cos_x.data();
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = std::sin(x[i]);
            c[i] = std::cos(x[i]);
        }
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += c[i];
        theta = sum / static_cast<double>(n);
    }
};

namespace detail {

inline void kick(TrajectoryState& st, double coefficient)
{
    const std::size_t n = st.particles.size();
    double* __restrict p = st.particles.momenta.data();
    const double* __restrict s = st.sin_x.data();
    for (std::size_t i = 0; i < n; ++i) p[i] += coefficient * s[i];
}

inline void drift(TrajectoryState& st, double dt)
{
    const std::size_t n = st.particles.size();
    double* __restrict x = st.particles.positions.data();
    const double* __restrict p = st.particles.momenta.data();
    const double step = 2.0 * dt;
    constexpr double inv = 1.0 / two_pi;
    for (std::size_t i = 0; i < n; ++i) {
        double w = x[i] + step * p[i];
        w -= two_pi * std::floor(w * inv);
        w = w >= two_pi ? w - two_pi : w;
        x[i] = w < 0.0 ? 0.0 : w;
    }
    st.refresh();
}

} // namespace detail

/// One velocity-Verlet step of the reduced model with couplings v_now at t and
/// v_next at t + dt.
inline void step_reduced(TrajectoryState& st, double v_now, double v_next, double dt)
{
    detail::kick(st, -dt * v_now * st.theta);  // 0.5 dt * (-2 V Theta) sin x
    detail::drift(st, dt);
    detail::kick(st, -dt * v_next * st.theta);
}

/// Precomputed coefficients of the exact Ornstein-Uhlenbeck field map over dt.
class ExactFieldMap {
public:
    ExactFieldMap(double kappa, double delta_c, double dt) : dt_(dt)
    {
        const std::complex<double> mu(kappa, -delta_c);
        const std::complex<double> z = mu * dt;
        lambda_ = std::exp(-z);
        if (std::abs(z) < 0.05) {
            // phi1 = sum (-z)^k / (k+1)!, phi2 = sum (-z)^k (k+1) / (k+2)!
            std::complex<double> term(1.0, 0.0);
            phi1_ = 0.0;
            phi2_ = 0.0;
            double fact = 1.0;  // (k+1)!
            for (int k = 0; k < 14; ++k) {
                fact *= (k + 1);
                phi1_ += term / fact;
                phi2_ += term * static_cast<double>(k + 1) / (fact * (k + 2));
                term *= -z;
            }
        } else {
            phi1_ = (1.0 - lambda_) / z;
            phi2_ = (1.0 - lambda_ * (1.0 + z)) / (z * z);
        }
        noise_sigma_ = 0.5 * std::sqrt(-std::expm1(-2.0 * kappa * dt));
    }

    /// a(t+dt) given a(t), drive b(s) = -i N S(s) Theta(s) at both ends of the step.
    std::complex<double> advance(std::complex<double> a, std::complex<double> b0, std::complex<double> b1,
                                 FieldHold hold, double xi_r, double xi_i) const
    {
        std::complex<double> forced;
        if (hold == FieldHold::linear)
            forced = dt_ * (phi1_ * b0 + (phi1_ - phi2_) * (b1 - b0));
        else
            forced = dt_ * phi1_ * b1;
        return lambda_ * a + forced + noise_sigma_ * std::complex<double>(xi_r, xi_i);
    }

    double dt() const { return dt_; }
    std::complex<double> decay() const { return lambda_; }
    double noise_sigma() const { return noise_sigma_; }

private:
    double dt_;
    std::complex<double> lambda_;
    std::complex<double> phi1_;
    std::complex<double> phi2_;
    double noise_sigma_;
};

/// One hybrid step of the full model: half kick, drift, exact field update,
/// half kick. s_now and s_next are the scatter rates at t and t + dt.
inline void step_full_hybrid(TrajectoryState& st, const ExactFieldMap& map, double s_now, double s_next,
                             FieldHold hold, RandomStream& rng, bool noise = true)
{
    const double dt = map.dt();
    const double n = static_cast<double>(st.particles.size());
    detail::kick(st, dt * s_now * st.field.e_r);  // 0.5 dt * 2 S E_r sin x
    const double theta0 = st.theta;
    detail::drift(st, dt);
    const std::complex<double> minus_i(0.0, -1.0);
    const std::complex<double> b0 = minus_i * (n * s_now * theta0);
    const std::complex<double> b1 = minus_i * (n * s_next * st.theta);
    double xi_r = 0.0;
    double xi_i = 0.0;
    if (noise) {
        xi_r = rng.normal();
        xi_i = rng.normal();
    }
    const auto a = map.advance({st.field.e_r, st.field.e_i}, b0, b1, hold, xi_r, xi_i);
    st.field = {a.real(), a.imag()};
    detail::kick(st, dt * s_next * st.field.e_r);
}

/// One Euler-Maruyama step of the full model (cross-check scheme).
inline void step_full_euler_maruyama(TrajectoryState& st, double kappa, double delta_c, double s_now, double dt,
                                     RandomStream& rng, bool noise = true)
{
    const double n = static_cast<double>(st.particles.size());
    const CavityField f = st.field;
    const double theta = st.theta;
    std::vector<double>& p = st.particles.momenta;
    // positions move with the momenta at the start of the step
    {
        double* __restrict x = st.particles.positions.data();
        const double step = 2.0 * dt;
        for (std::size_t i = 0; i < p.size(); ++i) x[i] = wrap_phase(x[i] + step * p[i]);
    }
    detail::kick(st, 2.0 * s_now * f.e_r * dt);
    st.refresh();
    const double sigma = std::sqrt(0.5 * kappa * dt);
    const double xi_r = noise ? rng.normal() : 0.0;
    const double xi_i = noise ? rng.normal() : 0.0;
    st.field.e_r = f.e_r + (-delta_c * f.e_i - kappa * f.e_r) * dt + sigma * xi_r;
    st.field.e_i = f.e_i + (delta_c * f.e_r - kappa * f.e_i - n * s_now * theta) * dt + sigma * xi_i;
}

// Value-semantics wrappers ------------------------------------------------------

/// Advances an ensemble by one reduced-model step under schedule v_of_t.
inline ParticleEnsemble step_reduced(ParticleEnsemble ensemble, const Schedule& v_of_t, double t, double dt)
{
    TrajectoryState st(std::move(ensemble));
    step_reduced(st, schedule_value(v_of_t, t), schedule_value(v_of_t, t + dt), dt);
    if (!std::isfinite(st.theta)) throw NumericalAbort("step_reduced: non-finite state", 0, t);
    return std::move(st.particles);
}

/// Advances particles and field by one hybrid full-model step. The schedule is
/// in units of V; the scatter rate follows from inverting the coupling relation.
inline std::pair<ParticleEnsemble, CavityField> step_full(ParticleEnsemble ensemble, CavityField field,
                                                          const Schedule& v_of_t, const SystemParams& params,
                                                          double t, double dt, RandomStream& rng,
                                                          FieldHold hold = FieldHold::linear)
{
    TrajectoryState st(std::move(ensemble), field);
    const ExactFieldMap map(params.kappa, params.delta_c, dt);
    SystemParams p = params;
    p.n_particles = static_cast<int>(st.particles.size());
    step_full_hybrid(st, map, scatter_rate_for_coupling(schedule_value(v_of_t, t), p),
                     scatter_rate_for_coupling(schedule_value(v_of_t, t + dt), p), hold, rng);
    if (!std::isfinite(st.theta) || !std::isfinite(st.field.e_r) || !std::isfinite(st.field.e_i))
        throw NumericalAbort("step_full: non-finite state", 0, t);
    return {std::move(st.particles), st.field};
}

// Initial states ----------------------------------------------------------------

/// Mean-field thermal state at coupling ratio alpha and kinetic energy e_kin:
/// Gaussian momenta with <p^2> = e_kin and positions drawn from
/// rho(x) ~ exp(2 alpha theta(alpha) sign cos x).
inline ParticleEnsemble sample_thermal_state(double alpha, double e_kin, int n_particles, RandomStream& rng,
                                             int sign = +1)
{
    detail::require(e_kin > 0.0, "sample_thermal_state: e_kin must be > 0");
    detail::require(alpha >= 0.0, "sample_thermal_state: alpha must be >= 0");
    detail::require(n_particles >= 1, "sample_thermal_state: n_particles must be >= 1");
    detail::require(sign == 1 || sign == -1, "sample_thermal_state: sign must be +1 or -1");
    const double concentration = 2.0 * alpha * magnetization(alpha);
    const double mean = sign > 0 ? 0.0 : std::numbers::pi;
    const double width = std::sqrt(e_kin);
    ParticleEnsemble e;
    e.positions.resize(static_cast<std::size_t>(n_particles));
    e.momenta.resize(static_cast<std::size_t>(n_particles));
    for (auto& x : e.positions) x = wrap_phase(rng.von_mises(mean, concentration));
    for (auto& p : e.momenta) p = width * rng.normal();
    return e;
}

inline ParticleEnsemble sample_thermal_state(double alpha, double e_kin, const SystemParams& params,
                                             RandomStream& rng, int sign = +1)
{
    return sample_thermal_state(alpha, e_kin, params.n_particles, rng, sign);
}

/// Field at the adiabatic value for the current Theta plus stationary vacuum
/// fluctuations (variance 1/4 per quadrature).
inline CavityField sample_initial_field(double theta, const SystemParams& params, double scatter_rate,
                                        RandomStream& rng)
{
    SystemParams p = params;
    p.scatter_rate = scatter_rate;
    CavityField f = adiabatic_field(theta, p);
    f.e_r += 0.5 * rng.normal();
    f.e_i += 0.5 * rng.normal();
    return f;
}

// Protocol runner ---------------------------------------------------------------

struct Stage {
    Schedule schedule;
    double duration = 0.0;
};

/// Raw per-trajectory sample; aggregated across trajectories by the observables module.
struct TrajectoryFrame {
    double t = 0.0;
    double v = 0.0;
    double sum_p2 = 0.0;
    double sum_p4 = 0.0;
    double theta = 0.0;
    double intensity = 0.0;
};

struct TrajectoryRecord {
    std::vector<TrajectoryFrame> frames;
    std::vector<std::size_t> stage_first_frame;  // index of each stage's first frame
    std::vector<double> stage_dt;
    TrajectoryState final_state;
};

namespace detail {

inline TrajectoryFrame sample_frame(const TrajectoryState& st, Model model, const SystemParams& params, double t,
                                    double v)
{
    TrajectoryFrame f;
    f.t = t;
    f.v = v;
    for (double p : st.particles.momenta) {
        const double p2 = p * p;
        f.sum_p2 += p2;
        f.sum_p4 += p2 * p2;
    }
    f.theta = st.theta;
    if (model == Model::full) {
        f.intensity = st.field.intensity();
    } else {
        SystemParams p = params;
        p.scatter_rate = scatter_rate_for_coupling(v, params);
        f.intensity = adiabatic_field(st.theta, p).intensity();
    }
    return f;
}

} // namespace detail

/// Step size and count for every stage. All trajectories of an ensemble share
/// one plan so their frames line up in time.
inline std::vector<StagePlan> plan_stages(const IntegratorConfig& cfg, std::span<const Stage> stages,
                                          double momentum_scale)
{
    cfg.validate();
    detail::require(!stages.empty(), "plan_stages: no stages");
    std::vector<StagePlan> plan;
    for (const Stage& stage : stages) {
        stage.schedule.validate();
        detail::require(std::isfinite(stage.duration) && stage.duration >= 0.0,
                        "plan_stages: stage duration must be >= 0");
        const double dt_max = resolve_time_step(cfg, schedule_max(stage.schedule, stage.duration), momentum_scale);
        const auto n_steps = static_cast<std::int64_t>(std::ceil(stage.duration / dt_max - 1e-9));
        plan.push_back({n_steps > 0 ? stage.duration / static_cast<double>(n_steps) : dt_max, n_steps});
    }
    return plan;
}

/// Integrates one trajectory through consecutive stages and records frames
/// every sampler_stride steps plus at the end of each stage. Stage k+1 starts
/// from the final state of stage k; its initial frame is not repeated.
inline TrajectoryRecord run_protocol(TrajectoryState state, Model model, const SystemParams& params,
                                     std::span<const Stage> stages, const IntegratorConfig& cfg,
                                     std::span<const StagePlan> plan, RandomStream& rng)
{
    params.validate();
    cfg.validate();
    detail::require(!stages.empty() && plan.size() == stages.size(), "run_protocol: stage plan mismatch");
    detail::require(static_cast<int>(state.particles.size()) == params.n_particles,
                    "run_protocol: ensemble size differs from n_particles");
    state.particles.validate();
    state.refresh();

    TrajectoryRecord rec;
    double t_offset = 0.0;
    std::int64_t global_step = 0;

    for (std::size_t k = 0; k < stages.size(); ++k) {
        const Stage& stage = stages[k];
        const double dt = plan[k].dt;
        const std::int64_t n_steps = plan[k].steps;
        rec.stage_dt.push_back(dt);
        rec.stage_first_frame.push_back(rec.frames.size());

        auto v_at = [&](std::int64_t i) { return schedule_value(stage.schedule, static_cast<double>(i) * dt); };

        if (k == 0) rec.frames.push_back(detail::sample_frame(state, model, params, t_offset, v_at(0)));

        std::optional<ExactFieldMap> map;
        if (model == Model::full && cfg.scheme == FullScheme::hybrid)
            map.emplace(params.kappa, params.delta_c, dt);
        auto s_of_v = [&](double v) { return scatter_rate_for_coupling(v, params); };

        double v_now = v_at(0);
        for (std::int64_t i = 0; i < n_steps; ++i) {
            const double v_next = v_at(i + 1);
            if (model == Model::reduced) {
                step_reduced(state, v_now, v_next, dt);
            } else if (cfg.scheme == FullScheme::hybrid) {
                step_full_hybrid(state, *map, s_of_v(v_now), s_of_v(v_next), cfg.hold, rng);
            } else {
                step_full_euler_maruyama(state, params.kappa, params.delta_c, s_of_v(v_now), dt, rng);
            }
            v_now = v_next;
            ++global_step;
            if (!std::isfinite(state.theta) || !std::isfinite(state.field.e_r) || !std::isfinite(state.field.e_i))
                throw NumericalAbort("run_protocol: non-finite state", global_step,
                                     t_offset + static_cast<double>(i + 1) * dt);
            if ((i + 1) % cfg.sampler_stride == 0 || i + 1 == n_steps)
                rec.frames.push_back(detail::sample_frame(state, model, params,
                                                          t_offset + static_cast<double>(i + 1) * dt, v_now));
        }
        t_offset += stage.duration;
    }
    rec.final_state = std::move(state);
    return rec;
}

/// Single-trajectory convenience overload; the step is planned from this
/// trajectory's own initial momenta.
inline TrajectoryRecord run_protocol(TrajectoryState state, Model model, const SystemParams& params,
                                     std::span<const Stage> stages, const IntegratorConfig& cfg,
                                     RandomStream& rng)
{
    double pmax = 0.0;
    for (double p : state.particles.momenta) pmax = std::max(pmax, std::abs(p));
    const auto plan = plan_stages(cfg, stages, pmax);
    return run_protocol(std::move(state), model, params, stages, cfg, plan, rng);
}

} // namespace cavcool

#endif // CAVCOOL_DYNAMICS_HPP
