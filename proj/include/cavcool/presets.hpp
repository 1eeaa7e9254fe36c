#ifndef CAVCOOL_PRESETS_HPP
#define CAVCOOL_PRESETS_HPP

// Built-in experiment documents for the published figure setups.
//
// "paper" reproduces the original parameters; "ci" is a reduced variant that
// fits on a single core within minutes (fewer trajectories, kappa = 40 for
// the long protocols, a shorter ramp-time list).

#include <string>
#include <vector>

#include "cavcool/io.hpp"

namespace cavcool {

enum class Scale { paper, ci };

struct PresetSeries {
    std::string label;  // output subdirectory
    ExperimentDocument doc;
};

struct Preset {
    std::string name;
    std::string description;
    bool is_sweep = false;
    std::vector<PresetSeries> series;
};

namespace detail {

inline ExperimentConfig ramp_config(std::string name, Model model, int n, double kappa, double v0, double e0,
                                    double t_ramp, int trajectories)
{
    ExperimentConfig c;
    c.name = std::move(name);
    c.model = model;
    c.params.n_particles = n;
    c.params.kappa = kappa;
    c.params.delta_c = -kappa;
    c.initial.kind = InitialKind::thermal;
    c.initial.e_kin = e0;
    c.initial.alpha = v0 / (2.0 * e0);
    c.stages = {{Schedule::exp_ramp(v0, t_ramp), t_ramp}};
    c.trajectories = trajectories;
    c.base_seed = 20190601;
    return c;
}

inline Preset fig3(const std::string& name, double t_ramp, Scale scale)
{
    const int traj = scale == Scale::paper ? 200 : 100;
    Preset p{name,
             "exponential ramp from V0 = 1e4 over t_ramp = " + format_double(t_ramp) +
                 ", kappa = 400, N = 100, E_kin(0) = 100, conservative and full models",
             false,
             {}};
    for (Model m : {Model::reduced, Model::full}) {
        ExperimentDocument d;
        d.config = ramp_config(name + "_" + name_of(m), m, 100, 400.0, 1e4, 100.0, t_ramp, traj);
        p.series.push_back({name_of(m), d});
    }
    return p;
}

inline Preset fig4(const std::string& name, double kappa, Scale scale)
{
    const double e0 = kappa / 4.0;
    const double v0 = 2.0 * 50.0 * e0;
    const bool paper = scale == Scale::paper;
    const std::vector<double> ramps =
        paper ? std::vector<double>{1, 3, 10, 30, 100, 300, 1000} : std::vector<double>{3, 10, 30, 100, 300};
    const std::vector<int> sizes = paper ? std::vector<int>{50, 100, 200} : std::vector<int>{50};
    const int reduced_n = 200;
    Preset p{name,
             "final kinetic energy against t_ramp, kappa = " + format_double(kappa) +
                 ", alpha0 = 50, E0 = kappa/4, 20000/N trajectories",
             true,
             {}};
    auto add = [&](Model m, int n) {
        ExperimentDocument d;
        const std::string label = std::string(name_of(m)) + "_N" + std::to_string(n);
        d.config = ramp_config(name + "_" + label, m, n, kappa, v0, e0, ramps.front(), 20000 / n);
        d.sweep = SweepSpec{"t_ramp", ramps, 20000.0};
        p.series.push_back({label, d});
    };
    for (int n : sizes) add(Model::full, n);
    add(Model::reduced, reduced_n);
    return p;
}

inline Preset fig5(Scale scale)
{
    const bool paper = scale == Scale::paper;
    TwoStageOptions o;
    o.params.n_particles = 100;
    o.params.kappa = paper ? 400.0 : 40.0;
    o.params.delta_c = -o.params.kappa;
    o.trajectories = paper ? 200 : 100;
    o.base_seed = 20190601;
    o.t_hold = 3000.0;
    o.t_ramp = 10.0;
    ExperimentDocument d;
    d.config = make_two_stage_config(o);
    d.config.name = "fig5";
    d.config.integrator.sampler_stride = paper ? 1000 : 200;
    return {"fig5",
            "two-stage protocol: quench of a homogeneous gas (E0 = kappa/4) to V_opt, hold t_f = 3000, ramp over "
            "t_ramp = 10; kappa = " +
                format_double(o.params.kappa),
            false,
            {{"two_stage", d}}};
}

} // namespace detail

inline std::vector<std::string> preset_names() { return {"fig3a", "fig3b", "fig4a", "fig4b", "fig5"}; }

inline Preset make_preset(const std::string& name, Scale scale)
{
    if (name == "fig3a") return detail::fig3(name, 10.0, scale);
    if (name == "fig3b") return detail::fig3(name, 100.0, scale);
    if (name == "fig4a") return detail::fig4(name, 400.0, scale);
    if (name == "fig4b") return detail::fig4(name, 40.0, scale);
    if (name == "fig5") return detail::fig5(scale);
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw InvalidArgument("unknown preset '" + name + "' (known: " + known + ")");
}

} // namespace cavcool

#endif // CAVCOOL_PRESETS_HPP
