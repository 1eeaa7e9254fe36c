#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "cavcool/ensemble.hpp"

using namespace cavcool;

namespace {

ExperimentConfig small_config(Model model)
{
    ExperimentConfig c;
    c.model = model;
    c.params = {8, 40.0, -40.0, 0.0, std::nullopt};
    c.initial = {InitialKind::thermal, 5.0, 2.0, 1, false};
    c.stages = {{Schedule::hold(20.0), 0.2}, {Schedule::exp_ramp(20.0, 0.3), 0.3}};
    c.trajectories = 7;
    c.base_seed = 99;
    c.integrator.sampler_stride = 50;
    return c;
}

bool same_frames(const std::vector<ObservableFrame>& a, const std::vector<ObservableFrame>& b)
{
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto& x = a[i];
        const auto& y = b[i];
        if (x.t != y.t || x.v != y.v || x.e_kin_mean != y.e_kin_mean || x.e_kin_stderr != y.e_kin_stderr ||
            x.theta2_mean != y.theta2_mean || x.intensity != y.intensity)
            return false;
        if (!(x.kurtosis == y.kurtosis || (std::isnan(x.kurtosis) && std::isnan(y.kurtosis)))) return false;
    }
    return true;
}

} // namespace

TEST(Ensemble, IndependentOfWorkerCount)
{
    for (Model m : {Model::reduced, Model::full}) {
        ExperimentConfig c = small_config(m);
        c.workers = 1;
        const RunRecord a = run_ensemble(c);
        c.workers = 3;
        const RunRecord b = run_ensemble(c);
        EXPECT_TRUE(same_frames(a.frames, b.frames));
        ASSERT_EQ(a.final_states.size(), b.final_states.size());
        for (std::size_t k = 0; k < a.final_states.size(); ++k)
            EXPECT_EQ(a.final_states[k].particles.momenta, b.final_states[k].particles.momenta);
    }
}

TEST(Ensemble, TrajectoryDependsOnlyOnItsIndex)
{
    ExperimentConfig c = small_config(Model::full);
    c.trajectories = 3;
    const RunRecord few = run_ensemble(c);
    c.trajectories = 6;
    const RunRecord many = run_ensemble(c);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(few.final_states[k].particles.positions, many.final_states[k].particles.positions);
        EXPECT_EQ(few.final_states[k].field.e_r, many.final_states[k].field.e_r);
    }
}

TEST(Ensemble, SeedChangesRealization)
{
    ExperimentConfig c = small_config(Model::reduced);
    const RunRecord a = run_ensemble(c);
    c.base_seed = 100;
    const RunRecord b = run_ensemble(c);
    EXPECT_NE(a.frames.back().e_kin_mean, b.frames.back().e_kin_mean);
}

TEST(Ensemble, SingleTrajectory)
{
    ExperimentConfig c = small_config(Model::full);
    c.trajectories = 1;
    const RunRecord r = run_ensemble(c);
    EXPECT_EQ(r.final_states.size(), 1u);
    EXPECT_EQ(r.frames.back().e_kin_stderr, 0.0);
    EXPECT_NEAR(r.frames.back().t, 0.5, 1e-12);
    EXPECT_EQ(r.stage_first_frame.size(), 2u);
}

TEST(Ensemble, FreeGasKeepsItsEnergy)
{
    ExperimentConfig c = small_config(Model::reduced);
    c.initial = {InitialKind::homogeneous, 0.0, 4.0, 1, false};
    c.stages = {{Schedule::hold(0.0), 2.0}};
    c.trajectories = 20;
    const RunRecord r = run_ensemble(c);
    for (const auto& f : r.frames) EXPECT_NEAR(f.e_kin_mean, r.frames.front().e_kin_mean, 1e-12);
}

TEST(Ensemble, BudgetRefusal)
{
    ExperimentConfig c = small_config(Model::reduced);
    c.max_particle_steps = 10.0;
    EXPECT_GT(estimate_particle_steps(c), 10.0);
    EXPECT_THROW(run_ensemble(c), BudgetExceeded);
}

TEST(Ensemble, InitialFieldIsAdiabaticPlusVacuum)
{
    ExperimentConfig c = small_config(Model::full);
    c.params.n_particles = 50;
    c.initial.alpha = 50.0;
    c.initial.e_kin = 1.0;
    double er = 0.0;
    const int n = 400;
    for (std::uint32_t k = 0; k < static_cast<std::uint32_t>(n); ++k) {
        const TrajectoryState st = initial_state(c, k);
        SystemParams p = c.params;
        p.scatter_rate = scatter_rate_for_coupling(20.0, p);
        er += st.field.e_r - adiabatic_field(st.theta, p).e_r;
    }
    EXPECT_NEAR(er / n, 0.0, 5.0 * 0.5 / std::sqrt(n));
}

TEST(Sweep, AppliesValues)
{
    SweepConfig s{small_config(Model::reduced), "t_ramp", {1.0, 2.0}, 40.0};
    const ExperimentConfig c = apply_sweep_value(s, 2.0);
    EXPECT_EQ(c.stages.back().schedule.t_ramp, 2.0);
    EXPECT_EQ(c.stages.back().duration, 2.0);
    EXPECT_EQ(c.trajectories, 5);  // 40 / N
    s.parameter = "n_particles";
    EXPECT_EQ(apply_sweep_value(s, 20.0).params.n_particles, 20);
    EXPECT_EQ(apply_sweep_value(s, 20.0).trajectories, 2);
    s.parameter = "nonsense";
    EXPECT_THROW(apply_sweep_value(s, 1.0), InvalidArgument);
}

TEST(Sweep, OneRowPerValue)
{
    SweepConfig s{small_config(Model::reduced), "t_ramp", {0.1}, std::nullopt};
    const auto rows = sweep(s);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0].value, 0.1);
    EXPECT_EQ(rows[0].trajectories, 7);
    ExperimentConfig c = apply_sweep_value(s, 0.1);
    EXPECT_EQ(rows[0].e_kin_final_mean, run_ensemble(c).frames.back().e_kin_mean);
}

TEST(TwoStage, ConfigAndPrediction)
{
    TwoStageOptions o;
    o.params = {100, 400.0, -400.0, 0.0, std::nullopt};
    const ExperimentConfig c = make_two_stage_config(o);
    EXPECT_EQ(c.model, Model::full);
    EXPECT_EQ(c.initial.kind, InitialKind::homogeneous);
    EXPECT_EQ(c.initial.e_kin, 100.0);
    ASSERT_EQ(c.stages.size(), 2u);
    EXPECT_EQ(c.stages[0].schedule.v0, 20000.0);
    EXPECT_EQ(schedule_value_before(c.stages[0].schedule), 0.0);
    EXPECT_EQ(c.stages[0].duration, 3000.0);
    EXPECT_EQ(c.stages[1].duration, 10.0);
    const TwoStagePrediction p = two_stage_prediction(c.params, 20000.0);
    EXPECT_DOUBLE_EQ(p.e_kin_fer, 200.0);
    EXPECT_DOUBLE_EQ(p.alpha_fer, 50.0);
    EXPECT_NEAR(p.theta2_fer, 0.99496192622320424336 * 0.99496192622320424336, 1e-13);
    EXPECT_NEAR(p.e_kin_par, p.optimum.e_kin_min, 1e-12);
}

TEST(TwoStage, SplitsStages)
{
    TwoStageOptions o;
    o.params = {6, 40.0, -40.0, 0.0, std::nullopt};
    o.trajectories = 2;
    o.t_hold = 0.3;
    o.t_ramp = 0.2;
    o.integrator.sampler_stride = 20;
    const TwoStageResult r = two_stage_protocol(o);
    EXPECT_EQ(r.cooling.frames.front().t, 0.0);
    EXPECT_EQ(r.demagnetizing.frames.front().t, 0.0);
    EXPECT_NEAR(r.cooling.frames.back().t, 0.3, 1e-12);
    EXPECT_NEAR(r.demagnetizing.frames.back().t, 0.2, 1e-12);
    EXPECT_EQ(r.demagnetizing.frames.front().e_kin_mean, r.cooling.frames.back().e_kin_mean);
    EXPECT_EQ(r.demagnetizing.final_states.size(), 2u);
}
