#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "cavcool/observables.hpp"

using namespace cavcool;

TEST(Kurtosis, ReferenceDistributions)
{
    // uniform on [-1, 1]: <p^4> / <p^2>^2 = (1/5) / (1/9)
    std::vector<double> u;
    const int n = 100001;
    for (int i = 0; i < n; ++i) u.push_back(-1.0 + 2.0 * i / (n - 1));
    EXPECT_NEAR(kurtosis(u), 9.0 / 5.0, 1e-4);
    EXPECT_DOUBLE_EQ(kurtosis(std::vector<double>{-2.0, 2.0, 2.0, -2.0}), 1.0);
    RandomStream r(1, 0, Substream::dynamics);
    std::vector<double> g(400000);
    for (auto& x : g) x = 3.0 * r.normal();
    EXPECT_NEAR(kurtosis(g), 3.0, 0.05);
    EXPECT_THROW(kurtosis(std::vector<double>{0.0, 0.0}), InvalidArgument);
    EXPECT_THROW(kurtosis(std::vector<double>{}), InvalidArgument);
}

TEST(Kurtosis, PooledEqualsMerged)
{
    const std::vector<std::vector<double>> parts{{1.0, -2.0, 0.5}, {3.0}, {-0.25, 0.75}};
    std::vector<double> merged;
    for (const auto& p : parts) merged.insert(merged.end(), p.begin(), p.end());
    EXPECT_DOUBLE_EQ(kurtosis(parts), kurtosis(merged));
}

TEST(KineticEnergy, MeanAndError)
{
    const std::vector<std::vector<double>> m{{1.0, -1.0}, {2.0, 0.0}, {0.0, 0.0}};
    const Estimate e = kinetic_energy(m, {200, 5});
    EXPECT_DOUBLE_EQ(e.mean, 1.0);
    // bootstrap SE approaches the plain SE sqrt(var / n) of per-trajectory means {1, 2, 0}
    const double plain = std::sqrt((2.0 / 3.0) / 3.0);
    EXPECT_NEAR(e.error, plain, 0.25 * plain);
    EXPECT_EQ(kinetic_energy(std::vector<double>{3.0, 1.0}).error, 0.0);
}

TEST(Bootstrap, MatchesAnalyticStandardError)
{
    RandomStream r(8, 0, Substream::dynamics);
    std::vector<double> v(400);
    for (auto& x : v) x = r.normal();
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= 400.0;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= 400.0;
    const Bootstrap b(400, {2000, 3});
    EXPECT_NEAR(b.stderr_of_mean(v) / std::sqrt(var / 400.0), 1.0, 0.07);
}

TEST(Bootstrap, DeterministicForSeed)
{
    const std::vector<double> v{1.0, 4.0, 2.0, 8.0, 5.0};
    EXPECT_EQ(Bootstrap(5, {100, 9}).stderr_of_mean(v), Bootstrap(5, {100, 9}).stderr_of_mean(v));
    EXPECT_NE(Bootstrap(5, {100, 9}).stderr_of_mean(v), Bootstrap(5, {100, 10}).stderr_of_mean(v));
}

TEST(Magnetization, SquaredOrderParameter)
{
    std::vector<ParticleEnsemble> e(2);
    e[0].positions = {0.0, 0.0};
    e[0].momenta = {0.0, 0.0};
    e[1].positions = {0.0, std::numbers::pi};
    e[1].momenta = {0.0, 0.0};
    EXPECT_NEAR(magnetization_sq(e), 0.5, 1e-15);
    const std::vector<CavityField> f{{1.0, 0.0}, {0.0, 3.0}};
    EXPECT_DOUBLE_EQ(field_intensity(f), 5.0);
}

TEST(Histogram, NormalizedDensity)
{
    RandomStream r(2, 0, Substream::dynamics);
    std::vector<double> x(10000);
    for (auto& v : x) v = r.uniform() * two_pi;
    const Histogram h = position_histogram(x, 32);
    double integral = 0.0;
    for (double d : h.density) integral += d * h.bin_width();
    EXPECT_NEAR(integral, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(h.lo, -std::numbers::pi);
    const Histogram partial = histogram(std::vector<double>{0.5, 1.5, 7.0}, 2, 0.0, 2.0);
    EXPECT_DOUBLE_EQ(partial.density[0], 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(partial.bin_center(1), 1.5);
}

TEST(Aggregate, FrameStatistics)
{
    std::vector<TrajectoryRecord> recs(2);
    for (int k = 0; k < 2; ++k) {
        TrajectoryFrame f;
        f.t = 0.5;
        f.v = 3.0;
        f.sum_p2 = k == 0 ? 2.0 : 6.0;
        f.sum_p4 = k == 0 ? 2.0 : 18.0;
        f.theta = k == 0 ? 0.5 : -0.5;
        f.intensity = k == 0 ? 1.0 : 3.0;
        recs[static_cast<std::size_t>(k)].frames = {f};
        recs[static_cast<std::size_t>(k)].final_state.particles.positions = {0.0, 0.0};
        recs[static_cast<std::size_t>(k)].final_state.particles.momenta = {0.0, 0.0};
    }
    const auto out = aggregate_frames(recs, {50, 1});
    ASSERT_EQ(out.size(), 1u);
    EXPECT_DOUBLE_EQ(out[0].e_kin_mean, 2.0);
    EXPECT_DOUBLE_EQ(out[0].kurtosis, 5.0 / 4.0);
    EXPECT_DOUBLE_EQ(out[0].theta2_mean, 0.25);
    EXPECT_DOUBLE_EQ(out[0].intensity, 2.0);
    EXPECT_GT(out[0].e_kin_stderr, 0.0);
}
