#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cavcool/meanfield.hpp"

using namespace cavcool;

namespace {

// Stable fixpoint of theta = I1/I0(2 alpha theta) and
// exp(2 [ln I0(2 alpha theta) - 2 alpha theta^2]), 40 digits (mpmath)
struct MeanFieldReference {
    double alpha, theta, demag;
};
constexpr MeanFieldReference refs[] = {
    {2.0, 0.83146202475425697076, 0.16123610303136725184},
    {5.0, 0.94554218642329795318, 0.048480342610583466092},
    {50.0, 0.99496192622320424336, 0.0043702602989480113296},
    {100.0, 0.99749055399097086826, 0.0021740444264606743732},
};

// Plain fixed-point iteration with the standard library's Bessel functions.
double iterate_fixpoint(double alpha, int iterations)
{
    double t = 1.0;
    for (int i = 0; i < iterations; ++i) {
        const double z = 2.0 * alpha * t;
        t = std::cyl_bessel_i(1.0, z) / std::cyl_bessel_i(0.0, z);
    }
    return t;
}

} // namespace

TEST(Fixpoint, ParamagneticBelowThreshold)
{
    for (double a : {0.0, 0.3, 0.999, 1.0}) {
        const auto s = magnetization_fixpoint(a);
        EXPECT_EQ(s.theta, 0.0);
        EXPECT_EQ(s.branch, Branch::paramagnetic);
    }
}

TEST(Fixpoint, MatchesHighPrecisionValues)
{
    for (const auto& r : refs) {
        const auto s = magnetization_fixpoint(r.alpha);
        EXPECT_NEAR(s.theta, r.theta, 1e-13) << r.alpha;
        EXPECT_LT(s.residual, 1e-12);
        EXPECT_EQ(s.branch, Branch::ferromagnetic_stable);
        EXPECT_GT(s.curvature, 0.0);
    }
    EXPECT_NEAR(magnetization(1.5), 0.72415871762635286072, 1e-12);
}

TEST(Fixpoint, AgreesWithPlainIteration)
{
    for (double a : {3.0, 10.0, 50.0, 300.0}) EXPECT_NEAR(magnetization(a), iterate_fixpoint(a, 20000), 1e-12) << a;
}

TEST(Fixpoint, ContinuousAtThreshold)
{
    // Landau expansion: theta^2 ~ 2 (alpha - 1) near alpha = 1
    double prev = 0.0;
    for (double eps : {1e-2, 1e-3, 1e-4, 1e-6}) {
        const double th = magnetization(1.0 + eps);
        EXPECT_NEAR(th * th / (2.0 * eps), 1.0, 5.0 * eps + 1e-6) << eps;
        if (prev > 0.0) {
            EXPECT_LT(th, prev);
        }
        prev = th;
    }
}

TEST(Fixpoint, IncreasesWithAlphaAndStaysBelowOne)
{
    double prev = 0.0;
    for (double a = 1.01; a < 1e4; a *= 1.17) {
        const double th = magnetization(a);
        EXPECT_GT(th, prev);
        EXPECT_LT(th, 1.0);
        prev = th;
    }
}

TEST(FreeEnergy, SlopeAndCurvatureMatchFiniteDifferences)
{
    for (double a : {0.5, 2.0, 20.0}) {
        for (double th : {0.1, 0.5, 0.9}) {
            const double h = 1e-5;
            const double fd1 = (free_energy(th + h, a) - free_energy(th - h, a)) / (2.0 * h);
            const double fd2 = (free_energy_slope(th + h, a) - free_energy_slope(th - h, a)) / (2.0 * h);
            EXPECT_NEAR(free_energy_slope(th, a), fd1, 1e-7 * std::max(1.0, std::abs(fd1)));
            EXPECT_NEAR(free_energy_curvature(th, a), fd2, 1e-6 * std::max(1.0, std::abs(fd2)));
        }
    }
}

TEST(FreeEnergy, FixpointIsMinimum)
{
    const double a = 7.0;
    const double th = magnetization(a);
    EXPECT_LT(free_energy(th, a), free_energy(0.0, a));
    EXPECT_LT(free_energy(th, a), free_energy(th * 0.98, a));
    EXPECT_LT(free_energy(th, a), free_energy(std::min(1.0, th * 1.01), a));
}

TEST(Demag, MatchesHighPrecisionValues)
{
    for (const auto& r : refs) {
        const auto d = demag_ratio(r.alpha);
        EXPECT_TRUE(d.demagnetizes);
        EXPECT_NEAR(d.value / r.demag, 1.0, 1e-12) << r.alpha;
    }
}

TEST(Demag, NoGainBelowThreshold)
{
    EXPECT_EQ(demag_ratio(0.5).value, 1.0);
    EXPECT_FALSE(demag_ratio(1.0).demagnetizes);
    EXPECT_DOUBLE_EQ(energy_ratio(0.3, 0.7), 1.0);
}

TEST(Demag, EnergyRatioComposes)
{
    // ramping 50 -> 10 -> 0 equals ramping 50 -> 0
    EXPECT_NEAR(energy_ratio(50.0, 10.0) * energy_ratio(10.0, 0.0), demag_ratio(50.0).value, 1e-14);
    EXPECT_NEAR(energy_ratio(50.0, 0.5), demag_ratio(50.0).value, 1e-15);
}

TEST(Demag, ApproachesAsymptote)
{
    EXPECT_NEAR(asymptotic_ratio(50.0), std::numbers::e / (200.0 * std::numbers::pi), 1e-16);
    EXPECT_NEAR(asymptotic_ratio(50.0), 0.0043262798971613254361, 1e-17);
    double prev_gap = 1.0;
    for (double a : {10.0, 100.0, 1000.0, 10000.0}) {
        const double gap = std::abs(demag_ratio(a).value / asymptotic_ratio(a) - 1.0);
        EXPECT_LT(gap, prev_gap);
        prev_gap = gap;
    }
    EXPECT_LT(prev_gap, 1e-3);
}

TEST(Protocol, ClosedForms)
{
    const auto o = protocol_optimum(-400.0, 400.0);
    EXPECT_DOUBLE_EQ(o.v_fer_opt, 20000.0);
    EXPECT_DOUBLE_EQ(o.e_kin_fer, 200.0);
    EXPECT_NEAR(o.e_kin_min, std::numbers::e / std::numbers::pi, 1e-15);
    EXPECT_NEAR(o.omega_0, std::sqrt(80000.0), 1e-12);
    // E_fer = kappa / 2 at V_opt for any kappa when delta_c = -kappa
    for (double k : {4.0, 40.0, 1000.0}) EXPECT_NEAR(protocol_optimum(-k, k).e_kin_fer, k / 2.0, 1e-12 * k);
}

TEST(Protocol, OptimumMinimizesParamagneticEnergy)
{
    const double dc = -30.0;
    const double kappa = 50.0;
    const double v_opt = optimal_coupling(dc, kappa);
    auto e_par = [&](double v) { return paramagnetic_energy(ferro_kinetic_energy(v, dc, kappa), v); };
    EXPECT_NEAR(e_par(v_opt), min_kinetic_energy(dc, kappa), 1e-12);
    EXPECT_GT(e_par(v_opt * 1.01), e_par(v_opt));
    EXPECT_GT(e_par(v_opt * 0.99), e_par(v_opt));
}

TEST(Protocol, RejectsPositiveDetuning)
{
    EXPECT_THROW(protocol_optimum(1.0, 1.0), InvalidArgument);
    EXPECT_THROW(ferro_kinetic_energy(-1.0, -1.0, 1.0), InvalidArgument);
}

TEST(Field, AdiabaticFieldAndIntensity)
{
    SystemParams p{10, 3.0, -4.0, 2.0, std::nullopt};
    const auto f = adiabatic_field(0.5, p);
    EXPECT_DOUBLE_EQ(f.e_r, -4.0 * 10 * 2.0 * 0.5 / 25.0);
    EXPECT_DOUBLE_EQ(f.e_i, -3.0 * 10 * 2.0 * 0.5 / 25.0);
    EXPECT_NEAR(intensity_formula(0.25, p), f.intensity(), 1e-14);
    EXPECT_THROW(intensity_formula(1.5, p), InvalidArgument);
}

TEST(BruteForce, MatchesIntegralRepresentation)
{
    // <Theta^2> = d ln Z / dy with Z(y) = pi^-1/2 int exp(-h^2) I0(2 h sqrt(y) / N)^N dh,
    // evaluated with mpmath quadrature
    struct Case {
        int n;
        double alpha, expected;
    };
    for (const Case& c : {Case{6, 0.0, 1.0 / 12.0}, Case{6, 0.5, 0.139092649451162}, Case{6, 3.0, 0.806555671130125},
                          Case{5, 0.5, 0.0}}) {
        if (c.expected == 0.0) continue;
        const auto r = brute_force_partition_check(c.n, c.alpha);
        EXPECT_TRUE(r.converged);
        EXPECT_NEAR(r.theta_sq_mean, c.expected, 1e-10) << c.n << " " << c.alpha;
    }
}

TEST(BruteForce, WithinFiniteSizeBandOfMeanField)
{
    for (double a : {0.0, 0.5, 3.0}) {
        const double th = magnetization(a);
        const auto r = brute_force_partition_check(6, a);
        EXPECT_LE(std::abs(r.theta_sq_mean - th * th), 2.0 / 6.0) << a;
    }
}

TEST(BruteForce, ArgumentChecks)
{
    EXPECT_THROW(brute_force_partition_check(9, 1.0), InvalidArgument);
    EXPECT_THROW(brute_force_partition_check(3, -1.0), InvalidArgument);
}
