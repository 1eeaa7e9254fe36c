#ifndef CAVCOOL_MEANFIELD_HPP
#define CAVCOOL_MEANFIELD_HPP

// Closed-form mean-field theory of the self-organized gas: the
// magnetization fixpoint, the single-particle free energy, kinetic-energy
// ratios under adiabatic changes of alpha = V / (2 E_kin), and the
// optimum of the cool-then-demagnetize protocol.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "cavcool/bessel.hpp"
#include "cavcool/core.hpp"

namespace cavcool {

enum class Branch { paramagnetic, ferromagnetic_stable, unstable };

struct FixpointSolution {
    double alpha = 0.0;
    double theta = 0.0;
    Branch branch = Branch::paramagnetic;
    double residual = 0.0;   // |theta - I1(2 alpha theta) / I0(2 alpha theta)|
    double curvature = 0.0;  // d^2 F / d theta^2 at theta
};

/// Single-particle free energy F(theta) = alpha theta^2 - ln I0(2 alpha theta).
inline double free_energy(double theta, double alpha)
{
    detail::require(std::isfinite(theta) && std::isfinite(alpha), "free_energy: non-finite input");
    return alpha * theta * theta - bessel::log_i0(std::abs(2.0 * alpha * theta));
}

namespace detail {
// d/dz [I1(z) / I0(z)] = 1 - r/z - r^2
inline double bessel_ratio_slope(double z)
{
    z = std::abs(z);
    if (z < 1e-6) return 0.5 - 3.0 * z * z / 16.0;
    const double r = bessel::i1_over_i0(z);
    return 1.0 - r / z - r * r;
}

inline double fixpoint_gap(double theta, double alpha)
{
    return theta - bessel::i1_over_i0(2.0 * alpha * theta);
}
} // namespace detail

/// dF/dtheta = 2 alpha (theta - I1/I0).
inline double free_energy_slope(double theta, double alpha)
{
    const double z = 2.0 * alpha * theta;
    const double r = std::copysign(bessel::i1_over_i0(std::abs(z)), z);
    return 2.0 * alpha * (theta - r);
}

/// d^2F/dtheta^2, the saddle-point prefactor H(theta).
inline double free_energy_curvature(double theta, double alpha)
{
    return 2.0 * alpha - 4.0 * alpha * alpha * detail::bessel_ratio_slope(2.0 * alpha * theta);
}

/// Stable nonnegative root of theta = I1(2 alpha theta) / I0(2 alpha theta).
/// theta = 0 for alpha <= 1; otherwise the ferromagnetic root in (0, 1).
inline FixpointSolution magnetization_fixpoint(double alpha)
{
    detail::require(std::isfinite(alpha) && alpha >= 0.0,
                    "magnetization_fixpoint: alpha must be finite and >= 0");
    FixpointSolution sol;
    sol.alpha = alpha;
    if (alpha <= 1.0) {
        sol.curvature = free_energy_curvature(0.0, alpha);
        sol.branch = Branch::paramagnetic;
        return sol;
    }

    // gap(lo) < 0 < gap(hi). Near alpha = 1 the root is O(sqrt(alpha - 1)).
    double lo = std::min(1e-3, 0.25 * std::sqrt(alpha - 1.0));
    while (detail::fixpoint_gap(lo, alpha) >= 0.0 && lo > 1e-300) lo *= 0.25;
    double hi = 1.0;
    while (hi - lo > 1e-8) {
        const double mid = 0.5 * (lo + hi);
        if (detail::fixpoint_gap(mid, alpha) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    double theta = 0.5 * (lo + hi);
    for (int it = 0; it < 50; ++it) {
        const double g = detail::fixpoint_gap(theta, alpha);
        const double dg = 1.0 - 2.0 * alpha * detail::bessel_ratio_slope(2.0 * alpha * theta);
        const double step = g / dg;
        theta -= step;
        if (std::abs(step) < 1e-15 * std::max(theta, 1e-300)) break;
    }
    // Newton can overshoot only if the polish left the bracket; fall back then.
    if (!(theta > 0.0 && theta < 1.0)) theta = 0.5 * (lo + hi);

    sol.theta = theta;
    sol.residual = std::abs(detail::fixpoint_gap(theta, alpha));
    sol.curvature = free_energy_curvature(theta, alpha);
    sol.branch = sol.curvature > 0.0 ? Branch::ferromagnetic_stable : Branch::unstable;
    return sol;
}

inline double magnetization(double alpha) { return magnetization_fixpoint(alpha).theta; }

namespace detail {
// ln[ I0(2 alpha theta) exp(-2 alpha theta^2) ] on the stable branch
inline double adiabatic_log_weight(double alpha)
{
    const double theta = magnetization(alpha);
    const double z = 2.0 * alpha * theta;
    return bessel::log_i0(z) - 2.0 * alpha * theta * theta;
}
} // namespace detail

/// E1 / E0 after an adiabatic change of alpha from alpha0 to alpha1.
inline double energy_ratio(double alpha0, double alpha1)
{
    detail::require(alpha0 >= 0.0 && alpha1 >= 0.0, "energy_ratio: alpha must be >= 0");
    return std::exp(2.0 * (detail::adiabatic_log_weight(alpha0) - detail::adiabatic_log_weight(alpha1)));
}

struct DemagRatio {
    double value = 1.0;
    bool demagnetizes = false;  // false when alpha0 <= 1: no gain available
};

/// Kinetic-energy ratio for a ramp from alpha0 into the homogeneous phase.
inline DemagRatio demag_ratio(double alpha0)
{
    detail::require(std::isfinite(alpha0) && alpha0 >= 0.0, "demag_ratio: alpha0 must be >= 0");
    if (alpha0 <= 1.0) return {1.0, false};
    return {std::exp(2.0 * detail::adiabatic_log_weight(alpha0)), true};
}

/// Large-alpha0 limit of demag_ratio: e / (4 pi alpha0).
inline double asymptotic_ratio(double alpha0)
{
    detail::require(alpha0 > 0.0, "asymptotic_ratio: alpha0 must be > 0");
    return std::numbers::e / (4.0 * std::numbers::pi * alpha0);
}

// Protocol optimum. All energies in hbar omega_R, rates in omega_R.

/// Steady kinetic energy of the organized gas under cavity cooling,
/// (delta_c^2 + kappa^2 + 4 omega0^2) / (-8 delta_c) with omega0^2 = 4 V.
inline double ferro_kinetic_energy(double v_fer, double delta_c, double kappa)
{
    detail::require(delta_c < 0.0, "ferro_kinetic_energy: delta_c must be < 0");
    detail::require(v_fer >= 0.0, "ferro_kinetic_energy: v_fer must be >= 0");
    return (delta_c * delta_c + kappa * kappa + 16.0 * v_fer) / (-8.0 * delta_c);
}

/// Final energy after demagnetizing from (e_fer, v_fer) in the large-alpha limit.
inline double paramagnetic_energy(double e_fer, double v_fer)
{
    detail::require(v_fer > 0.0, "paramagnetic_energy: v_fer must be > 0");
    return std::numbers::e / (2.0 * std::numbers::pi) * e_fer * e_fer / v_fer;
}

inline double optimal_coupling(double delta_c, double kappa)
{
    detail::require(delta_c < 0.0, "optimal_coupling: delta_c must be < 0");
    return (delta_c * delta_c + kappa * kappa) / 16.0;
}

inline double min_kinetic_energy(double delta_c, double kappa)
{
    detail::require(delta_c < 0.0, "min_kinetic_energy: delta_c must be < 0");
    return std::numbers::e / (2.0 * std::numbers::pi) * (delta_c * delta_c + kappa * kappa) /
           (delta_c * delta_c);
}

struct ProtocolOptimum {
    double v_fer_opt = 0.0;
    double e_kin_fer = 0.0;
    double e_kin_min = 0.0;
    double omega_0 = 0.0;  // omega_0^2 = 4 v_fer_opt
};

inline ProtocolOptimum protocol_optimum(double delta_c, double kappa)
{
    ProtocolOptimum o;
    o.v_fer_opt = optimal_coupling(delta_c, kappa);
    o.e_kin_fer = ferro_kinetic_energy(o.v_fer_opt, delta_c, kappa);
    o.e_kin_min = min_kinetic_energy(delta_c, kappa);
    o.omega_0 = std::sqrt(4.0 * o.v_fer_opt);
    return o;
}

/// Cavity field slaved to the particles:
/// e_r = delta_c N S Theta / D, e_i = -kappa N S Theta / D, D = delta_c^2 + kappa^2.
inline CavityField adiabatic_field(double theta_total, const SystemParams& p)
{
    const double amp = p.n_particles * p.scatter_rate * theta_total / p.detuning_norm();
    return {p.delta_c * amp, -p.kappa * amp};
}

/// Intracavity photon number N^2 S^2 <Theta^2> / (delta_c^2 + kappa^2).
inline double intensity_formula(double theta_sq_mean, const SystemParams& p)
{
    detail::require(theta_sq_mean >= 0.0 && theta_sq_mean <= 1.0,
                    "intensity_formula: <Theta^2> must lie in [0, 1]");
    const double ns = p.n_particles * p.scatter_rate;
    return ns * ns * theta_sq_mean / p.detuning_norm();
}

struct PartitionCheck {
    double theta_sq_mean = 0.0;  // <Theta^2> = dF/dy at y = N alpha
    double reference = 0.0;      // same quantity at the coarser resolution
    int resolution = 0;          // grid points per coordinate
    bool converged = false;
};

namespace detail {

// Trapezoidal product rule over [0, 2pi)^n for the Gibbs weight exp(y Theta^2).
// The integrand is symmetric in the coordinates, so only nondecreasing index
// tuples are visited, each weighted by its multinomial multiplicity.
inline double partition_theta_sq(int n, double alpha, int m)
{
    std::vector<double> cosines(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) cosines[static_cast<std::size_t>(i)] = std::cos(two_pi * i / m);
    std::vector<double> log_fact(static_cast<std::size_t>(n) + 1, 0.0);
    for (int i = 1; i <= n; ++i) log_fact[static_cast<std::size_t>(i)] = log_fact[static_cast<std::size_t>(i) - 1] + std::log(i);

    const double y = n * alpha;
    double z = 0.0;
    double z2 = 0.0;
    // depth, last index, run length of last index, cosine sum, log multiplicity denominator
    auto visit = [&](auto&& self, int depth, int last, int run, double sum, double log_denominator) -> void {
        if (depth == n) {
            const double theta = sum / n;
            const double denom = log_denominator + log_fact[static_cast<std::size_t>(run)];
            // exp(y (Theta^2 - 1)) keeps the weights bounded by one
            const double w = std::exp(log_fact[static_cast<std::size_t>(n)] - denom + y * (theta * theta - 1.0));
            z += w;
            z2 += w * theta * theta;
            return;
        }
        for (int i = last; i < m; ++i) {
            const bool same = depth > 0 && i == last;
            const int next_run = same ? run + 1 : 1;
            const double next_log = same || depth == 0
                                        ? log_denominator
                                        : log_denominator + log_fact[static_cast<std::size_t>(run)];
            self(self, depth + 1, i, next_run, sum + cosines[static_cast<std::size_t>(i)], next_log);
        }
    };
    visit(visit, 0, 0, 0, 0.0, 0.0);
    return z2 / z;
}

} // namespace detail

/// <Theta^2> for a finite gas of n particles in the Gibbs state
/// exp(N alpha Theta^2), by direct quadrature over all configurations.
/// Compared against the large-N prediction theta^2(alpha) + O(1/N).
inline PartitionCheck brute_force_partition_check(int n_small, double alpha, int resolution = 32,
                                                  double tolerance = 1e-10)
{
    detail::require(n_small >= 1 && n_small <= 8, "brute_force_partition_check: need 1 <= n <= 8");
    detail::require(std::isfinite(alpha) && alpha >= 0.0, "brute_force_partition_check: alpha must be >= 0");
    detail::require(resolution >= 8, "brute_force_partition_check: resolution must be >= 8");
    PartitionCheck out;
    out.resolution = resolution;
    out.theta_sq_mean = detail::partition_theta_sq(n_small, alpha, resolution);
    out.reference = detail::partition_theta_sq(n_small, alpha, resolution - resolution / 4);
    out.converged = std::abs(out.theta_sq_mean - out.reference) <= tolerance;
    return out;
}

} // namespace cavcool

#endif // CAVCOOL_MEANFIELD_HPP
