#ifndef CAVCOOL_CORE_HPP
#define CAVCOOL_CORE_HPP

// Parameters, unit conventions and regime checks.
//
// Everything inside the library is dimensionless:
//   position  x = k x_phys           stored in [0, 2pi)
//   momentum  p = p_phys / (hbar k)
//   time      t = omega_R t_phys
//   energy    E = E_phys / (hbar omega_R)
//   rates     kappa, delta_c, S, g, Omega, delta_a in multiples of omega_R
// With these units the single-particle kinetic energy is p^2 and the
// free-streaming velocity is dx/dt = 2p.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace cavcool {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {
inline void require(bool ok, const std::string& what)
{
    if (!ok) throw InvalidArgument(what);
}
} // namespace detail

/// S = g Omega / delta_a, the coherent scattering rate into the cavity.
inline double derive_scatter_rate(double g, double omega_rabi, double delta_a)
{
    detail::require(delta_a != 0.0, "derive_scatter_rate: atomic detuning must be nonzero");
    return g * omega_rabi / delta_a;
}

struct DriveFields {
    double g = 0.0;
    double omega_rabi = 0.0;
    double delta_a = 0.0;
};

struct SystemParams {
    int n_particles = 1;
    double kappa = 1.0;
    double delta_c = -1.0;
    double scatter_rate = 0.0;
    std::optional<DriveFields> drive;

    void validate() const
    {
        detail::require(n_particles >= 1, "n_particles must be >= 1");
        detail::require(std::isfinite(kappa) && kappa > 0.0, "kappa must be > 0");
        detail::require(std::isfinite(delta_c) && delta_c < 0.0,
                        "delta_c must be < 0 (cooling / self-organization regime)");
        // the sign of S only selects which sublattice the pattern prefers
        detail::require(std::isfinite(scatter_rate), "scatter_rate must be finite");
        if (drive) {
            const double s = derive_scatter_rate(drive->g, drive->omega_rabi, drive->delta_a);
            detail::require(std::abs(s - scatter_rate) <= 1e-12 * std::max(1.0, std::abs(s)),
                            "scatter_rate inconsistent with g*Omega/delta_a");
        }
    }

    static SystemParams from_drive(int n, double kappa, double delta_c, DriveFields d)
    {
        SystemParams p{n, kappa, delta_c, derive_scatter_rate(d.g, d.omega_rabi, d.delta_a), d};
        p.validate();
        return p;
    }

    double detuning_norm() const { return delta_c * delta_c + kappa * kappa; }
};

/// Cavity-mediated coupling V = -delta_c N S^2 / (delta_c^2 + kappa^2).
inline double coupling_strength(int n_particles, double kappa, double delta_c, double scatter_rate)
{
    detail::require(delta_c < 0.0, "coupling_strength: delta_c must be < 0");
    detail::require(kappa > 0.0 && n_particles >= 1, "coupling_strength: invalid kappa or N");
    return -delta_c * n_particles * scatter_rate * scatter_rate / (delta_c * delta_c + kappa * kappa);
}

inline double coupling_strength(const SystemParams& p)
{
    return coupling_strength(p.n_particles, p.kappa, p.delta_c, p.scatter_rate);
}

/// Inverse of coupling_strength: the (nonnegative) S producing coupling v.
inline double scatter_rate_for_coupling(double v, const SystemParams& p)
{
    detail::require(p.delta_c < 0.0, "scatter_rate_for_coupling: delta_c must be < 0");
    detail::require(v >= 0.0, "scatter_rate_for_coupling: coupling must be >= 0");
    return std::sqrt(v * p.detuning_norm() / (-p.delta_c * p.n_particles));
}

struct RegimeReport {
    double doppler_ratio = 0.0;  // (k dp / m) / min(kappa, |delta_c|)
    double drive_ratio = 0.0;    // sqrt(N) S / kappa^2
    std::optional<double> stark_ratio;  // N U / min(kappa, |delta_c|), U = g^2 / delta_a
    double threshold = 0.1;
    bool ok = true;
};

/// Checks the conditions under which the cavity follows the particles
/// adiabatically. Advisory only; never throws for physical inputs.
inline RegimeReport regime_check(const SystemParams& p, double momentum_width, double threshold = 0.1)
{
    RegimeReport r;
    r.threshold = threshold;
    const double slowest = std::min(p.kappa, std::abs(p.delta_c));
    // k dp / m = 2 omega_R dp in these units
    r.doppler_ratio = 2.0 * std::abs(momentum_width) / slowest;
    r.drive_ratio = std::sqrt(static_cast<double>(p.n_particles)) * p.scatter_rate / (p.kappa * p.kappa);
    if (p.drive && p.drive->delta_a != 0.0) {
        const double u = p.drive->g * p.drive->g / p.drive->delta_a;
        r.stark_ratio = std::abs(p.n_particles * u) / slowest;
    }
    r.ok = r.doppler_ratio <= threshold && r.drive_ratio <= threshold &&
           (!r.stark_ratio || *r.stark_ratio <= threshold);
    return r;
}

/// The two cavity field quadratures, a = e_r + i e_i.
struct CavityField {
    double e_r = 0.0;
    double e_i = 0.0;

    double intensity() const { return e_r * e_r + e_i * e_i; }
};

/// Conversion to physical units at the I/O boundary.
struct PhysicalUnits {
    double omega_recoil;  // rad/s
    double wavenumber;    // 1/m
    double hbar = 1.054571817e-34;

    double mass() const { return hbar * wavenumber * wavenumber / (2.0 * omega_recoil); }
    double rate_to_si(double r) const { return r * omega_recoil; }
    double rate_from_si(double r) const { return r / omega_recoil; }
    double time_to_si(double t) const { return t / omega_recoil; }
    double time_from_si(double t) const { return t * omega_recoil; }
    double energy_to_si(double e) const { return e * hbar * omega_recoil; }
    double energy_from_si(double e) const { return e / (hbar * omega_recoil); }
    double position_to_si(double x) const { return x / wavenumber; }
    double position_from_si(double x) const { return x * wavenumber; }
    double momentum_to_si(double p) const { return p * hbar * wavenumber; }
    double momentum_from_si(double p) const { return p / (hbar * wavenumber); }
};

inline double wrap_phase(double x)
{
    double w = x - two_pi * std::floor(x / two_pi);
    if (w >= two_pi) w -= two_pi;
    if (w < 0.0) w = 0.0;
    return w;
}

} // namespace cavcool

#endif // CAVCOOL_CORE_HPP
