#ifndef CAVCOOL_OBSERVABLES_HPP
#define CAVCOOL_OBSERVABLES_HPP

// Ensemble estimators. Moments are pooled over particles and trajectories;
// uncertainties are computed at the trajectory level because particles in one
// trajectory are correlated through the shared cavity field.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "cavcool/core.hpp"
#include "cavcool/dynamics.hpp"
#include "cavcool/random.hpp"

namespace cavcool {

struct Estimate {
    double mean = 0.0;
    double error = 0.0;
};

struct BootstrapConfig {
    int resamples = 200;
    std::uint64_t seed = 0;
};

/// Trajectory-level bootstrap. Indices are drawn once and reused for every
/// quantity, so a whole time series shares one set of resamples.
class Bootstrap {
public:
    Bootstrap(std::size_t trajectories, BootstrapConfig cfg) : n_(trajectories), resamples_(cfg.resamples)
    {
        detail::require(trajectories >= 1, "bootstrap: need at least one trajectory");
        detail::require(cfg.resamples >= 2, "bootstrap: need at least two resamples");
        if (n_ < 2) return;
        RandomStream rng(cfg.seed, 0, Substream::bootstrap);
        indices_.resize(static_cast<std::size_t>(resamples_) * n_);
        for (auto& i : indices_) i = static_cast<std::uint32_t>(rng.below(n_));
    }

    /// Standard error of the mean of per-trajectory values.
    double stderr_of_mean(std::span<const double> values) const
    {
        detail::require(values.size() == n_, "bootstrap: value count differs from trajectory count");
        if (n_ < 2) return 0.0;
        double sum = 0.0;
        double sum_sq = 0.0;
        for (int b = 0; b < resamples_; ++b) {
            const std::uint32_t* idx = indices_.data() + static_cast<std::size_t>(b) * n_;
            double m = 0.0;
            for (std::size_t j = 0; j < n_; ++j) m += values[idx[j]];
            m /= static_cast<double>(n_);
            sum += m;
            sum_sq += m * m;
        }
        const double r = resamples_;
        const double var = (sum_sq - sum * sum / r) / (r - 1.0);
        return std::sqrt(std::max(var, 0.0));
    }

private:
    std::size_t n_;
    int resamples_;
    std::vector<std::uint32_t> indices_;
};

/// Mean single-particle kinetic energy <p^2> (hbar omega_R) with the
/// trajectory-level bootstrap standard error. One inner vector per trajectory.
inline Estimate kinetic_energy(const std::vector<std::vector<double>>& momenta, BootstrapConfig cfg = {})
{
    detail::require(!momenta.empty(), "kinetic_energy: no trajectories");
    std::vector<double> per_traj;
    per_traj.reserve(momenta.size());
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& traj : momenta) {
        detail::require(!traj.empty(), "kinetic_energy: empty trajectory");
        double s = 0.0;
        for (double p : traj) s += p * p;
        per_traj.push_back(s / static_cast<double>(traj.size()));
        total += s;
        count += traj.size();
    }
    Estimate e;
    e.mean = total / static_cast<double>(count);
    e.error = Bootstrap(momenta.size(), cfg).stderr_of_mean(per_traj);
    return e;
}

inline Estimate kinetic_energy(std::span<const double> momenta)
{
    return kinetic_energy(std::vector<std::vector<double>>{{momenta.begin(), momenta.end()}});
}

/// Pooled kurtosis <p^4> / <p^2>^2.
inline double kurtosis(std::span<const double> momenta)
{
    detail::require(!momenta.empty(), "kurtosis: empty input");
    double m2 = 0.0;
    double m4 = 0.0;
    for (double p : momenta) {
        const double p2 = p * p;
        m2 += p2;
        m4 += p2 * p2;
    }
    detail::require(m2 > 0.0, "kurtosis: undefined for all-zero momenta");
    const double n = static_cast<double>(momenta.size());
    return (m4 / n) / ((m2 / n) * (m2 / n));
}

inline double kurtosis(const std::vector<std::vector<double>>& momenta)
{
    std::vector<double> pooled;
    for (const auto& t : momenta) pooled.insert(pooled.end(), t.begin(), t.end());
    return kurtosis(pooled);
}

/// <Theta^2> over trajectories, one ensemble per trajectory.
inline double magnetization_sq(const std::vector<ParticleEnsemble>& ensembles)
{
    detail::require(!ensembles.empty(), "magnetization_sq: no trajectories");
    double s = 0.0;
    for (const auto& e : ensembles) {
        const double th = order_parameter(e);
        s += th * th;
    }
    return s / static_cast<double>(ensembles.size());
}

/// <E_r^2 + E_i^2> over all supplied field samples.
inline double field_intensity(std::span<const CavityField> samples)
{
    detail::require(!samples.empty(), "field_intensity: no samples");
    double s = 0.0;
    for (const auto& f : samples) s += f.intensity();
    return s / static_cast<double>(samples.size());
}

struct Histogram {
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> density;

    double bin_width() const { return (hi - lo) / static_cast<double>(density.size()); }
    double bin_center(std::size_t i) const { return lo + (static_cast<double>(i) + 0.5) * bin_width(); }
};

/// Normalized density on [lo, hi); samples outside the range are dropped
/// from the counts but still count towards the normalization.
inline Histogram histogram(std::span<const double> values, int bins, double lo, double hi)
{
    detail::require(bins >= 2, "histogram: need at least two bins");
    detail::require(!values.empty(), "histogram: empty input");
    detail::require(hi > lo, "histogram: empty range");
    Histogram h{lo, hi, std::vector<double>(static_cast<std::size_t>(bins), 0.0)};
    const double width = h.bin_width();
    for (double v : values) {
        if (!(v >= lo && v < hi)) continue;
        auto i = static_cast<std::size_t>((v - lo) / width);
        if (i >= h.density.size()) i = h.density.size() - 1;
        h.density[i] += 1.0;
    }
    const double norm = 1.0 / (static_cast<double>(values.size()) * width);
    for (auto& d : h.density) d *= norm;
    return h;
}

/// Position density over [-pi, pi) so an organized pattern at x = 0 sits centered.
inline Histogram position_histogram(std::span<const double> positions, int bins)
{
    std::vector<double> shifted(positions.begin(), positions.end());
    for (auto& x : shifted) x = x >= std::numbers::pi ? x - two_pi : x;
    return histogram(shifted, bins, -std::numbers::pi, std::numbers::pi);
}

// Frame aggregation ---------------------------------------------------------------

struct ObservableFrame {
    double t = 0.0;
    double v = 0.0;
    double e_kin_mean = 0.0;
    double e_kin_stderr = 0.0;
    double kurtosis = std::numeric_limits<double>::quiet_NaN();
    double theta2_mean = 0.0;
    double intensity = 0.0;
};

/// Combines per-trajectory records frame by frame, in trajectory order.
inline std::vector<ObservableFrame> aggregate_frames(std::span<const TrajectoryRecord> records,
                                                     BootstrapConfig cfg = {})
{
    detail::require(!records.empty(), "aggregate_frames: no trajectories");
    const std::size_t n_frames = records.front().frames.size();
    for (const auto& r : records)
        detail::require(r.frames.size() == n_frames, "aggregate_frames: trajectories differ in frame count");
    const double n_particles = static_cast<double>(records.front().final_state.particles.size());
    const Bootstrap boot(records.size(), cfg);
    const double n_traj = static_cast<double>(records.size());

    std::vector<ObservableFrame> out(n_frames);
    std::vector<double> per_traj(records.size());
    for (std::size_t f = 0; f < n_frames; ++f) {
        ObservableFrame& o = out[f];
        o.t = records.front().frames[f].t;
        o.v = records.front().frames[f].v;
        double p2 = 0.0;
        double p4 = 0.0;
        double th2 = 0.0;
        double inten = 0.0;
        for (std::size_t k = 0; k < records.size(); ++k) {
            const TrajectoryFrame& fr = records[k].frames[f];
            p2 += fr.sum_p2;
            p4 += fr.sum_p4;
            th2 += fr.theta * fr.theta;
            inten += fr.intensity;
            per_traj[k] = fr.sum_p2 / n_particles;
        }
        const double count = n_traj * n_particles;
        o.e_kin_mean = p2 / count;
        o.e_kin_stderr = boot.stderr_of_mean(per_traj);
        if (p2 > 0.0) o.kurtosis = (p4 / count) / (o.e_kin_mean * o.e_kin_mean);
        o.theta2_mean = th2 / n_traj;
        o.intensity = inten / n_traj;
    }
    return out;
}

} // namespace cavcool

#endif // CAVCOOL_OBSERVABLES_HPP
