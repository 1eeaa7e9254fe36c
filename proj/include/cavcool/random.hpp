#ifndef CAVCOOL_RANDOM_HPP
#define CAVCOOL_RANDOM_HPP

// Counter-based random streams.
//
// Every trajectory owns a Philox4x32-10 stream keyed by the 64-bit base seed
// and addressed by (trajectory index, substream). The realization seen by a
// trajectory therefore never depends on how many trajectories run or on
// which worker runs them. Distributions are implemented here rather than
// taken from <random> so the sample sequence is identical on every standard
// library.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace cavcool {

enum class Substream : std::uint32_t {
    initial_state = 0,
    dynamics = 1,
    bootstrap = 2,
};

class Philox4x32 {
public:
    using result_type = std::uint64_t;
    using Block = std::array<std::uint32_t, 4>;

    Philox4x32(std::uint64_t seed, std::uint32_t stream, std::uint32_t substream)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          counter_{0u, 0u, stream, substream}
    {
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        if (lane_ == 2) {
            block_ = generate(counter_, key_);
            advance();
            lane_ = 0;
        }
        const auto lo = block_[2 * lane_];
        const auto hi = block_[2 * lane_ + 1];
        ++lane_;
        return (static_cast<std::uint64_t>(hi) << 32) | lo;
    }

    /// One Philox4x32-10 block for an explicit counter; exposed for tests
    /// against published known-answer vectors.
    static Block generate(Block ctr, std::array<std::uint32_t, 2> key)
    {
        constexpr std::uint32_t m0 = 0xD2511F53u;
        constexpr std::uint32_t m1 = 0xCD9E8D57u;
        constexpr std::uint32_t w0 = 0x9E3779B9u;
        constexpr std::uint32_t w1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
            ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
                   static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
            key[0] += w0;
            key[1] += w1;
        }
        return ctr;
    }

private:
    void advance()
    {
        if (++counter_[0] == 0) ++counter_[1];
    }

    std::array<std::uint32_t, 2> key_;
    Block counter_;
    Block block_{};
    int lane_ = 2;
};

/// Uniform double in the open interval (0, 1).
template <class Engine>
double uniform_open(Engine& eng)
{
    return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal deviates by Box-Muller; caches the second value of each pair.
class NormalSampler {
public:
    template <class Engine>
    double operator()(Engine& eng)
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open(eng);
        const double u2 = uniform_open(eng);
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(phi);
        has_spare_ = true;
        return r * std::cos(phi);
    }

    void reset() { has_spare_ = false; }

private:
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Per-trajectory random source: engine plus normal cache.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint32_t trajectory, Substream sub)
        : engine_(seed, trajectory, static_cast<std::uint32_t>(sub))
    {
    }

    double uniform() { return uniform_open(engine_); }
    double normal() { return normal_(engine_); }
    std::uint64_t bits() { return engine_(); }

    /// Uniform integer in [0, n) by rejection (no modulo bias).
    std::uint64_t below(std::uint64_t n)
    {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    /// von Mises deviate on (-pi, pi] with mean mu and concentration k >= 0
    /// (Best and Fisher 1979 wrapped-Cauchy envelope).
    double von_mises(double mu, double k)
    {
        constexpr double pi = std::numbers::pi;
        if (k < 1e-8) return wrap(mu + pi * (2.0 * uniform() - 1.0));
        const double tau = 1.0 + std::sqrt(1.0 + 4.0 * k * k);
        const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * k);
        const double r = (1.0 + rho * rho) / (2.0 * rho);
        double f = 0.0;
        for (;;) {
            const double u1 = uniform();
            const double u2 = uniform();
            const double z = std::cos(pi * u1);
            f = (1.0 + r * z) / (r + z);
            const double c = k * (r - f);
            if (c * (2.0 - c) - u2 > 0.0) break;
            if (std::log(c / u2) + 1.0 - c >= 0.0) break;
        }
        f = std::clamp(f, -1.0, 1.0);
        const double u3 = uniform();
        const double theta = u3 > 0.5 ? std::acos(f) : -std::acos(f);
        return wrap(mu + theta);
    }

private:
    static double wrap(double x)
    {
        constexpr double pi = std::numbers::pi;
        while (x > pi) x -= 2.0 * pi;
        while (x <= -pi) x += 2.0 * pi;
        return x;
    }

    Philox4x32 engine_;
    NormalSampler normal_;
};

} // namespace cavcool

#endif // CAVCOOL_RANDOM_HPP
