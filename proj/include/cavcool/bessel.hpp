#ifndef CAVCOOL_BESSEL_HPP
#define CAVCOOL_BESSEL_HPP

// Modified Bessel functions I0 and I1 for real z >= 0.
//
// Power series below z = 15, Hankel asymptotic expansion above. The scaled
// variants return exp(-z) I_n(z) and stay finite for any z; the unscaled
// variants throw once exp(z) would overflow.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cavcool/core.hpp"

namespace cavcool {

class BesselOverflow : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

namespace bessel {

inline constexpr double series_cutoff = 15.0;
inline constexpr double raw_limit = 700.0;

namespace detail {

// sum_m (z/2)^(2m+n) / (m! (m+n)!)
inline double series(int order, double z)
{
    const double half = 0.5 * z;
    const double q = half * half;
    double term = order == 0 ? 1.0 : half;
    double sum = term;
    for (int m = 1; m < 500; ++m) {
        term *= q / (static_cast<double>(m) * static_cast<double>(m + order));
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return sum;
}

// exp(-z) I_n(z) ~ (2 pi z)^(-1/2) sum_k (-1)^k a_k(n) / z^k
inline double asymptotic_scaled(int order, double z)
{
    const double mu = 4.0 * order * order;
    double term = 1.0;
    double sum = 1.0;
    double previous = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= -(mu - odd * odd) / (8.0 * k * z);
        const double mag = std::abs(term);
        if (mag > previous) break;  // series started diverging
        sum += term;
        previous = mag;
        if (mag < 1e-17 * std::abs(sum)) break;
    }
    return sum / std::sqrt(2.0 * std::numbers::pi * z);
}

inline void check_argument(double z)
{
    if (!(z >= 0.0) || !std::isfinite(z))
        throw InvalidArgument("bessel: argument must be finite and >= 0, got " + std::to_string(z));
}

} // namespace detail

/// exp(-z) I_n(z), n in {0, 1}.
inline double scaled(int order, double z)
{
    detail::check_argument(z);
    if (order != 0 && order != 1) throw InvalidArgument("bessel: order must be 0 or 1");
    if (z < series_cutoff) return std::exp(-z) * detail::series(order, z);
    return detail::asymptotic_scaled(order, z);
}

/// I_n(z), n in {0, 1}. Throws BesselOverflow above z = 700; use scaled().
inline double raw(int order, double z)
{
    detail::check_argument(z);
    if (order != 0 && order != 1) throw InvalidArgument("bessel: order must be 0 or 1");
    if (z > raw_limit)
        throw BesselOverflow("bessel: I_n(" + std::to_string(z) +
                             ") overflows; use the scaled variant");
    if (z < series_cutoff) return detail::series(order, z);
    return std::exp(z) * detail::asymptotic_scaled(order, z);
}

inline double i0(double z) { return raw(0, z); }
inline double i1(double z) { return raw(1, z); }
inline double i0_scaled(double z) { return scaled(0, z); }
inline double i1_scaled(double z) { return scaled(1, z); }

/// ln I0(z) for z >= 0, finite for all finite z.
inline double log_i0(double z) { return z + std::log(i0_scaled(z)); }

/// I1(z) / I0(z) for z >= 0.
inline double i1_over_i0(double z)
{
    if (z == 0.0) return 0.0;
    return i1_scaled(z) / i0_scaled(z);
}

} // namespace bessel
} // namespace cavcool

#endif // CAVCOOL_BESSEL_HPP
