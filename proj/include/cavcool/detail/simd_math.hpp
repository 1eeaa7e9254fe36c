#ifndef CAVCOOL_DETAIL_SIMD_MATH_HPP
#define CAVCOOL_DETAIL_SIMD_MATH_HPP

// Lets GCC vectorize sin/cos loops against glibc's libmvec without
// -ffast-math. glibc only emits these declarations under __FAST_MATH__;
// redeclaring them here adds the simd variants and nothing else. Requires
// -fno-math-errno at the call site for the loops to vectorize.

#include <cmath>

#if defined(__GNUC__) && !defined(__clang__) && defined(__x86_64__) && defined(__GLIBC__) && \
    !defined(__FAST_MATH__) && !defined(CAVCOOL_NO_LIBMVEC)
extern "C" {
__attribute__((simd("notinbranch"))) double sin(double) noexcept;
__attribute__((simd("notinbranch"))) double cos(double) noexcept;
}
#endif

#endif // CAVCOOL_DETAIL_SIMD_MATH_HPP
