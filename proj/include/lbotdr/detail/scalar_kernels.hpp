#pragma once

// Reference kernels, generic over the arithmetic type so the same code runs
// on double and on the operation-counting type used for instrumentation.

#include <cmath>
#include <cstddef>

namespace lbotdr::detail {

inline double abs_value(double x) { return std::fabs(x); }
inline double copy_sign(double magnitude, double sign) { return std::copysign(magnitude, sign); }

template <class Real>
Real shrink_generic(Real v, Real lambda) {
    const Real excess = abs_value(v) - lambda;
    return excess > Real(0.0) ? copy_sign(excess, v) : Real(0.0);
}

template <class Real>
Real shift_shrink_sum_generic(Real* v, std::size_t count, Real c, Real lambda) {
    Real total(0.0);
    for (std::size_t k = 0; k < count; ++k) {
        v[k] = v[k] + c;
        total = total + shrink_generic(v[k], lambda);
    }
    return total;
}

template <class Real>
Real shrink_sum_generic(const Real* v, std::size_t count, Real lambda) {
    Real total(0.0);
    for (std::size_t k = 0; k < count; ++k) {
        total = total + shrink_generic(v[k], lambda);
    }
    return total;
}

}  // namespace lbotdr::detail
