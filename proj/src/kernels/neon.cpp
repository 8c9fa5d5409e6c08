// AArch64 only; NEON is part of the base ISA there.

#include <arm_neon.h>

#include "kernels_impl.hpp"
#include "lbotdr/detail/scalar_kernels.hpp"

namespace lbotdr::kernels::impl {

namespace {

inline float64x2_t shrink2(float64x2_t x, float64x2_t lambda, float64x2_t zero) {
    return vaddq_f64(vmaxq_f64(vsubq_f64(x, lambda), zero), vminq_f64(vaddq_f64(x, lambda), zero));
}

double shift_shrink_sum_neon(double* v, std::size_t count, double c, double lambda) {
    const float64x2_t vc = vdupq_n_f64(c);
    const float64x2_t vlambda = vdupq_n_f64(lambda);
    const float64x2_t zero = vdupq_n_f64(0.0);
    float64x2_t acc0 = zero;
    float64x2_t acc1 = zero;

    std::size_t k = 0;
    for (; k + 4 <= count; k += 4) {
        const float64x2_t x0 = vaddq_f64(vld1q_f64(v + k), vc);
        const float64x2_t x1 = vaddq_f64(vld1q_f64(v + k + 2), vc);
        vst1q_f64(v + k, x0);
        vst1q_f64(v + k + 2, x1);
        acc0 = vaddq_f64(acc0, shrink2(x0, vlambda, zero));
        acc1 = vaddq_f64(acc1, shrink2(x1, vlambda, zero));
    }
    return vaddvq_f64(vaddq_f64(acc0, acc1)) + detail::shift_shrink_sum_generic<double>(v + k, count - k, c, lambda);
}

double shrink_sum_neon(const double* v, std::size_t count, double lambda) {
    const float64x2_t vlambda = vdupq_n_f64(lambda);
    const float64x2_t zero = vdupq_n_f64(0.0);
    float64x2_t acc0 = zero;
    float64x2_t acc1 = zero;
    std::size_t k = 0;
    for (; k + 4 <= count; k += 4) {
        acc0 = vaddq_f64(acc0, shrink2(vld1q_f64(v + k), vlambda, zero));
        acc1 = vaddq_f64(acc1, shrink2(vld1q_f64(v + k + 2), vlambda, zero));
    }
    return vaddvq_f64(vaddq_f64(acc0, acc1)) + detail::shrink_sum_generic<double>(v + k, count - k, lambda);
}

}  // namespace

const KernelSet& neon() {
    static const KernelSet set{"neon", &shift_shrink_sum_neon, &shrink_sum_neon};
    return set;
}

}  // namespace lbotdr::kernels::impl
