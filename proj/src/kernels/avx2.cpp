// Compiled with -mavx2. Only reached after a runtime CPU check.
//
// shrink(x) = max(x - lambda, 0) + min(x + lambda, 0). Each term is exact
// where it is nonzero, so the per-element value matches the reference.

#include <immintrin.h>

#include "kernels_impl.hpp"
#include "lbotdr/detail/scalar_kernels.hpp"

namespace lbotdr::kernels::impl {

namespace {

inline double horizontal_sum(__m256d x) {
    const __m128d lo = _mm256_castpd256_pd128(x);
    const __m128d hi = _mm256_extractf128_pd(x, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

inline __m256d shrink4(__m256d x, __m256d lambda, __m256d zero) {
    return _mm256_add_pd(_mm256_max_pd(_mm256_sub_pd(x, lambda), zero),
                         _mm256_min_pd(_mm256_add_pd(x, lambda), zero));
}

double shift_shrink_sum_avx2(double* v, std::size_t count, double c, double lambda) {
    const __m256d vc = _mm256_set1_pd(c);
    const __m256d vlambda = _mm256_set1_pd(lambda);
    const __m256d zero = _mm256_setzero_pd();
    __m256d acc0 = zero;
    __m256d acc1 = zero;

    std::size_t k = 0;
    for (; k + 8 <= count; k += 8) {
        const __m256d x0 = _mm256_add_pd(_mm256_loadu_pd(v + k), vc);
        const __m256d x1 = _mm256_add_pd(_mm256_loadu_pd(v + k + 4), vc);
        _mm256_storeu_pd(v + k, x0);
        _mm256_storeu_pd(v + k + 4, x1);
        acc0 = _mm256_add_pd(acc0, shrink4(x0, vlambda, zero));
        acc1 = _mm256_add_pd(acc1, shrink4(x1, vlambda, zero));
    }
    return horizontal_sum(_mm256_add_pd(acc0, acc1)) +
           detail::shift_shrink_sum_generic<double>(v + k, count - k, c, lambda);
}

double shrink_sum_avx2(const double* v, std::size_t count, double lambda) {
    const __m256d vlambda = _mm256_set1_pd(lambda);
    const __m256d zero = _mm256_setzero_pd();
    __m256d acc0 = zero;
    __m256d acc1 = zero;
    std::size_t k = 0;
    for (; k + 8 <= count; k += 8) {
        acc0 = _mm256_add_pd(acc0, shrink4(_mm256_loadu_pd(v + k), vlambda, zero));
        acc1 = _mm256_add_pd(acc1, shrink4(_mm256_loadu_pd(v + k + 4), vlambda, zero));
    }
    return horizontal_sum(_mm256_add_pd(acc0, acc1)) + detail::shrink_sum_generic<double>(v + k, count - k, lambda);
}

}  // namespace

const KernelSet& avx2() {
    static const KernelSet set{"avx2", &shift_shrink_sum_avx2, &shrink_sum_avx2};
    return set;
}

}  // namespace lbotdr::kernels::impl
