// Compiled with -mavx512f. Only reached after a runtime CPU check.

#include <immintrin.h>

#include "kernels_impl.hpp"
#include "lbotdr/detail/scalar_kernels.hpp"

namespace lbotdr::kernels::impl {

namespace {

inline __m512d shrink8(__m512d x, __m512d lambda, __m512d zero) {
    return _mm512_add_pd(_mm512_max_pd(_mm512_sub_pd(x, lambda), zero),
                         _mm512_min_pd(_mm512_add_pd(x, lambda), zero));
}

double shift_shrink_sum_avx512(double* v, std::size_t count, double c, double lambda) {
    const __m512d vc = _mm512_set1_pd(c);
    const __m512d vlambda = _mm512_set1_pd(lambda);
    const __m512d zero = _mm512_setzero_pd();
    __m512d acc0 = zero;
    __m512d acc1 = zero;

    std::size_t k = 0;
    for (; k + 16 <= count; k += 16) {
        const __m512d x0 = _mm512_add_pd(_mm512_loadu_pd(v + k), vc);
        const __m512d x1 = _mm512_add_pd(_mm512_loadu_pd(v + k + 8), vc);
        _mm512_storeu_pd(v + k, x0);
        _mm512_storeu_pd(v + k + 8, x1);
        acc0 = _mm512_add_pd(acc0, shrink8(x0, vlambda, zero));
        acc1 = _mm512_add_pd(acc1, shrink8(x1, vlambda, zero));
    }
    return _mm512_reduce_add_pd(_mm512_add_pd(acc0, acc1)) +
           detail::shift_shrink_sum_generic<double>(v + k, count - k, c, lambda);
}

double shrink_sum_avx512(const double* v, std::size_t count, double lambda) {
    const __m512d vlambda = _mm512_set1_pd(lambda);
    const __m512d zero = _mm512_setzero_pd();
    __m512d acc0 = zero;
    __m512d acc1 = zero;
    std::size_t k = 0;
    for (; k + 16 <= count; k += 16) {
        acc0 = _mm512_add_pd(acc0, shrink8(_mm512_loadu_pd(v + k), vlambda, zero));
        acc1 = _mm512_add_pd(acc1, shrink8(_mm512_loadu_pd(v + k + 8), vlambda, zero));
    }
    return _mm512_reduce_add_pd(_mm512_add_pd(acc0, acc1)) +
           detail::shrink_sum_generic<double>(v + k, count - k, lambda);
}

}  // namespace

const KernelSet& avx512() {
    static const KernelSet set{"avx512", &shift_shrink_sum_avx512, &shrink_sum_avx512};
    return set;
}

}  // namespace lbotdr::kernels::impl
