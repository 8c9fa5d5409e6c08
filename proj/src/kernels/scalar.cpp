#include "lbotdr/detail/scalar_kernels.hpp"
#include "lbotdr/kernels.hpp"

namespace lbotdr::kernels {

namespace {

double shift_shrink_sum_scalar(double* v, std::size_t count, double c, double lambda) {
    return detail::shift_shrink_sum_generic<double>(v, count, c, lambda);
}

double shrink_sum_scalar(const double* v, std::size_t count, double lambda) {
    return detail::shrink_sum_generic<double>(v, count, lambda);
}

}  // namespace

const KernelSet& scalar() {
    static const KernelSet set{"scalar", &shift_shrink_sum_scalar, &shrink_sum_scalar};
    return set;
}

}  // namespace lbotdr::kernels
