#pragma once

// Inner-loop kernels of the Kaczmarz sweep.
//
// Every kernel set implements the same two primitives. The scalar set is the
// reference; vector sets must produce elementwise-identical v updates and sums
// that differ only by summation order. beta = shrink(v) is never stored by the
// kernels; callers rebuild it when they need it.

#include <cstddef>
#include <string_view>
#include <vector>

namespace lbotdr::kernels {

// v[k] += c; returns sum_k shrink(v[k], lambda).
using ShiftShrinkSumFn = double (*)(double* v, std::size_t count, double c, double lambda);
// sum_k shrink(v[k], lambda)
using ShrinkSumFn = double (*)(const double* v, std::size_t count, double lambda);

struct KernelSet {
    std::string_view name;
    ShiftShrinkSumFn shift_shrink_sum;
    ShrinkSumFn shrink_sum;
};

const KernelSet& scalar();

/// Kernel sets compiled into this binary that the running CPU can execute,
/// scalar first.
std::vector<const KernelSet*> supported();

/// Widest supported set, unless LBOTDR_KERNEL names another supported one.
const KernelSet& best();

/// Throws lbotdr::InvalidArgument for unknown or unsupported names.
const KernelSet& by_name(std::string_view name);

}  // namespace lbotdr::kernels
