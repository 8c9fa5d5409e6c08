#include <cstdlib>
#include <string>

#include "kernels_impl.hpp"
#include "lbotdr/kernels.hpp"
#include "lbotdr/types.hpp"

namespace lbotdr::kernels {

namespace {

bool cpu_has(std::string_view feature) {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    if (feature == "avx2") {
        return __builtin_cpu_supports("avx2");
    }
    if (feature == "avx512f") {
        return __builtin_cpu_supports("avx512f");
    }
#endif
    (void)feature;
    return false;
}

}  // namespace

std::vector<const KernelSet*> supported() {
    std::vector<const KernelSet*> out{&scalar()};
#if defined(LBOTDR_HAVE_AVX2)
    if (cpu_has("avx2")) {
        out.push_back(&impl::avx2());
    }
#endif
#if defined(LBOTDR_HAVE_AVX512)
    if (cpu_has("avx512f")) {
        out.push_back(&impl::avx512());
    }
#endif
#if defined(LBOTDR_HAVE_NEON)
    out.push_back(&impl::neon());
#endif
    return out;
}

const KernelSet& by_name(std::string_view name) {
    for (const KernelSet* set : supported()) {
        if (set->name == name) {
            return *set;
        }
    }
    throw InvalidArgument("kernel set '" + std::string(name) + "' is not available on this machine");
}

const KernelSet& best() {
    static const KernelSet& chosen = [] () -> const KernelSet& {
        if (const char* forced = std::getenv("LBOTDR_KERNEL"); forced != nullptr && *forced != '\0') {
            return by_name(forced);
        }
        return *supported().back();
    }();
    return chosen;
}

}  // namespace lbotdr::kernels
