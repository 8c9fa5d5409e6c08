#pragma once

// Arithmetic type that tallies floating-point operations as it runs.
// Additions, subtractions and comparisons count as additions; multiplications
// and divisions as multiplications. abs/copysign are sign-bit operations and
// are free.

#include <cmath>
#include <cstdint>

namespace lbotdr::detail {

struct OpCounts {
    std::uint64_t multiplications = 0;
    std::uint64_t additions = 0;
};

class CountingReal {
public:
    CountingReal() = default;
    constexpr CountingReal(double x) : value_(x) {}  // NOLINT: implicit by design of the drop-in type

    double value() const { return value_; }

    static OpCounts*& sink() {
        thread_local OpCounts* counts = nullptr;
        return counts;
    }

    friend CountingReal operator+(CountingReal a, CountingReal b) { tally_add(); return {a.value_ + b.value_}; }
    friend CountingReal operator-(CountingReal a, CountingReal b) { tally_add(); return {a.value_ - b.value_}; }
    friend CountingReal operator*(CountingReal a, CountingReal b) { tally_mul(); return {a.value_ * b.value_}; }
    friend CountingReal operator/(CountingReal a, CountingReal b) { tally_mul(); return {a.value_ / b.value_}; }
    friend CountingReal operator-(CountingReal a) { return {-a.value_}; }
    friend bool operator>(CountingReal a, CountingReal b) { tally_add(); return a.value_ > b.value_; }
    friend bool operator<(CountingReal a, CountingReal b) { tally_add(); return a.value_ < b.value_; }

    friend CountingReal abs_value(CountingReal a) { return {std::fabs(a.value_)}; }
    friend CountingReal copy_sign(CountingReal m, CountingReal s) { return {std::copysign(m.value_, s.value_)}; }

private:
    static void tally_add() {
        if (OpCounts* c = sink()) {
            ++c->additions;
        }
    }
    static void tally_mul() {
        if (OpCounts* c = sink()) {
            ++c->multiplications;
        }
    }

    double value_ = 0.0;
};

// Installs a tally for the current thread for the lifetime of the guard.
class OpCountScope {
public:
    explicit OpCountScope(OpCounts& counts) : previous_(CountingReal::sink()) { CountingReal::sink() = &counts; }
    ~OpCountScope() { CountingReal::sink() = previous_; }
    OpCountScope(const OpCountScope&) = delete;
    OpCountScope& operator=(const OpCountScope&) = delete;

private:
    OpCounts* previous_;
};

}  // namespace lbotdr::detail
