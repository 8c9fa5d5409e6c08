#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "lbotdr/detail/scalar_kernels.hpp"
#include "lbotdr/kernels.hpp"
#include "lbotdr/solver.hpp"
#include "test_support.hpp"

using namespace lbotdr;

namespace {

bool bitwise_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

double abs_shrink_total(const std::vector<double>& v, double lambda) {
    double t = 0.0;
    for (const double x : v) {
        t += std::fabs(shrink(x, lambda));
    }
    return t;
}

}  // namespace

TEST_SUITE("kernels") {

TEST_CASE("registry") {
    const auto sets = kernels::supported();
    REQUIRE(!sets.empty());
    CHECK(sets.front()->name == "scalar");
    CHECK(&kernels::by_name("scalar") == &kernels::scalar());
    CHECK_THROWS_AS(kernels::by_name("no-such-isa"), InvalidArgument);
    bool found = false;
    for (const auto* s : sets) {
        found = found || s == &kernels::best();
    }
    CHECK(found);
    MESSAGE("kernel sets on this machine: " << sets.size() << ", best = " << kernels::best().name);
}

TEST_CASE("vector kernels agree with the scalar reference") {
    std::mt19937_64 rng(11);
    const auto& ref = kernels::scalar();
    for (const auto* set : kernels::supported()) {
        CAPTURE(set->name);
        for (std::size_t count : {0u, 1u, 3u, 7u, 8u, 15u, 16u, 17u, 31u, 33u, 100u, 1001u, 4099u}) {
            for (const double lambda : {0.0, 0.5, 2.75}) {
                std::vector<double> v = test::random_vector(count, rng, 2.0);
                // values exactly at the threshold, signed zeros
                if (count > 4) {
                    v[0] = lambda;
                    v[1] = -lambda;
                    v[2] = 0.0;
                    v[3] = -0.0;
                }
                const double c = std::normal_distribution<double>(0.0, 0.3)(rng);
                std::vector<double> a = v;
                std::vector<double> b = v;
                const double ra = ref.shift_shrink_sum(a.data(), count, c, lambda);
                const double rb = set->shift_shrink_sum(b.data(), count, c, lambda);
                CHECK(bitwise_equal(a, b));
                const double scale = std::max(1.0, abs_shrink_total(a, lambda));
                CHECK(std::fabs(ra - rb) <= 1e-13 * scale);

                const double sa = ref.shrink_sum(v.data(), count, lambda);
                const double sb = set->shrink_sum(v.data(), count, lambda);
                CHECK(std::fabs(sa - sb) <= 1e-13 * std::max(1.0, abs_shrink_total(v, lambda)));
            }
        }
    }
}

TEST_CASE("max/min shrink form matches the reference elementwise") {
    // The vector kernels evaluate shrink as max(x - l, 0) + min(x + l, 0).
    // Check the identity on hard values through single-element sums.
    const double values[] = {0.0, -0.0, 0.5, -0.5, 0.5000000000000001, -0.4999999999999999, 1e-300, -1e300,
                             3.0, -3.0, std::numeric_limits<double>::denorm_min()};
    for (const auto* set : kernels::supported()) {
        for (const double x : values) {
            for (const double lambda : {0.0, 0.5, 1.0}) {
                std::vector<double> block(17, x);   // crosses every vector width
                const double total = set->shrink_sum(block.data(), block.size(), lambda);
                const double expect = detail::shrink_sum_generic<double>(block.data(), block.size(), lambda);
                CHECK(total == doctest::Approx(expect).epsilon(1e-15));
            }
        }
    }
}

TEST_CASE("solver trajectories agree across kernel sets") {
    std::mt19937_64 rng(5);
    const DictionaryShape shape = DictionaryShape::for_samples(301);
    const std::vector<double> y = test::random_vector(301, rng);
    KaczmarzSolver reference(shape, y, SolverState::cold(shape.columns(), 0.5), kernels::scalar());
    for (int s = 0; s < 5; ++s) {
        reference.sweep();
    }
    for (const auto* set : kernels::supported()) {
        KaczmarzSolver other(shape, y, SolverState::cold(shape.columns(), 0.5), *set);
        for (int s = 0; s < 5; ++s) {
            other.sweep();
        }
        double worst = 0.0;
        for (std::size_t j = 0; j < shape.columns(); ++j) {
            worst = std::max(worst, std::fabs(other.state().v[j] - reference.state().v[j]));
        }
        CAPTURE(set->name);
        CHECK(worst < 1e-9);
    }
}

}  // TEST_SUITE
