#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "lbotdr/evaluation.hpp"
#include "test_support.hpp"

using namespace lbotdr;

namespace {

CoefficientVector make_beta(std::size_t n, std::initializer_list<std::pair<std::size_t, double>> steps) {
    CoefficientVector b(n + 1, 0.0);
    b[0] = -0.2;
    for (const auto& [j, v] : steps) {
        b[j] = v;
    }
    return b;
}

class Throwing final : public Detector {
public:
    std::string name() const override { return "throwing"; }
    Detection detect(const Profile& p) const override {
        if (p.size() == 200) {
            throw std::runtime_error("boom");
        }
        return Detection{CoefficientVector(p.size() + 1, 0.0), std::nullopt, 0};
    }
};

}  // namespace

TEST_SUITE("evaluation") {

TEST_CASE("contingency examples") {
    const auto truth = make_beta(100, {{10, -1.0}, {40, -2.0}, {90, -0.5}});
    const ContingencyTable same = contingency(truth, truth);
    CHECK(same == ContingencyTable{3, 0, 97, 0});

    const CoefficientVector none(101, 0.0);
    CHECK(contingency(truth, none) == ContingencyTable{0, 0, 97, 3});

    const auto shifted = make_beta(100, {{11, -1.0}, {40, -2.0}, {90, -0.5}});
    CHECK(contingency(truth, shifted) == ContingencyTable{2, 1, 96, 1});
    // with a window the shifted hit matches
    CHECK(contingency(truth, shifted, 2) == ContingencyTable{3, 0, 97, 0});
    // one true fault can absorb only one detection
    const auto doubled = make_beta(100, {{9, -0.5}, {11, -0.5}, {40, -2.0}, {90, -0.5}});
    CHECK(contingency(truth, doubled, 2) == ContingencyTable{3, 1, 96, 0});

    CHECK_THROWS_AS(contingency(truth, CoefficientVector(50, 0.0)), InvalidArgument);
}

TEST_CASE("contingency partitions the step indices") {
    std::mt19937_64 rng(31);
    std::bernoulli_distribution on(0.05);
    for (int k = 0; k < 300; ++k) {
        const std::size_t n = 20 + static_cast<std::size_t>(k);
        CoefficientVector a(n + 1, 0.0);
        CoefficientVector b(n + 1, 0.0);
        for (std::size_t j = 0; j <= n; ++j) {
            a[j] = on(rng) ? 1.0 : 0.0;
            b[j] = on(rng) ? -1.0 : 0.0;
        }
        for (const std::size_t tol : {0u, 3u}) {
            const ContingencyTable t = contingency(a, b, tol);
            CHECK(t.total() == n);
            if (tol == 0) {
                CHECK(t.tp + t.fn == static_cast<std::uint64_t>(std::count_if(a.begin() + 1, a.end(), [](double x) { return x != 0.0; })));
                CHECK(t.tp + t.fp == static_cast<std::uint64_t>(std::count_if(b.begin() + 1, b.end(), [](double x) { return x != 0.0; })));
            }
        }
    }
}

TEST_CASE("metrics") {
    const Metrics m = metrics(ContingencyTable{74814, 30525, 109892487, 2174});
    CHECK(*m.sensitivity == doctest::Approx(0.9718).epsilon(1e-4));
    CHECK(*m.specificity == doctest::Approx(0.9997).epsilon(1e-4));
    CHECK(*m.precision == doctest::Approx(74814.0 / 105339.0));

    const Metrics one = metrics(ContingencyTable{1, 0, 1, 0});
    CHECK(*one.sensitivity == 1.0);
    CHECK(*one.specificity == 1.0);
    CHECK(*one.accuracy == 1.0);
    CHECK(*one.precision == 1.0);

    const Metrics empty = metrics(ContingencyTable{0, 0, 5, 0});
    CHECK_FALSE(empty.sensitivity.has_value());
    CHECK_FALSE(empty.precision.has_value());
    CHECK(*empty.specificity == 1.0);
}

TEST_CASE("squared error norm") {
    const auto truth = make_beta(50, {{20, -2.0}});
    CHECK(squared_error_norm(truth, truth, 1.0 / 1024.0) == 0.0);
    auto missed = truth;
    missed[20] = 0.0;
    CHECK(squared_error_norm(truth, missed, 1.0 / 1024.0) == 4.0);
    auto slope_off = truth;
    slope_off[0] += 1024.0 * 0.001;
    CHECK(squared_error_norm(truth, slope_off, 1.0 / 1024.0) == doctest::Approx(1e-6));
}

TEST_CASE("fp distance histogram") {
    const auto truth = make_beta(400, {{100, -1.0}, {300, -1.0}});
    const auto hat = make_beta(400, {{100, -1.0}, {101, -0.2}, {160, -0.2}, {200, -0.2}, {399, -0.3}});
    const Histogram h = fp_distance_histogram(truth, hat);
    // distances 1, 60, 100, 99
    CHECK(h.counts == std::vector<std::uint64_t>{1, 2, 1});
    CHECK(h.total() == 4);
    CHECK(fp_distance_histogram(truth, truth).total() == 0);
    CHECK_THROWS_AS(fp_distance_histogram(CoefficientVector(401, 0.0), hat), InvalidArgument);
    CHECK_THROWS_AS(fp_distance_histogram(truth, hat, 0), InvalidArgument);

    Histogram a;
    a.add(10);
    Histogram b;
    b.add(120);
    a += b;
    CHECK(a.counts == std::vector<std::uint64_t>{1, 0, 1});
    Histogram c;
    c.bin_width = 10;
    CHECK_THROWS_AS(a += c, InvalidArgument);
}

TEST_CASE("derivative baseline") {
    Profile step{std::vector<double>(100, 0.0), 2.0};
    for (std::size_t i = 0; i < 100; ++i) {
        step.samples[i] = -0.001 * static_cast<double>(i) - (i >= 59 ? 1.5 : 0.0);   // sample 60 onwards
    }
    const EventList ev = derivative_baseline(step, 0.5);
    REQUIRE(ev.events.size() == 1);
    CHECK(ev.events[0].position_index == 60);
    CHECK(ev.events[0].position_m == 120.0);
    CHECK(ev.events[0].loss_db == doctest::Approx(1.501));
    CHECK(ev.slope_db_per_sample == doctest::Approx(-0.001));

    // a gain is reported with a negative loss
    Profile gain{{0.0, 0.0, 1.0, 1.0}, 1.0};
    const EventList g = derivative_baseline(gain, 0.5);
    REQUIRE(g.events.size() == 1);
    CHECK(g.events[0].loss_db == -1.0);

    const EventList quiet = derivative_baseline(Profile{std::vector<double>(50, -3.0), 1.0}, 0.5);
    CHECK(quiet.events.empty());
    CHECK(quiet.slope_db_per_sample == 0.0);
    CHECK_THROWS_AS(derivative_baseline(Profile{{1.0}, 1.0}, 0.5), InvalidArgument);

    const double sigma = 1.0 / 1024.0;
    const CoefficientVector beta = events_to_beta(ev, 100, sigma);
    CHECK(beta[60] == doctest::Approx(-1.501));
    CHECK(beta[0] * sigma == doctest::Approx(-0.001));
}

TEST_CASE("detectors by name") {
    AnalysisOptions o;
    CHECK(make_detector("lbi", o)->name() == "lbi");
    CHECK(make_detector("lbi-single", o)->name() == "lbi-single");
    CHECK(make_detector("derivative", o)->name() == "derivative");
    CHECK_THROWS_AS(make_detector("magic", o), InvalidArgument);
    CHECK_THROWS_AS(DerivativeDetector(0.0), InvalidArgument);
}

TEST_CASE("benchmark is independent of the worker count") {
    TestbenchSpec spec;
    spec.lengths = {300, 500};
    spec.profiles_per_length = 3;
    spec.min_separation = 20;
    AnalysisOptions o;
    const auto lbi = make_detector("lbi", o);
    const auto base = make_detector("derivative", o);
    const std::vector<const Detector*> dets{lbi.get(), base.get()};
    std::size_t calls = 0;
    BenchmarkOptions serial;
    serial.progress = [&](std::size_t done, std::size_t total) {
        ++calls;
        CHECK(done <= total);
    };
    const BenchmarkReport a = run_benchmark(spec, dets, serial);
    CHECK(calls == 6);
    BenchmarkOptions parallel;
    parallel.workers = 4;
    const BenchmarkReport b = run_benchmark(spec, dets, parallel);
    REQUIRE(a.detectors.size() == 2);
    for (std::size_t d = 0; d < 2; ++d) {
        REQUIRE(a.detectors[d].profiles.size() == 6);
        for (std::size_t k = 0; k < 6; ++k) {
            const ProfileOutcome& x = a.detectors[d].profiles[k];
            const ProfileOutcome& y = b.detectors[d].profiles[k];
            CHECK(x.table == y.table);
            CHECK(x.squared_error == y.squared_error);
            CHECK(x.fp_histogram == y.fp_histogram);
            CHECK(x.lambda_best == y.lambda_best);
            CHECK(x.iterations == y.iterations);
        }
        CHECK(a.detectors[d].overall.table == b.detectors[d].overall.table);
        CHECK(a.detectors[d].overall.profiles == 6);
        CHECK(a.detectors[d].lengths.size() == 2);
        CHECK(a.detectors[d].overall.table.total() == 3 * 300 + 3 * 500);
    }
}

TEST_CASE("benchmark records detector failures") {
    TestbenchSpec spec;
    spec.lengths = {200, 300};
    spec.profiles_per_length = 2;
    spec.min_separation = 10;
    const Throwing t;
    const BenchmarkReport r = run_benchmark(spec, {&t});
    const DetectorReport& d = r.detectors[0];
    CHECK(d.lengths[0].failures == 2);
    CHECK(d.lengths[1].failures == 0);
    CHECK(d.overall.failures == 2);
    CHECK(d.profiles[0].error == "boom");
    CHECK(d.overall.table.total() == 2 * 300);
    CHECK_THROWS_AS(run_benchmark(spec, {}), InvalidArgument);
}

}  // TEST_SUITE
