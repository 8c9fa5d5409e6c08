#include <doctest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "lbotdr/simulator.hpp"

using namespace lbotdr;

namespace {

double sample_std(const std::vector<double>& x) {
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double ss = 0.0;
    for (const double v : x) {
        ss += (v - mean) * (v - mean);
    }
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

Profile flat(std::size_t n, double level_db) { return Profile{std::vector<double>(n, level_db), 1.0}; }

NoiseSpec no_crn() {
    NoiseSpec s;
    s.delta_nu_hz = std::numeric_limits<double>::infinity();
    return s;
}

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("clean profile: attenuation ramp") {
    FiberSpec f;
    f.n_samples = 5000;
    const CleanProfile c = synth_clean_profile(f, DictionaryShape::for_samples(5000));
    CHECK(c.profile.samples.back() == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(c.profile.samples.front() == doctest::Approx(-0.0002).epsilon(1e-12));
    CHECK(c.beta[0] == doctest::Approx(-0.0002 * 1024.0));
}

TEST_CASE("clean profile: one step") {
    FiberSpec f;
    f.n_samples = 200;
    f.attenuation_db_per_km = 0.0;
    f.events = {{100, 3.0}};
    const CleanProfile c = synth_clean_profile(f, DictionaryShape::for_samples(200));
    CHECK(c.beta[100] == -3.0);
    CHECK(c.profile.samples[98] == 0.0);     // sample 99
    CHECK(c.profile.samples[99] == -3.0);    // sample 100
    CHECK(c.profile.samples[199] == -3.0);
}

TEST_CASE("fiber validation") {
    FiberSpec f;
    f.n_samples = 10;
    f.events = {{1, 1.0}};
    CHECK_THROWS_AS(f.validate(), InvalidArgument);
    f.events = {{11, 1.0}};
    CHECK_THROWS_AS(f.validate(), InvalidArgument);
    f.events = {{5, 1.0}, {5, 2.0}};
    CHECK_THROWS_AS(f.validate(), InvalidArgument);
    f.events = {{5, -1.0}};
    CHECK_THROWS_AS(f.validate(), InvalidArgument);
    f.events = {{2, 1.0}, {10, 2.0}};
    CHECK_NOTHROW(f.validate());
    CHECK_THROWS_AS(synth_clean_profile(f, DictionaryShape::for_samples(12)), InvalidArgument);
}

TEST_CASE("counting noise vanishes at high photon counts") {
    NoiseSpec s = no_crn();
    s.c0 = 1e12;
    std::mt19937_64 rng(1);
    FiberSpec f;
    f.n_samples = 2000;
    f.events = {{700, 2.0}};
    const CleanProfile c = synth_clean_profile(f, DictionaryShape::for_samples(2000));
    const Profile noisy = add_measurement_noise(c.profile, s, rng);
    for (std::size_t i = 0; i < noisy.size(); ++i) {
        CHECK(std::fabs(noisy.samples[i] - c.profile.samples[i]) < 0.01);
    }
}

TEST_CASE("counting noise spread") {
    NoiseSpec s = no_crn();
    s.c0 = 1e4;
    std::mt19937_64 rng(2);
    const Profile noisy = add_counting_noise(flat(100000, 0.0), s, rng);
    // 10 log10(e) / sqrt(C)
    CHECK(sample_std(noisy.samples) == doctest::Approx(0.0434).epsilon(0.10));

    s.c0 = 10.0;
    NoiseDiagnostics diag;
    const Profile dim = add_counting_noise(flat(100000, 0.0), s, rng, &diag);
    CHECK(sample_std(dim.samples) == doctest::Approx(1.4).epsilon(0.15));
    CHECK(diag.clamped_samples > 0);   // P(k = 0) = e^-10, about 5 in 1e5
    for (const double v : dim.samples) {
        CHECK(std::isfinite(v));
    }
}

TEST_CASE("CRN scale") {
    NoiseSpec s;
    s.delta_nu_hz = 1e11;
    CHECK(s.sigma_crn(1e4) == doctest::Approx(2.236e-4).epsilon(1e-3));
    s.delta_nu_hz = 1e5;
    CHECK(s.sigma_crn(1e4) == doctest::Approx(0.2236).epsilon(1e-3));
    s.delta_z_m = 2.5e3;
    CHECK(s.sigma_crn(1e4) == doctest::Approx(0.4472).epsilon(1e-3));
    CHECK(no_crn().sigma_crn(1e4) == 0.0);
}

TEST_CASE("zero CRN leaves the trace untouched in every domain") {
    for (const CrnDomain d : {CrnDomain::Counts, CrnDomain::LinearPower, CrnDomain::Decibel}) {
        NoiseSpec s = no_crn();
        s.crn_domain = d;
        std::mt19937_64 rng(3);
        const Profile in{{-1.0, -2.5, -3.25}, 1.0};
        CHECK(add_crn(in, s, rng).samples == in.samples);
    }
}

TEST_CASE("CRN in the dB domain has the configured spread") {
    NoiseSpec s;
    s.crn_domain = CrnDomain::Decibel;
    s.delta_z_m = 1e4;   // sigma 0.2236 dB
    std::mt19937_64 rng(4);
    const Profile out = add_crn(flat(100000, -3.0), s, rng);
    CHECK(sample_std(out.samples) == doctest::Approx(0.2236).epsilon(0.02));
}

TEST_CASE("testbench cases are reproducible and well formed") {
    TestbenchSpec spec;
    spec.lengths = {300, 500};
    spec.profiles_per_length = 4;
    spec.min_separation = 20;
    const TestbenchCase a = make_testbench_case(spec, 1, 2);
    const TestbenchCase b = make_testbench_case(spec, 1, 2);
    CHECK(a.noisy.samples == b.noisy.samples);
    CHECK(a.beta_true == b.beta_true);
    const TestbenchCase other = make_testbench_case(spec, 1, 3);
    CHECK(other.noisy.samples != a.noisy.samples);
    spec.seed = 2;
    CHECK(make_testbench_case(spec, 1, 2).noisy.samples != a.noisy.samples);
    spec.seed = 1;

    std::size_t seen = 0;
    random_testbench(spec, [&](TestbenchCase&& c) {
        const std::size_t n = spec.lengths[c.length_index];
        CHECK(c.noisy.size() == n);
        CHECK(c.beta_true.size() == n + 1);
        REQUIRE(c.fiber.events.size() == 5);
        for (std::size_t k = 0; k < 5; ++k) {
            const FaultEvent& e = c.fiber.events[k];
            CHECK(e.loss_db >= 0.5);
            CHECK(e.loss_db <= 5.0);
            CHECK(c.beta_true[e.position] == -e.loss_db);
            if (k > 0) {
                CHECK(e.position - c.fiber.events[k - 1].position >= 20);
            }
        }
        ++seen;
    });
    CHECK(seen == 8);
    CHECK(TestbenchSpec::full_scale().total_profiles() == 11000);
    CHECK(TestbenchSpec::desk_scale().total_profiles() == 150);
}

TEST_CASE("position draws") {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 200; ++k) {
        const auto p = draw_positions(200, 5, 10, rng);
        REQUIRE(p.size() == 5);
        CHECK(p.front() >= 2);
        CHECK(p.back() <= 200);
        for (std::size_t i = 1; i < p.size(); ++i) {
            CHECK(p[i] - p[i - 1] >= 10);
        }
    }
    CHECK_THROWS_AS(draw_positions(60, 7, 10, rng), InvalidArgument);
    CHECK(draw_positions(60, 0, 10, rng).empty());

    TestbenchSpec spec;
    spec.lengths = {30};
    spec.faults_per_profile = 5;
    spec.min_separation = 10;
    CHECK_THROWS_AS(spec.validate(), InvalidArgument);
}

}  // TEST_SUITE
