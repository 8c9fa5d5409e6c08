#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "lbotdr/io.hpp"
#include "test_support.hpp"

using namespace lbotdr;
namespace fs = std::filesystem;

namespace {

io::ErrorKind kind_of(const std::string& text) {
    std::istringstream in(text);
    try {
        io::parse_profile(in);
    } catch (const io::IoError& e) {
        return e.kind();
    }
    FAIL("expected an IoError");
    return io::ErrorKind::Unreadable;
}

const char* kHeader = "# format: lbotdr-profile v1\n# sample_spacing_m: 0.5\n# units: dB\n";

fs::path scratch_dir() {
    const fs::path d = fs::temp_directory_path() / "lbotdr-io-test";
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("profile round trip is exact") {
    std::mt19937_64 rng(41);
    io::ProfileFile f;
    f.profile.samples = test::random_vector(1000, rng, 5.0);
    f.profile.sample_spacing_m = 0.5;
    f.ground_truth = "x.truth.json";
    std::stringstream ss;
    io::write_profile(ss, f);
    const io::ProfileFile g = io::parse_profile(ss);
    CHECK(g.profile.samples == f.profile.samples);
    CHECK(g.profile.sample_spacing_m == 0.5);
    CHECK(g.ground_truth == f.ground_truth);

    const fs::path p = scratch_dir() / "rt.txt";
    io::write_profile(p, f);
    CHECK(io::read_profile(p).profile.samples == f.profile.samples);
}

TEST_CASE("profile schema errors") {
    CHECK(kind_of("1\n2\n") == io::ErrorKind::Schema);   // no header
    CHECK(kind_of(std::string(kHeader) + "# n_samples: 3\n1\n2\n") == io::ErrorKind::Schema);
    CHECK(kind_of(std::string(kHeader) + "# n_samples: 1\n1\n") == io::ErrorKind::Schema);
    CHECK(kind_of(std::string(kHeader) + "# n_samples: 2\n1\nabc\n") == io::ErrorKind::Schema);
    CHECK(kind_of(std::string(kHeader) + "1\n2\n") == io::ErrorKind::Schema);   // no n_samples
    CHECK(kind_of("# format: lbotdr-profile v1\n# sample_spacing_m: 1\n# n_samples: 2\n# units: mW\n1\n2\n") ==
          io::ErrorKind::Schema);
    CHECK(kind_of("# format: lbotdr-profile v2\n# sample_spacing_m: 1\n# n_samples: 2\n1\n2\n") ==
          io::ErrorKind::Schema);
    CHECK(kind_of("# format: lbotdr-profile v1\n# sample_spacing_m: -1\n# n_samples: 2\n1\n2\n") ==
          io::ErrorKind::Schema);
}

TEST_CASE("non-finite samples") {
    CHECK(kind_of(std::string(kHeader) + "# n_samples: 2\n1\nnan\n") == io::ErrorKind::NonFinite);
    CHECK(kind_of(std::string(kHeader) + "# n_samples: 2\ninf\n1\n") == io::ErrorKind::NonFinite);
}

TEST_CASE("comments and blank lines") {
    std::istringstream in(std::string(kHeader) + "# n_samples: 3\n\n1\n  2  \n3\n# trailing note\n");
    CHECK(io::parse_profile(in).profile.samples == std::vector<double>{1, 2, 3});
}

TEST_CASE("unreadable and unwritable paths") {
    try {
        io::read_profile("/nonexistent/dir/profile.txt");
        FAIL("no throw");
    } catch (const io::IoError& e) {
        CHECK(e.kind() == io::ErrorKind::Unreadable);
    }
    try {
        io::write_text("/nonexistent/dir/out.json", "{}");
        FAIL("no throw");
    } catch (const io::IoError& e) {
        CHECK(e.kind() == io::ErrorKind::Unwritable);
    }
    const fs::path bad = scratch_dir() / "bad.json";
    io::write_text(bad, "{not json");
    try {
        io::read_json(bad);
        FAIL("no throw");
    } catch (const io::IoError& e) {
        CHECK(e.kind() == io::ErrorKind::Schema);
    }
}

TEST_CASE("ground truth round trip") {
    io::GroundTruth t;
    t.fiber.n_samples = 500;
    t.fiber.sample_spacing_m = 2.0;
    t.fiber.events = {{50, 1.25}, {400, 3.0}};
    t.sigma = 1.0 / 256.0;
    const io::GroundTruth u = io::ground_truth_from_json(io::to_json(t));
    CHECK(u.fiber.n_samples == 500);
    CHECK(u.fiber.events.size() == 2);
    CHECK(u.fiber.events[1].position == 400);
    CHECK(u.beta.size() == 501);
    CHECK(u.beta[50] == -1.25);
    CHECK(u.beta[0] == doctest::Approx(-0.0004 * 256.0));

    nlohmann::json j = io::to_json(t);
    j["format"] = "something else";
    CHECK_THROWS_AS(io::ground_truth_from_json(j), io::IoError);
    j = io::to_json(t);
    j["events"][0]["position_index"] = 9999;
    CHECK_THROWS_AS(io::ground_truth_from_json(j), io::IoError);
    j.erase("n_samples");
    CHECK_THROWS_AS(io::ground_truth_from_json(j), io::IoError);
}

TEST_CASE("event list round trip") {
    EventList e;
    e.slope_db_per_sample = -0.0004;
    e.events = {{10, 20.0, 1.5}, {30, 60.0, 0.25}};
    io::EventFileMetadata meta;
    meta.lambda_best = 0.5;
    meta.first_iterations = 100;
    meta.total_iterations = 120;
    const nlohmann::json j = io::to_json(e, 2.0, meta);
    CHECK(j["format"] == io::kEventsFormat);
    CHECK(j["slope_db_per_km"].get<double>() == doctest::Approx(-0.2));
    CHECK(j["solver"]["lambda_best"] == 0.5);
    CHECK_FALSE(j["solver"].contains("elapsed_seconds"));
    double spacing = 0.0;
    const EventList back = io::event_list_from_json(j, &spacing);
    CHECK(spacing == 2.0);
    REQUIRE(back.events.size() == 2);
    CHECK(back.events[1].position_index == 30);
    CHECK(back.events[1].loss_db == 0.25);
    CHECK(back.slope_db_per_sample == doctest::Approx(-0.0004));

    nlohmann::json swapped = j;
    std::swap(swapped["events"][0], swapped["events"][1]);
    CHECK_THROWS_AS(io::event_list_from_json(swapped), io::IoError);
}

TEST_CASE("report JSON without timing is reproducible") {
    TestbenchSpec spec;
    spec.lengths = {200};
    spec.profiles_per_length = 2;
    spec.min_separation = 10;
    const DerivativeDetector d;
    const BenchmarkReport a = run_benchmark(spec, {&d});
    const BenchmarkReport b = run_benchmark(spec, {&d});
    CHECK(io::to_json(a, false).dump() == io::to_json(b, false).dump());
    const nlohmann::json timed = io::to_json(a, true);
    CHECK(timed.contains("kernel"));
    CHECK(timed["detectors"][0]["profiles"][0].contains("seconds"));
    CHECK_FALSE(io::to_json(a, false)["detectors"][0]["profiles"][0].contains("seconds"));
    CHECK(timed["format"] == io::kReportFormat);
}

}  // TEST_SUITE
