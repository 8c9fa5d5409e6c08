#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "lbotdr/io.hpp"

using namespace lbotdr;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + std::string(LBOTDR_CLI_PATH) + " " + args + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / "lbotdr-cli-test" / name;
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("noiseless simulate then analyze recovers the events") {
    const fs::path d = fresh_dir("roundtrip");
    REQUIRE(run("simulate --lengths 1500 --noiseless --event 300:2.5 --event 900:0.75 -o " + d.string()) == 0);
    const fs::path profile = d / "profile-1500.txt";
    REQUIRE(fs::exists(profile));
    REQUIRE(fs::exists(d / "profile-1500.truth.json"));
    CHECK(io::read_profile(profile).ground_truth == "profile-1500.truth.json");

    REQUIRE(run("analyze " + profile.string() + " -o " + (d / "events.json").string()) == 0);
    const EventList ev = io::event_list_from_json(io::read_json(d / "events.json"));
    REQUIRE(ev.events.size() == 2);
    CHECK(ev.events[0].position_index == 300);
    CHECK(ev.events[0].loss_db == doctest::Approx(2.5).epsilon(1e-6));
    CHECK(ev.events[1].position_index == 900);
    CHECK(ev.events[1].loss_db == doctest::Approx(0.75).epsilon(1e-6));
    CHECK(ev.slope_db_per_sample == doctest::Approx(-0.0002).epsilon(1e-6));
    CHECK(fs::exists(d / "events.fit.txt"));

    REQUIRE(run("analyze " + profile.string() + " --no-lambda-grid -o " + (d / "single.json").string()) == 0);
    const auto j = io::read_json(d / "single.json");
    CHECK(j["solver"]["lambda_best"] == 0.5);
    CHECK(j["solver"]["detector"] == "lbi-single");
}

TEST_CASE("testbench simulate is seeded") {
    const fs::path a = fresh_dir("seed-a");
    const fs::path b = fresh_dir("seed-b");
    const fs::path c = fresh_dir("seed-c");
    REQUIRE(run("simulate --lengths 400 --profiles 2 --seed 7 -o " + a.string()) == 0);
    REQUIRE(run("simulate --lengths 400 --profiles 2 -o " + b.string(), "LBOTDR_SEED=7") == 0);
    REQUIRE(run("simulate --lengths 400 --profiles 2 --seed 8 -o " + c.string()) == 0);
    CHECK(fs::exists(a / "profile-400-0001.txt"));
    CHECK(slurp(a / "profile-400-0001.txt") == slurp(b / "profile-400-0001.txt"));
    CHECK(slurp(a / "profile-400-0001.txt") != slurp(c / "profile-400-0001.txt"));
}

TEST_CASE("benchmark writes its artifacts") {
    const fs::path d = fresh_dir("bench");
    REQUIRE(run("benchmark --lengths 300 --profiles 2 --min-separation 10 --detectors derivative -o " + d.string(),
                "LBOTDR_WORKERS=2") == 0);
    for (const char* name : {"report.json", "error_vs_length.csv", "time_vs_length.csv", "fp_histogram.csv"}) {
        CHECK(fs::exists(d / name));
    }
    CHECK(io::read_json(d / "report.json")["format"] == io::kReportFormat);
}

TEST_CASE("exit codes") {
    const fs::path d = fresh_dir("codes");
    const std::string out = " -o " + (d / "o.json").string();
    CHECK(run("analyze /nonexistent/p.txt" + out) == 2);

    std::ofstream(d / "schema.txt") << "# format: lbotdr-profile v1\n# sample_spacing_m: 1\n# n_samples: 5\n1\n2\n";
    CHECK(run("analyze " + (d / "schema.txt").string() + out) == 3);

    std::ofstream(d / "nan.txt") << "# format: lbotdr-profile v1\n# sample_spacing_m: 1\n# n_samples: 3\n1\nnan\n2\n";
    CHECK(run("analyze " + (d / "nan.txt").string() + out) == 4);

    std::ofstream(d / "ok.txt") << "# format: lbotdr-profile v1\n# sample_spacing_m: 1\n# n_samples: 3\n0\n0\n-1\n";
    CHECK(run("analyze " + (d / "ok.txt").string() + out) == 0);
    CHECK(run("analyze " + (d / "ok.txt").string() + " -o /nonexistent/dir/o.json") == 2);
    CHECK(run("analyze " + (d / "ok.txt").string() + out + " --epsilon-min -1") == 5);
    CHECK(run("analyze " + (d / "ok.txt").string() + out + " --kernel nope") == 5);
    CHECK(run("frobnicate") == 5);
    CHECK(run("analyze") == 5);
    CHECK(run("simulate --event 0:1 --lengths 100 -o " + d.string()) == 5);
    CHECK(run("--help") == 0);
}

}  // TEST_SUITE
