// lbotdr command-line front end: analyze, simulate, benchmark.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lbotdr/dictionary.hpp"
#include "lbotdr/evaluation.hpp"
#include "lbotdr/io.hpp"
#include "lbotdr/kernels.hpp"
#include "lbotdr/model_selection.hpp"
#include "lbotdr/simulator.hpp"

namespace fs = std::filesystem;
using namespace lbotdr;

namespace {

enum ExitCode : int {
    kOk = 0,
    kUnreadable = 2,   // missing input or unwritable output
    kSchema = 3,
    kNonFinite = 4,
    kConfig = 5,
    kRuntime = 6,
};

struct SolverFlags {
    double epsilon_min = 0.125;
    double sigma = DictionaryShape::kDefaultSigma;
    double peak_threshold = 0.02;
    std::size_t max_iterations = 0;
    std::size_t sweeps = 400;
    bool no_grid = false;
    std::size_t grid_size = LambdaSchedule::kDefaultSize;
    std::string kernel;

    void add(CLI::App& app) {
        app.add_option("--epsilon-min", epsilon_min, "Minimum detectable loss in dB")->capture_default_str();
        app.add_option("--sigma", sigma, "Slope column scale (power of two)")->capture_default_str();
        app.add_option("--peak-threshold", peak_threshold, "Peak threshold on |beta|")->capture_default_str();
        app.add_option("--max-iterations", max_iterations, "Row-update budget, 0 = sweeps * n")->capture_default_str();
        app.add_option("--sweeps", sweeps, "Default budget in sweeps")->capture_default_str();
        app.add_flag("--no-lambda-grid", no_grid, "Single run at lambda = 0.5");
        app.add_option("--grid-size", grid_size, "Number of lambda values")->capture_default_str();
        app.add_option("--kernel", kernel, "Kernel set (scalar, avx2, avx512, neon)")->envname("LBOTDR_KERNEL");
    }

    AnalysisOptions options() const {
        AnalysisOptions o;
        o.solver.epsilon_min = epsilon_min;
        o.solver.sigma = sigma;
        o.solver.peak_threshold = peak_threshold;
        o.solver.max_iterations = max_iterations;
        o.solver.default_sweeps = sweeps;
        o.lambda_grid = !no_grid;
        o.grid_size = grid_size;
        return o;
    }

    const kernels::KernelSet& kernel_set() const { return kernel.empty() ? kernels::best() : kernels::by_name(kernel); }
};

struct BenchFlags {
    std::vector<std::size_t> lengths{5000, 10000, 15000};
    std::size_t profiles = 50;
    std::size_t faults = 5;
    double loss_min = 0.5;
    double loss_max = 5.0;
    std::size_t min_separation = 2;
    double spacing = 1.0;
    double attenuation = 0.2;
    double c0 = 1e5;
    double delta_nu = 1e5;
    double delta_z = 0.0;
    std::string crn_domain = "counts";
    std::uint64_t seed = 1;

    void add(CLI::App& app) {
        app.add_option("--lengths", lengths, "Profile lengths in samples")->delimiter(',')->capture_default_str();
        app.add_option("--profiles", profiles, "Profiles per length")->capture_default_str();
        app.add_option("--faults", faults, "Faults per profile")->capture_default_str();
        app.add_option("--loss-min", loss_min, "Smallest fault loss in dB")->capture_default_str();
        app.add_option("--loss-max", loss_max, "Largest fault loss in dB")->capture_default_str();
        app.add_option("--min-separation", min_separation, "Minimum fault separation in samples")
            ->capture_default_str();
        app.add_option("--spacing", spacing, "Sample spacing in m")->capture_default_str();
        app.add_option("--attenuation", attenuation, "Fiber attenuation in dB/km")->capture_default_str();
        app.add_option("--c0", c0, "Photon counts at the fiber start")->capture_default_str();
        app.add_option("--delta-nu", delta_nu, "Source linewidth in Hz")->capture_default_str();
        app.add_option("--delta-z", delta_z, "CRN length scale in m, 0 = fiber length")->capture_default_str();
        app.add_option("--crn-domain", crn_domain, "Where CRN enters: counts, linear_power, db")
            ->check(CLI::IsMember({"counts", "linear_power", "db"}))
            ->capture_default_str();
        app.add_option("--seed", seed, "Random seed")->envname("LBOTDR_SEED")->capture_default_str();
    }

    TestbenchSpec spec(double sigma) const {
        TestbenchSpec s;
        s.lengths = lengths;
        s.profiles_per_length = profiles;
        s.faults_per_profile = faults;
        s.min_loss_db = loss_min;
        s.max_loss_db = loss_max;
        s.min_separation = min_separation;
        s.sample_spacing_m = spacing;
        s.attenuation_db_per_km = attenuation;
        s.sigma = sigma;
        s.seed = seed;
        s.noise.c0 = c0;
        s.noise.delta_nu_hz = delta_nu;
        s.noise.delta_z_m = delta_z;
        s.noise.crn_domain = crn_domain == "linear_power" ? CrnDomain::LinearPower
                             : crn_domain == "db"         ? CrnDomain::Decibel
                                                          : CrnDomain::Counts;
        s.noise.rng_seed = seed;
        return s;
    }
};

fs::path sibling(const fs::path& p, const std::string& suffix) {
    fs::path out = p;
    out.replace_extension();
    return fs::path(out.string() + suffix);
}

int cmd_analyze(const fs::path& input, const fs::path& output, std::optional<fs::path> fit_path,
                const SolverFlags& flags) {
    const io::ProfileFile file = io::read_profile(input);
    const AnalysisOptions options = flags.options();
    const kernels::KernelSet& ks = flags.kernel_set();

    const auto start = std::chrono::steady_clock::now();
    const Analysis a = analyze(file.profile, options, ks);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    io::EventFileMetadata meta;
    meta.detector = options.lambda_grid ? "lbi" : "lbi-single";
    meta.lambda_best = a.lambda_best;
    meta.first_iterations = a.first_iterations;
    meta.total_iterations = a.total_iterations;
    meta.elapsed_seconds = elapsed;
    meta.kernel = std::string(ks.name);
    io::write_json(output, io::to_json(a.events, file.profile.sample_spacing_m, meta));

    io::ProfileFile fit;
    fit.profile.sample_spacing_m = file.profile.sample_spacing_m;
    fit.profile.samples = apply_dictionary(DictionaryShape::for_samples(file.profile.size(), options.solver.sigma), a.beta);
    io::write_profile(fit_path ? *fit_path : sibling(output, ".fit.txt"), fit);

    std::cerr << a.events.events.size() << " events, lambda_best=" << a.lambda_best
              << ", N_c=" << a.first_iterations << ", " << elapsed << " s\n";
    return kOk;
}

std::vector<FaultEvent> parse_event_flags(const std::vector<std::string>& items) {
    std::vector<FaultEvent> out;
    for (const std::string& item : items) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            throw InvalidArgument("event '" + item + "' must look like POSITION:LOSS_DB");
        }
        try {
            out.push_back(FaultEvent{std::stoul(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
        } catch (const std::logic_error&) {
            throw InvalidArgument("event '" + item + "' must look like POSITION:LOSS_DB");
        }
    }
    return out;
}

int cmd_simulate(const BenchFlags& bench, double sigma, const std::vector<std::string>& event_items, bool noiseless,
                 const fs::path& out_dir) {
    fs::create_directories(out_dir);
    auto write_case = [&](const std::string& stem, const FiberSpec& fiber, const Profile& profile) {
        io::GroundTruth truth;
        truth.fiber = fiber;
        truth.sigma = sigma;
        const std::string truth_name = stem + ".truth.json";
        io::write_json(out_dir / truth_name, io::to_json(truth));
        io::write_profile(out_dir / (stem + ".txt"), io::ProfileFile{profile, truth_name});
    };

    TestbenchSpec spec = bench.spec(sigma);
    if (!event_items.empty()) {
        // explicit fiber: one profile per requested length
        std::size_t count = 0;
        for (const std::size_t n : spec.lengths) {
            FiberSpec fiber;
            fiber.n_samples = n;
            fiber.sample_spacing_m = spec.sample_spacing_m;
            fiber.attenuation_db_per_km = spec.attenuation_db_per_km;
            fiber.events = parse_event_flags(event_items);
            const CleanProfile clean = synth_clean_profile(fiber, DictionaryShape::for_samples(n, sigma));
            Profile profile = clean.profile;
            if (!noiseless) {
                std::mt19937_64 rng = case_rng(spec.seed, n, 0);
                profile = add_measurement_noise(clean.profile, spec.noise, rng);
            }
            write_case("profile-" + std::to_string(n), fiber, profile);
            ++count;
        }
        std::cerr << "wrote " << count << " profiles to " << out_dir << '\n';
        return kOk;
    }

    spec.validate();
    std::size_t count = 0;
    for (std::size_t li = 0; li < spec.lengths.size(); ++li) {
        for (std::size_t r = 0; r < spec.profiles_per_length; ++r) {
            TestbenchCase tc = make_testbench_case(spec, li, r);
            Profile profile = tc.noisy;
            if (noiseless) {
                profile = synth_clean_profile(tc.fiber, DictionaryShape::for_samples(tc.fiber.n_samples, sigma)).profile;
            }
            char stem[64];
            std::snprintf(stem, sizeof stem, "profile-%zu-%04zu", tc.fiber.n_samples, r);
            write_case(stem, tc.fiber, profile);
            ++count;
        }
    }
    std::cerr << "wrote " << count << " profiles to " << out_dir << '\n';
    return kOk;
}

std::string opt_str(const std::optional<double>& v) {
    if (!v) {
        return "";
    }
    std::ostringstream ss;
    ss.precision(17);
    ss << *v;
    return ss.str();
}

int cmd_benchmark(const BenchFlags& bench, const SolverFlags& solver, const std::vector<std::string>& detector_names,
                  double baseline_threshold, std::size_t workers, const fs::path& out_dir) {
    if (detector_names.empty()) {
        throw InvalidArgument("at least one detector is required");
    }
    const TestbenchSpec spec = bench.spec(solver.sigma);
    const kernels::KernelSet& ks = solver.kernel_set();
    std::vector<std::unique_ptr<Detector>> owned;
    std::vector<const Detector*> detectors;
    for (const std::string& name : detector_names) {
        owned.push_back(make_detector(name, solver.options(), baseline_threshold, ks));
        detectors.push_back(owned.back().get());
    }
    BenchmarkOptions options;
    options.workers = workers;
    options.progress = [](std::size_t done, std::size_t total) {
        if (done % 10 == 0 || done == total) {
            std::cerr << "\r" << done << "/" << total << std::flush;
        }
    };
    const BenchmarkReport report = run_benchmark(spec, detectors, options);
    std::cerr << '\n';

    fs::create_directories(out_dir);
    io::write_json(out_dir / "report.json", io::to_json(report, true));

    std::ostringstream err, time, hist;
    err << "detector,length,mean_squared_error\n";
    time << "detector,length,mean_seconds\n";
    hist << "detector,bin_start,bin_end,count\n";
    std::size_t failures = 0;
    std::size_t attempts = 0;
    for (const DetectorReport& d : report.detectors) {
        for (const LengthSummary& l : d.lengths) {
            err << d.detector << ',' << l.length << ',' << opt_str(l.mean_squared_error) << '\n';
            time << d.detector << ',' << l.length << ',' << opt_str(l.mean_seconds) << '\n';
        }
        const Histogram& h = d.overall.fp_histogram;
        for (std::size_t k = 0; k < h.counts.size(); ++k) {
            hist << d.detector << ',' << k * h.bin_width << ',' << (k + 1) * h.bin_width << ',' << h.counts[k] << '\n';
        }
        failures += d.overall.failures;
        attempts += d.overall.profiles;
        const Metrics& m = d.overall.metrics;
        std::cerr << d.detector << ": sensitivity=" << opt_str(m.sensitivity)
                  << " specificity=" << opt_str(m.specificity) << " precision=" << opt_str(m.precision)
                  << " mse=" << d.overall.mean_squared_error << " mean_s=" << d.overall.mean_seconds
                  << " failures=" << d.overall.failures << '\n';
    }
    io::write_text(out_dir / "error_vs_length.csv", err.str());
    io::write_text(out_dir / "time_vs_length.csv", time.str());
    io::write_text(out_dir / "fp_histogram.csv", hist.str());
    if (failures > 0) {
        std::cerr << failures << " of " << attempts << " detector runs failed\n";
    }
    return failures == attempts ? kRuntime : kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trend-break detection for OTDR profiles"};
    app.require_subcommand(1);

    SolverFlags solver_flags;
    BenchFlags bench_flags;

    auto* analyze_cmd = app.add_subcommand("analyze", "Detect events in a profile file");
    std::string input;
    std::string output;
    std::string fit_path;
    analyze_cmd->add_option("input", input, "Profile file")->required();
    analyze_cmd->add_option("-o,--output", output, "Event list JSON")->required();
    analyze_cmd->add_option("--fit", fit_path, "Reconstructed profile path (default: <output>.fit.txt)");
    solver_flags.add(*analyze_cmd);

    auto* simulate_cmd = app.add_subcommand("simulate", "Write synthetic profiles and ground truth");
    std::string sim_out;
    std::vector<std::string> event_items;
    bool noiseless = false;
    double sim_sigma = DictionaryShape::kDefaultSigma;
    bench_flags.add(*simulate_cmd);
    simulate_cmd->add_option("--event", event_items, "Fixed event POSITION:LOSS_DB (repeatable)");
    simulate_cmd->add_flag("--noiseless", noiseless, "Skip counting noise and CRN");
    simulate_cmd->add_option("--sigma", sim_sigma, "Slope column scale")->capture_default_str();
    simulate_cmd->add_option("-o,--out-dir", sim_out, "Output directory")->required();

    auto* bench_cmd = app.add_subcommand("benchmark", "Score detectors on a synthetic testbench");
    BenchFlags bench_flags2;
    SolverFlags solver_flags2;
    std::vector<std::string> detector_names{"lbi", "derivative"};
    double baseline_threshold = DerivativeDetector::kDefaultThresholdDb;
    std::size_t workers = 1;
    std::string bench_out;
    bench_flags2.add(*bench_cmd);
    solver_flags2.add(*bench_cmd);
    bench_cmd->add_option("--detectors", detector_names, "lbi, lbi-single, derivative")
        ->delimiter(',')
        ->capture_default_str();
    bench_cmd->add_option("--baseline-threshold", baseline_threshold, "Derivative detector threshold in dB")
        ->capture_default_str();
    bench_cmd->add_option("--workers", workers, "Worker threads")->envname("LBOTDR_WORKERS")->capture_default_str();
    bench_cmd->add_option("-o,--out-dir", bench_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*analyze_cmd) {
            return cmd_analyze(input, output, fit_path.empty() ? std::nullopt : std::optional<fs::path>(fit_path),
                               solver_flags);
        }
        if (*simulate_cmd) {
            return cmd_simulate(bench_flags, sim_sigma, event_items, noiseless, sim_out);
        }
        if (*bench_cmd) {
            return cmd_benchmark(bench_flags2, solver_flags2, detector_names, baseline_threshold, workers, bench_out);
        }
    } catch (const io::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        switch (e.kind()) {
            case io::ErrorKind::Schema:
                return kSchema;
            case io::ErrorKind::NonFinite:
                return kNonFinite;
            default:
                return kUnreadable;
        }
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kConfig;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUnreadable;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
    return kOk;
}
