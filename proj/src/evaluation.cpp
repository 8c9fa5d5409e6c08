#include "lbotdr/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

namespace lbotdr {

ContingencyTable& ContingencyTable::operator+=(const ContingencyTable& other) noexcept {
    tp += other.tp;
    fp += other.fp;
    tn += other.tn;
    fn += other.fn;
    return *this;
}

namespace {

std::vector<std::size_t> step_support(std::span<const double> beta) {
    std::vector<std::size_t> out;
    for (std::size_t j = 1; j < beta.size(); ++j) {
        if (beta[j] != 0.0) {
            out.push_back(j);
        }
    }
    return out;
}

void require_same_length(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw InvalidArgument("coefficient vectors differ in length");
    }
}

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
    if (den == 0) {
        return std::nullopt;
    }
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

ContingencyTable contingency(std::span<const double> beta_true, std::span<const double> beta_hat,
                             std::size_t tolerance) {
    require_same_length(beta_true, beta_hat);
    if (beta_true.size() < 2) {
        throw InvalidArgument("coefficient vectors need a slope and at least one step entry");
    }
    const std::uint64_t candidates = beta_true.size() - 1;
    ContingencyTable t;
    if (tolerance == 0) {
        for (std::size_t j = 1; j < beta_true.size(); ++j) {
            const bool truth = beta_true[j] != 0.0;
            const bool hit = beta_hat[j] != 0.0;
            if (truth && hit) {
                ++t.tp;
            } else if (hit) {
                ++t.fp;
            } else if (truth) {
                ++t.fn;
            } else {
                ++t.tn;
            }
        }
        return t;
    }

    const std::vector<std::size_t> truth = step_support(beta_true);
    const std::vector<std::size_t> hits = step_support(beta_hat);
    std::vector<bool> used(truth.size(), false);
    for (const std::size_t h : hits) {
        std::size_t best = truth.size();
        std::size_t best_distance = tolerance + 1;
        for (std::size_t k = 0; k < truth.size(); ++k) {
            const std::size_t d = h > truth[k] ? h - truth[k] : truth[k] - h;
            if (!used[k] && d < best_distance) {
                best = k;
                best_distance = d;
            }
        }
        if (best < truth.size()) {
            used[best] = true;
            ++t.tp;
        } else {
            ++t.fp;
        }
    }
    t.fn = truth.size() - t.tp;
    // keep the partition identity; a window can only shrink the positive set
    t.tn = candidates - t.tp - t.fp - t.fn;
    return t;
}

Metrics metrics(const ContingencyTable& t) {
    Metrics m;
    m.sensitivity = ratio(t.tp, t.tp + t.fn);
    m.specificity = ratio(t.tn, t.tn + t.fp);
    m.accuracy = ratio(t.tp + t.tn, t.total());
    m.precision = ratio(t.tp, t.tp + t.fp);
    return m;
}

double squared_error_norm(std::span<const double> beta_true, std::span<const double> beta_hat, double sigma) {
    require_same_length(beta_true, beta_hat);
    double sum = 0.0;
    for (std::size_t j = 0; j < beta_true.size(); ++j) {
        const double scale = j == 0 ? sigma : 1.0;
        const double d = scale * (beta_true[j] - beta_hat[j]);
        sum += d * d;
    }
    return sum;
}

std::uint64_t Histogram::total() const noexcept {
    std::uint64_t s = 0;
    for (const auto c : counts) {
        s += c;
    }
    return s;
}

void Histogram::add(std::size_t value) {
    const std::size_t bin = value / bin_width;
    if (counts.size() <= bin) {
        counts.resize(bin + 1, 0);
    }
    ++counts[bin];
}

Histogram& Histogram::operator+=(const Histogram& other) {
    if (other.bin_width != bin_width) {
        throw InvalidArgument("histogram bin widths differ");
    }
    if (counts.size() < other.counts.size()) {
        counts.resize(other.counts.size(), 0);
    }
    for (std::size_t k = 0; k < other.counts.size(); ++k) {
        counts[k] += other.counts[k];
    }
    return *this;
}

Histogram fp_distance_histogram(std::span<const double> beta_true, std::span<const double> beta_hat,
                                std::size_t bin_width) {
    require_same_length(beta_true, beta_hat);
    if (bin_width == 0) {
        throw InvalidArgument("histogram bin width must be positive");
    }
    Histogram h;
    h.bin_width = bin_width;
    const std::vector<std::size_t> truth = step_support(beta_true);
    for (std::size_t j = 1; j < beta_hat.size(); ++j) {
        if (beta_hat[j] == 0.0 || beta_true[j] != 0.0) {
            continue;
        }
        if (truth.empty()) {
            throw InvalidArgument("false positive distances need at least one true fault");
        }
        // truth is sorted; nearest neighbour via binary search
        const auto it = std::lower_bound(truth.begin(), truth.end(), j);
        std::size_t d = static_cast<std::size_t>(-1);
        if (it != truth.end()) {
            d = *it - j;
        }
        if (it != truth.begin()) {
            d = std::min(d, j - *(it - 1));
        }
        h.add(d);
    }
    return h;
}

EventList derivative_baseline(const Profile& y, double threshold_db) {
    if (y.size() < 2) {
        throw InvalidArgument("derivative baseline needs at least 2 samples");
    }
    const std::size_t m = y.size() - 1;
    std::vector<double> d(m);
    for (std::size_t i = 0; i < m; ++i) {
        d[i] = y.samples[i + 1] - y.samples[i];
    }
    std::vector<bool> flagged(m, false);
    EventList out;
    for (std::size_t i = 0; i < m; ++i) {
        const double a = std::fabs(d[i]);
        if (!(a > threshold_db)) {
            continue;
        }
        // strict on the left so a plateau of equal values flags once
        const bool left_ok = i == 0 || a > std::fabs(d[i - 1]);
        const bool right_ok = i + 1 == m || a >= std::fabs(d[i + 1]);
        if (left_ok && right_ok) {
            flagged[i] = true;
            // d[i] is the jump into 0-based sample i+1, i.e. 1-based sample i+2
            const std::size_t position = i + 2;
            out.events.push_back(
                Event{position, static_cast<double>(position) * y.sample_spacing_m, -d[i]});
        }
    }
    std::vector<double> rest;
    rest.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (!flagged[i]) {
            rest.push_back(d[i]);
        }
    }
    if (!rest.empty()) {
        const std::size_t mid = rest.size() / 2;
        std::nth_element(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(mid), rest.end());
        double median = rest[mid];
        if (rest.size() % 2 == 0) {
            const double lower = *std::max_element(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(mid));
            median = 0.5 * (median + lower);
        }
        out.slope_db_per_sample = median;
    }
    return out;
}

CoefficientVector events_to_beta(const EventList& events, std::size_t n_samples, double sigma) {
    CoefficientVector beta(n_samples + 1, 0.0);
    beta[0] = events.slope_db_per_sample / sigma;
    for (const Event& e : events.events) {
        if (e.position_index < 1 || e.position_index > n_samples) {
            throw InvalidArgument("event position outside the profile");
        }
        beta[e.position_index] -= e.loss_db;
    }
    return beta;
}

LbiDetector::LbiDetector(AnalysisOptions options, const kernels::KernelSet& kernels)
    : options_(std::move(options)), kernels_(&kernels) {}

std::string LbiDetector::name() const { return options_.lambda_grid ? "lbi" : "lbi-single"; }

Detection LbiDetector::detect(const Profile& profile) const {
    Analysis a = analyze(profile, options_, *kernels_);
    Detection d;
    d.beta_hat = std::move(a.beta);
    d.lambda_best = a.lambda_best;
    d.iterations = a.total_iterations;
    return d;
}

DerivativeDetector::DerivativeDetector(double threshold_db, double sigma) : threshold_db_(threshold_db), sigma_(sigma) {
    if (!(threshold_db_ > 0.0)) {
        throw InvalidArgument("baseline threshold must be positive");
    }
}

Detection DerivativeDetector::detect(const Profile& profile) const {
    Detection d;
    d.beta_hat = events_to_beta(derivative_baseline(profile, threshold_db_), profile.size(), sigma_);
    return d;
}

std::unique_ptr<Detector> make_detector(const std::string& name, const AnalysisOptions& options,
                                        double baseline_threshold_db, const kernels::KernelSet& kernels) {
    if (name == "lbi") {
        AnalysisOptions o = options;
        o.lambda_grid = true;
        return std::make_unique<LbiDetector>(o, kernels);
    }
    if (name == "lbi-single") {
        AnalysisOptions o = options;
        o.lambda_grid = false;
        return std::make_unique<LbiDetector>(o, kernels);
    }
    if (name == "derivative") {
        return std::make_unique<DerivativeDetector>(baseline_threshold_db, options.solver.sigma);
    }
    throw InvalidArgument("unknown detector '" + name + "'");
}

void summarize(DetectorReport& report, const std::vector<std::size_t>& lengths) {
    report.lengths.clear();
    report.overall = LengthSummary{};
    auto finish = [](LengthSummary& s, double sq_sum, double seconds_sum) {
        const std::size_t ok = s.profiles - s.failures;
        s.metrics = metrics(s.table);
        s.mean_squared_error = ok > 0 ? sq_sum / static_cast<double>(ok) : 0.0;
        s.mean_seconds = ok > 0 ? seconds_sum / static_cast<double>(ok) : 0.0;
    };
    double all_sq = 0.0;
    double all_seconds = 0.0;
    for (const std::size_t n : lengths) {
        LengthSummary s;
        s.length = n;
        double sq = 0.0;
        double seconds = 0.0;
        for (const ProfileOutcome& o : report.profiles) {
            if (o.length != n) {
                continue;
            }
            ++s.profiles;
            if (o.failed) {
                ++s.failures;
                continue;
            }
            s.table += o.table;
            s.fp_histogram += o.fp_histogram;
            sq += o.squared_error;
            seconds += o.seconds;
        }
        finish(s, sq, seconds);
        report.overall.profiles += s.profiles;
        report.overall.failures += s.failures;
        report.overall.table += s.table;
        report.overall.fp_histogram += s.fp_histogram;
        all_sq += sq;
        all_seconds += seconds;
        report.lengths.push_back(std::move(s));
    }
    finish(report.overall, all_sq, all_seconds);
}

BenchmarkReport run_benchmark(const TestbenchSpec& spec, const std::vector<const Detector*>& detectors,
                              const BenchmarkOptions& options) {
    spec.validate();
    if (detectors.empty()) {
        throw InvalidArgument("no detectors given");
    }
    const std::size_t per_length = spec.profiles_per_length;
    const std::size_t total = spec.total_profiles();
    const double sigma = spec.sigma;

    BenchmarkReport report;
    report.spec = spec;
    report.kernel = std::string(kernels::best().name);
    report.detectors.resize(detectors.size());
    for (std::size_t d = 0; d < detectors.size(); ++d) {
        report.detectors[d].detector = detectors[d]->name();
        report.detectors[d].profiles.resize(total);
    }

    std::atomic<std::size_t> next{0};
    std::size_t done = 0;
    std::mutex progress_mutex;

    auto work = [&]() {
        for (;;) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= total) {
                return;
            }
            const std::size_t li = idx / per_length;
            const std::size_t rep = idx % per_length;
            const TestbenchCase tc = make_testbench_case(spec, li, rep);
            for (std::size_t d = 0; d < detectors.size(); ++d) {
                ProfileOutcome& o = report.detectors[d].profiles[idx];
                o.length = tc.fiber.n_samples;
                o.replicate = rep;
                o.fp_histogram.bin_width = 50;
                try {
                    const auto start = std::chrono::steady_clock::now();
                    Detection det = detectors[d]->detect(tc.noisy);
                    o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                    o.table = contingency(tc.beta_true, det.beta_hat);
                    o.squared_error = squared_error_norm(tc.beta_true, det.beta_hat, sigma);
                    o.fp_histogram = fp_distance_histogram(tc.beta_true, det.beta_hat);
                    o.lambda_best = det.lambda_best;
                    o.iterations = det.iterations;
                } catch (const std::exception& e) {
                    o.failed = true;
                    o.error = e.what();
                }
            }
            if (options.progress) {
                const std::lock_guard<std::mutex> lock(progress_mutex);
                options.progress(++done, total);
            }
        }
    };

    const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(total, 1));
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    for (auto& r : report.detectors) {
        summarize(r, spec.lengths);
    }
    return report;
}

}  // namespace lbotdr
