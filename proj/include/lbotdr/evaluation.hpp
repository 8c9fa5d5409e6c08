#pragma once

// Scoring detectors against simulated ground truth, the discrete-derivative
// baseline detector, and the benchmark driver that ties them together.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lbotdr/kernels.hpp"
#include "lbotdr/model_selection.hpp"
#include "lbotdr/simulator.hpp"
#include "lbotdr/types.hpp"

namespace lbotdr {

struct ContingencyTable {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const noexcept { return tp + fp + tn + fn; }
    ContingencyTable& operator+=(const ContingencyTable& other) noexcept;
    friend bool operator==(const ContingencyTable&, const ContingencyTable&) = default;
};

/// Classifies every step index j >= 1 (the slope at index 0 is skipped).
/// `tolerance` = 0 is exact index matching. A positive tolerance matches each
/// detection to at most one unmatched true fault within +-tolerance samples.
ContingencyTable contingency(std::span<const double> beta_true, std::span<const double> beta_hat,
                             std::size_t tolerance = 0);

/// Absent when the denominator is zero.
struct Metrics {
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    std::optional<double> accuracy;
    std::optional<double> precision;
};

Metrics metrics(const ContingencyTable& table);

/// sum_j (beta_j - beta_hat_j)^2 with the slope entries scaled by sigma so
/// they are compared in dB per sample.
double squared_error_norm(std::span<const double> beta_true, std::span<const double> beta_hat, double sigma);

struct Histogram {
    std::size_t bin_width = 50;
    std::vector<std::uint64_t> counts;   // bin k holds distances in [k w, (k+1) w)

    std::uint64_t total() const noexcept;
    void add(std::size_t value);
    Histogram& operator+=(const Histogram& other);
    friend bool operator==(const Histogram&, const Histogram&) = default;
};

/// Distance from each false positive to the nearest true fault. Throws if
/// there are false positives but no true faults.
Histogram fp_distance_histogram(std::span<const double> beta_true, std::span<const double> beta_hat,
                                std::size_t bin_width = 50);

/// Derivative-and-peak detector: first differences, local maxima of |d| above the
/// threshold. Events carry loss = -d (so gains come out negative); slope is
/// the median of the unflagged differences.
EventList derivative_baseline(const Profile& y, double threshold_db);

/// Dense coefficient vector (dictionary units) for an event list on n samples.
CoefficientVector events_to_beta(const EventList& events, std::size_t n_samples, double sigma);

struct Detection {
    CoefficientVector beta_hat;   // dictionary units
    std::optional<double> lambda_best;
    std::size_t iterations = 0;
};

class Detector {
public:
    virtual ~Detector() = default;
    virtual std::string name() const = 0;
    /// Must be safe to call concurrently from several threads.
    virtual Detection detect(const Profile& profile) const = 0;
};

class LbiDetector final : public Detector {
public:
    explicit LbiDetector(AnalysisOptions options, const kernels::KernelSet& kernels = kernels::best());
    std::string name() const override;
    Detection detect(const Profile& profile) const override;

private:
    AnalysisOptions options_;
    const kernels::KernelSet* kernels_;
};

class DerivativeDetector final : public Detector {
public:
    static constexpr double kDefaultThresholdDb = 0.5;
    explicit DerivativeDetector(double threshold_db = kDefaultThresholdDb,
                                double sigma = DictionaryShape::kDefaultSigma);
    std::string name() const override { return "derivative"; }
    Detection detect(const Profile& profile) const override;

private:
    double threshold_db_;
    double sigma_;
};

/// Builds a detector by name ("lbi", "lbi-single", "derivative").
std::unique_ptr<Detector> make_detector(const std::string& name, const AnalysisOptions& options,
                                        double baseline_threshold_db = DerivativeDetector::kDefaultThresholdDb,
                                        const kernels::KernelSet& kernels = kernels::best());

struct ProfileOutcome {
    std::size_t length = 0;
    std::size_t replicate = 0;
    bool failed = false;
    std::string error;
    ContingencyTable table;
    double squared_error = 0.0;
    Histogram fp_histogram;
    std::optional<double> lambda_best;
    std::size_t iterations = 0;
    double seconds = 0.0;   // detector wall time only
};

struct LengthSummary {
    std::size_t length = 0;
    std::size_t profiles = 0;
    std::size_t failures = 0;
    ContingencyTable table;
    Metrics metrics;
    double mean_squared_error = 0.0;   // over successful profiles
    Histogram fp_histogram;
    double mean_seconds = 0.0;
};

struct DetectorReport {
    std::string detector;
    std::vector<LengthSummary> lengths;
    LengthSummary overall;             // length = 0
    std::vector<ProfileOutcome> profiles;   // length-major, replicate order
};

struct BenchmarkReport {
    TestbenchSpec spec;
    std::string kernel;
    std::vector<DetectorReport> detectors;
};

struct BenchmarkOptions {
    std::size_t workers = 1;
    /// Called after each finished profile (from worker threads, serialized).
    std::function<void(std::size_t done, std::size_t total)> progress;
};

/// Runs every detector on identical testbench profiles. Profiles are built
/// inside the workers from their own generator streams, so the result does not
/// depend on the worker count. Detector exceptions are recorded per profile.
BenchmarkReport run_benchmark(const TestbenchSpec& spec, const std::vector<const Detector*>& detectors,
                              const BenchmarkOptions& options = {});

/// Aggregates per-profile outcomes into per-length and overall summaries.
void summarize(DetectorReport& report, const std::vector<std::size_t>& lengths);

}  // namespace lbotdr
