#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lbotdr/dictionary.hpp"
#include "lbotdr/solver.hpp"

namespace lbotdr {

/// Upper bound on useful lambda values: max_j |a_j^T y| / ||a_j||^2 over all
/// dictionary columns, using implicit column access.
double lambda_max_bound(std::span<const double> y, const DictionaryShape& shape);

/// v_j = (|beta_j| + lambda) * sign(beta_j), sign(0) = 0. shrink(v_j, lambda)
/// gives back beta_j.
std::vector<double> hot_start_v(std::span<const double> beta, double lambda);

/// ||beta||_0 log p + p log(||y - A beta||^2 / p), natural log. Counts the
/// slope entry. A zero residual gives -infinity.
double bic(std::span<const double> y, std::span<const double> beta, const DictionaryShape& shape);

class LambdaSchedule {
public:
    static constexpr double kFirstLambda = 0.5;
    static constexpr std::size_t kDefaultSize = 8;

    /// Validated list: starts at 0.5, strictly ascending.
    explicit LambdaSchedule(std::vector<double> values);

    /// `size` log-spaced values from 0.5 to lambda_max inclusive. Collapses to
    /// {0.5} when lambda_max <= 0.5 or size == 1.
    static LambdaSchedule log_spaced(double lambda_max, std::size_t size = kDefaultSize);

    const std::vector<double>& values() const noexcept { return values_; }

private:
    std::vector<double> values_;
};

struct LambdaTrial {
    double lambda = 0.0;
    double bic = 0.0;
    std::size_t iterations = 0;
    std::size_t nonzeros = 0;
    bool converged = false;
    std::optional<std::string> error;   // set when this lambda failed and was skipped
};

struct SelectionResult {
    CoefficientVector beta_first;
    CoefficientVector beta_best;
    double lambda_best = LambdaSchedule::kFirstLambda;
    double bic_best = 0.0;
    std::size_t first_iterations = 0;    // N_c
    std::size_t total_iterations = 0;
    std::vector<LambdaTrial> bic_trace;
};

/// Full run at lambda = 0.5, then each further lambda hot-started from the
/// previous run's dense state with a budget of ceil(0.1 N_c). Keeps the
/// candidate with the smallest BIC; ties go to the earlier (smaller) lambda.
SelectionResult select_model(std::span<const double> y, const SolverConfig& config,
                             const LambdaSchedule& schedule,
                             const kernels::KernelSet& kernels = kernels::best());

struct AnalysisOptions {
    SolverConfig solver;
    bool lambda_grid = true;
    std::size_t grid_size = LambdaSchedule::kDefaultSize;
};

struct Analysis {
    CoefficientVector beta;          // dictionary units
    EventList events;
    double lambda_best = LambdaSchedule::kFirstLambda;
    std::size_t first_iterations = 0;
    std::size_t total_iterations = 0;
    bool converged = false;          // first run only
    std::vector<LambdaTrial> bic_trace;
};

/// Profile in, event list out. With the grid disabled this is one lbotdr run
/// at lambda = 0.5.
Analysis analyze(const Profile& profile, const AnalysisOptions& options,
                 const kernels::KernelSet& kernels = kernels::best());

}  // namespace lbotdr
