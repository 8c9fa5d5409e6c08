#pragma once

// Linearized-Bregman sparse Kaczmarz solver on the slope + step dictionary,
// and the single-lambda analysis built on it: iterate until the stopping rule
// fires, locate peaks of the dense estimate, refit on that support.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lbotdr/dictionary.hpp"
#include "lbotdr/kernels.hpp"
#include "lbotdr/types.hpp"

namespace lbotdr {

/// max(|v| - lambda, 0) * sign(v)
double shrink(double v, double lambda) noexcept;

struct SolverConfig {
    double lambda = 0.5;
    double sigma = DictionaryShape::kDefaultSigma;
    /// Minimum detectable loss in dB. Drives the stopping rule and the
    /// post-refit pruning of small events.
    double epsilon_min = 0.125;
    /// Iteration budget (row updates). 0 selects default_sweeps * n.
    std::size_t max_iterations = 0;
    std::size_t default_sweeps = 400;
    /// Threshold on |beta_j| for a sign change to count as a peak.
    double peak_threshold = 0.02;
    /// Stopping rule: the end-of-sweep mean absolute residual must be below
    /// epsilon_min, and its average over the last stall_window sweeps must sit
    /// less than stall_tolerance * epsilon_min below the average over the
    /// window before. Window averages ride over the small bumps of the
    /// residual trace. stall_window = 0 keeps only the first condition.
    std::size_t stall_window = 20;
    double stall_tolerance = 0.01;
    /// After the refit, drop events one at a time while that lowers the BIC.
    bool bic_elimination = true;

    /// Throws InvalidArgument on violated invariants.
    void validate(std::size_t n_samples) const;
    std::size_t iteration_budget(std::size_t n_samples) const;
};

struct SolverState {
    std::vector<double> beta;  // dictionary units, beta_j = shrink(v_j, lambda)
    std::vector<double> v;
    std::uint64_t k = 0;       // row updates performed
    double lambda = 0.0;

    static SolverState cold(std::size_t p, double lambda);
    /// Hot start from given beta / v. Re-derives beta from v so the shrink
    /// invariant holds.
    static SolverState hot(std::span<const double> v, double lambda);
};

struct ResidualStats {
    double mean_abs = 0.0;                  // (1/n) sum |y_i - a_i^T beta| at a sweep boundary
    std::optional<double> earlier_window;   // mean of mean_abs over sweeps t-2W .. t-W-1
    std::optional<double> recent_window;    // mean of mean_abs over sweeps t-W+1 .. t
};

/// True once the sweep-boundary residual says further iterations are not worth it.
bool stopping_criterion(const ResidualStats& stats, const SolverConfig& config);

/// One Kaczmarz row update at row ((k mod n) + 1). Standalone form: the row
/// inner product is recomputed from beta.
void kaczmarz_step(SolverState& state, const DictionaryShape& shape, std::span<const double> y,
                   const kernels::KernelSet& kernels = kernels::best());

/// Cyclic sweeps over a fixed profile with precomputed row tables.
class KaczmarzSolver {
public:
    KaczmarzSolver(const DictionaryShape& shape, std::span<const double> y, SolverState state,
                   const kernels::KernelSet& kernels = kernels::best());

    /// Runs `count` row updates continuing the cyclic order. Returns the sum of
    /// |residual| seen before each update.
    double run_rows(std::size_t count);

    /// One full pass starting at the current row; requires k at a sweep boundary.
    /// Returns the mean in-sweep |residual|.
    double sweep();

    /// Mean |y - A beta| for the current beta, O(n).
    double mean_abs_residual() const;

    const SolverState& state() const noexcept { return state_; }
    SolverState& state() noexcept { return state_; }
    const DictionaryShape& shape() const noexcept { return shape_; }

private:
    DictionaryShape shape_;
    std::span<const double> y_;
    std::vector<double> sigma_row_;
    std::vector<double> inv_norm_;
    SolverState state_;
    const kernels::KernelSet* kernels_;
};

/// Sign-change peaks of beta with |beta_j| >= threshold, plus column 1.
/// Indices are 1-based dictionary columns, ascending. Throws if beta.size() < 3.
std::vector<std::size_t> peak_locations(std::span<const double> beta, double threshold);

/// Collapses runs of neighbouring column indices (j, j+1) to the member with
/// the larger |beta|. Column 1 is never merged.
std::vector<std::size_t> merge_adjacent(std::span<const double> beta, std::span<const std::size_t> columns);

struct RefitResult {
    CoefficientVector beta;   // dense, dictionary units, zero off the support
    std::size_t rank = 0;
    bool rank_deficient = false;
};

/// Least squares on the selected columns (ascending, may repeat, must include
/// column 1). Uses the closed-form Gram matrix of the structured columns and a
/// rank-revealing solve; rank-deficient systems get the minimum-norm solution.
RefitResult least_squares_refit(std::span<const double> y, const DictionaryShape& shape,
                                std::span<const std::size_t> columns);

/// Refit on `columns`, then repeatedly drop events with |beta| < epsilon_min
/// and, when enabled, the event whose removal lowers the BIC the most,
/// refitting after every change. The slope column always stays.
RefitResult prune_support(std::span<const double> y, const DictionaryShape& shape,
                          std::span<const std::size_t> columns, double epsilon_min, bool bic_elimination);

struct LbotdrResult {
    CoefficientVector beta;         // refit on the pruned support; dictionary units
    CoefficientVector dense_beta;   // solver estimate before refit
    CoefficientVector dense_v;
    std::vector<std::size_t> support;   // refit columns before pruning
    std::size_t iterations = 0;     // N_c
    std::size_t sweeps = 0;
    bool converged = false;         // false when the budget ran out first
    bool rank_deficient = false;
    double mean_abs_residual = 0.0; // solver residual at exit

    double slope_db_per_sample(double sigma) const { return sigma * beta.at(0); }
};

/// Iterate, stop, locate peaks, refit, prune. Starts cold when the start
/// vectors are empty. `budget` overrides config.max_iterations when nonzero.
LbotdrResult lbotdr(std::span<const double> y, const SolverConfig& config,
                    std::span<const double> beta_start = {}, std::span<const double> v_start = {},
                    std::size_t budget = 0, const kernels::KernelSet& kernels = kernels::best());

/// Event list view of a coefficient vector (dictionary units).
EventList to_event_list(std::span<const double> beta, double sigma, double sample_spacing_m);

struct InstrumentedSweep {
    std::uint64_t iterations = 0;
    std::uint64_t core_multiplications = 0;     // per whole sweep
    std::uint64_t core_additions = 0;
    std::uint64_t max_multiplications_per_iteration = 0;
    SolverState state;                          // state after the sweep
};

/// One sweep through the generic scalar path with every floating-point
/// operation of the row update counted.
InstrumentedSweep instrumented_sweep(const DictionaryShape& shape, std::span<const double> y, SolverState state);

}  // namespace lbotdr
