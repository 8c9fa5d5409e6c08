#include "lbotdr/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lbotdr {

double lambda_max_bound(std::span<const double> y, const DictionaryShape& shape) {
    if (y.empty()) {
        throw InvalidArgument("empty profile");
    }
    const std::vector<double> correlation = column_correlations(shape, y);
    double best = 0.0;
    for (std::size_t j = 1; j <= shape.columns(); ++j) {
        best = std::max(best, std::fabs(correlation[j - 1]) / column_squared_norm(shape, j));
    }
    return best;
}

std::vector<double> hot_start_v(std::span<const double> beta, double lambda) {
    if (!(lambda >= 0.0)) {
        throw InvalidArgument("lambda must be non-negative");
    }
    std::vector<double> v(beta.size());
    for (std::size_t j = 0; j < beta.size(); ++j) {
        const double b = beta[j];
        v[j] = b > 0.0 ? b + lambda : (b < 0.0 ? b - lambda : 0.0);
    }
    return v;
}

double bic(std::span<const double> y, std::span<const double> beta, const DictionaryShape& shape) {
    const std::vector<double> fit = apply_dictionary(shape, beta);
    if (y.size() != fit.size()) {
        throw InvalidArgument("profile length does not match dictionary rows");
    }
    double rss = 0.0;
    for (std::size_t i = 0; i < fit.size(); ++i) {
        const double d = y[i] - fit[i];
        rss += d * d;
    }
    if (rss == 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    const auto nonzeros = static_cast<double>(std::count_if(beta.begin(), beta.end(), [](double b) { return b != 0.0; }));
    const double p = static_cast<double>(shape.columns());
    return nonzeros * std::log(p) + p * std::log(rss / p);
}

LambdaSchedule::LambdaSchedule(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty() || values_.front() != kFirstLambda) {
        throw InvalidArgument("lambda schedule must start at 0.5");
    }
    for (std::size_t k = 1; k < values_.size(); ++k) {
        if (!(values_[k] > values_[k - 1]) || !std::isfinite(values_[k])) {
            throw InvalidArgument("lambda schedule must be strictly ascending");
        }
    }
}

LambdaSchedule LambdaSchedule::log_spaced(double lambda_max, std::size_t size) {
    if (size <= 1 || !(lambda_max > kFirstLambda) || !std::isfinite(lambda_max)) {
        return LambdaSchedule({kFirstLambda});
    }
    std::vector<double> values(size);
    const double lo = std::log(kFirstLambda);
    const double step = (std::log(lambda_max) - lo) / static_cast<double>(size - 1);
    values.front() = kFirstLambda;
    for (std::size_t k = 1; k + 1 < size; ++k) {
        values[k] = std::exp(lo + step * static_cast<double>(k));
    }
    values.back() = lambda_max;
    return LambdaSchedule(std::move(values));
}

SelectionResult select_model(std::span<const double> y, const SolverConfig& config, const LambdaSchedule& schedule,
                             const kernels::KernelSet& kernels) {
    const DictionaryShape shape = DictionaryShape::for_samples(y.size(), config.sigma);

    SolverConfig first_config = config;
    first_config.lambda = LambdaSchedule::kFirstLambda;
    const LbotdrResult first = lbotdr(y, first_config, {}, {}, 0, kernels);

    SelectionResult out;
    out.beta_first = first.beta;
    out.beta_best = first.beta;
    out.lambda_best = first_config.lambda;
    out.bic_best = bic(y, first.beta, shape);
    out.first_iterations = first.iterations;
    out.total_iterations = first.iterations;
    out.bic_trace.push_back(LambdaTrial{first_config.lambda, out.bic_best, first.iterations,
                                        static_cast<std::size_t>(std::count_if(first.beta.begin(), first.beta.end(),
                                                                               [](double b) { return b != 0.0; })),
                                        first.converged, std::nullopt});

    const auto follow_up_budget =
        static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(first.iterations)));
    std::vector<double> chain_beta = first.dense_beta;

    for (std::size_t k = 1; k < schedule.values().size(); ++k) {
        const double lambda = schedule.values()[k];
        LambdaTrial trial;
        trial.lambda = lambda;
        try {
            SolverConfig run_config = config;
            run_config.lambda = lambda;
            // budget may be shorter than a sweep here; lbotdr only enforces
            // the one-sweep minimum on the configured budget
            run_config.max_iterations = 0;
            const std::vector<double> v = hot_start_v(chain_beta, lambda);
            const LbotdrResult run = lbotdr(y, run_config, chain_beta, v, std::max<std::size_t>(follow_up_budget, 1),
                                            kernels);
            trial.bic = bic(y, run.beta, shape);
            trial.iterations = run.iterations;
            trial.converged = run.converged;
            trial.nonzeros = static_cast<std::size_t>(
                std::count_if(run.beta.begin(), run.beta.end(), [](double b) { return b != 0.0; }));
            out.total_iterations += run.iterations;
            chain_beta = run.dense_beta;
            if (trial.bic < out.bic_best) {
                out.bic_best = trial.bic;
                out.beta_best = run.beta;
                out.lambda_best = lambda;
            }
        } catch (const std::exception& e) {
            trial.bic = std::numeric_limits<double>::quiet_NaN();
            trial.error = e.what();
        }
        out.bic_trace.push_back(std::move(trial));
    }
    return out;
}

Analysis analyze(const Profile& profile, const AnalysisOptions& options, const kernels::KernelSet& kernels) {
    if (profile.size() < 2) {
        throw InvalidArgument("profile needs at least 2 samples");
    }
    const std::span<const double> y(profile.samples);
    Analysis out;
    SolverConfig config = options.solver;
    config.lambda = LambdaSchedule::kFirstLambda;
    if (options.lambda_grid) {
        const DictionaryShape shape = DictionaryShape::for_samples(y.size(), config.sigma);
        const LambdaSchedule schedule = LambdaSchedule::log_spaced(lambda_max_bound(y, shape), options.grid_size);
        SelectionResult sel = select_model(y, config, schedule, kernels);
        out.beta = std::move(sel.beta_best);
        out.lambda_best = sel.lambda_best;
        out.first_iterations = sel.first_iterations;
        out.total_iterations = sel.total_iterations;
        out.converged = sel.bic_trace.front().converged;
        out.bic_trace = std::move(sel.bic_trace);
    } else {
        LbotdrResult run = lbotdr(y, config, {}, {}, 0, kernels);
        out.beta = std::move(run.beta);
        out.first_iterations = run.iterations;
        out.total_iterations = run.iterations;
        out.converged = run.converged;
    }
    out.events = to_event_list(out.beta, config.sigma, profile.sample_spacing_m);
    return out;
}

}  // namespace lbotdr
