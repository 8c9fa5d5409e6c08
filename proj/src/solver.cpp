#include "lbotdr/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <numeric>
#include <string>

#include <Eigen/Dense>

#include "lbotdr/detail/op_count.hpp"
#include "lbotdr/detail/scalar_kernels.hpp"

namespace lbotdr {

namespace {

// Shared by the production sweep (double + SIMD kernels) and the instrumented
// sweep (CountingReal + generic kernels). Updates row `row` (1-based) given the
// sum of shrink(v) over the row's step entries; returns the same sum after the
// update and writes the pre-update residual. beta is left to the caller.
template <class Real, class ShiftShrinkSum>
Real row_update(Real* v, std::size_t row, Real y_i, Real sigma_i, Real inv_norm, Real lambda, Real step_sum,
                ShiftShrinkSum&& shift_shrink_sum, Real& residual) {
    const Real inner = sigma_i * detail::shrink_generic(v[0], lambda) + step_sum;
    const Real r = y_i - inner;
    const Real c = r * inv_norm;
    v[0] = v[0] + c * sigma_i;
    residual = r;
    return shift_shrink_sum(v + 1, row, c, lambda);
}

std::vector<double> sigma_row_table(const DictionaryShape& shape) {
    std::vector<double> out(shape.rows());
    for (std::size_t row = 1; row <= shape.rows(); ++row) {
        out[row - 1] = shape.sigma() * static_cast<double>(row);
    }
    return out;
}

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

double shrink(double v, double lambda) noexcept { return detail::shrink_generic(v, lambda); }

void SolverConfig::validate(std::size_t n_samples) const {
    if (!(lambda >= 0.0)) {
        throw InvalidArgument("lambda must be non-negative");
    }
    if (!(epsilon_min > 0.0)) {
        throw InvalidArgument("epsilon_min must be positive");
    }
    if (!(peak_threshold >= 0.0)) {
        throw InvalidArgument("peak threshold must be non-negative");
    }
    if (max_iterations != 0 && max_iterations < n_samples) {
        throw InvalidArgument("iteration budget must cover at least one sweep (" +
                              std::to_string(n_samples) + " rows)");
    }
    if (max_iterations == 0 && default_sweeps == 0) {
        throw InvalidArgument("default_sweeps must be positive");
    }
    if (!(stall_tolerance >= 0.0)) {
        throw InvalidArgument("stall tolerance must be non-negative");
    }
}

std::size_t SolverConfig::iteration_budget(std::size_t n_samples) const {
    return max_iterations != 0 ? max_iterations : default_sweeps * n_samples;
}

SolverState SolverState::cold(std::size_t p, double lambda) {
    SolverState s;
    s.beta.assign(p, 0.0);
    s.v.assign(p, 0.0);
    s.lambda = lambda;
    return s;
}

SolverState SolverState::hot(std::span<const double> v, double lambda) {
    SolverState s;
    s.v.assign(v.begin(), v.end());
    s.beta.resize(v.size());
    std::transform(v.begin(), v.end(), s.beta.begin(), [lambda](double x) { return shrink(x, lambda); });
    s.lambda = lambda;
    return s;
}

bool stopping_criterion(const ResidualStats& stats, const SolverConfig& config) {
    if (!(stats.mean_abs < config.epsilon_min)) {
        return false;
    }
    if (config.stall_window == 0) {
        return true;
    }
    if (!stats.earlier_window || !stats.recent_window) {
        return false;
    }
    return *stats.earlier_window - *stats.recent_window < config.stall_tolerance * config.epsilon_min;
}

void kaczmarz_step(SolverState& state, const DictionaryShape& shape, std::span<const double> y,
                   const kernels::KernelSet& kernels) {
    const std::size_t n = shape.rows();
    if (y.size() != n || state.v.size() != shape.columns() || state.beta.size() != shape.columns()) {
        throw InvalidArgument("solver state or profile does not match the dictionary shape");
    }
    const std::size_t row = static_cast<std::size_t>(state.k % n) + 1;
    const double sigma_i = shape.sigma() * static_cast<double>(row);
    const double inv_norm = 1.0 / row_squared_norm(shape, row);
    const double step_sum = kernels.shrink_sum(state.v.data() + 1, row, state.lambda);
    double residual = 0.0;
    row_update<double>(state.v.data(), row, y[row - 1], sigma_i, inv_norm, state.lambda, step_sum,
                       kernels.shift_shrink_sum, residual);
    for (std::size_t j = 0; j <= row; ++j) {
        state.beta[j] = shrink(state.v[j], state.lambda);
    }
    ++state.k;
}

KaczmarzSolver::KaczmarzSolver(const DictionaryShape& shape, std::span<const double> y, SolverState state,
                               const kernels::KernelSet& kernels)
    : shape_(shape),
      y_(y),
      sigma_row_(sigma_row_table(shape)),
      inv_norm_(inverse_row_norms(shape)),
      state_(std::move(state)),
      kernels_(&kernels) {
    if (y.size() != shape.rows() || state_.v.size() != shape.columns() ||
        state_.beta.size() != shape.columns()) {
        throw InvalidArgument("solver state or profile does not match the dictionary shape");
    }
}

double KaczmarzSolver::run_rows(std::size_t count) {
    const std::size_t n = shape_.rows();
    double* v = state_.v.data();
    const double lambda = state_.lambda;
    const auto shift_shrink_sum = kernels_->shift_shrink_sum;

    double abs_residual = 0.0;
    std::size_t row = static_cast<std::size_t>(state_.k % n) + 1;
    // sum of beta over the step entries of the row before `row`
    double step_sum = row == 1 ? 0.0 : kernels_->shrink_sum(v + 1, row - 1, lambda);
    for (std::size_t done = 0; done < count; ++done) {
        step_sum += shrink(v[row], lambda);
        double r = 0.0;
        step_sum = row_update<double>(v, row, y_[row - 1], sigma_row_[row - 1], inv_norm_[row - 1], lambda,
                                      step_sum, shift_shrink_sum, r);
        abs_residual += std::fabs(r);
        if (++row > n) {
            row = 1;
            step_sum = 0.0;
        }
    }
    state_.k += count;
    std::transform(state_.v.begin(), state_.v.end(), state_.beta.begin(),
                   [lambda](double x) { return shrink(x, lambda); });
    return abs_residual;
}

double KaczmarzSolver::sweep() {
    const std::size_t n = shape_.rows();
    if (state_.k % n != 0) {
        throw InvalidArgument("sweep() must start at row 1");
    }
    return run_rows(n) / static_cast<double>(n);
}

double KaczmarzSolver::mean_abs_residual() const {
    const std::size_t n = shape_.rows();
    const double* beta = state_.beta.data();
    double steps = 0.0;
    double total = 0.0;
    for (std::size_t row = 1; row <= n; ++row) {
        steps += beta[row];
        total += std::fabs(y_[row - 1] - (sigma_row_[row - 1] * beta[0] + steps));
    }
    return total / static_cast<double>(n);
}

std::vector<std::size_t> peak_locations(std::span<const double> beta, double threshold) {
    const std::size_t p = beta.size();
    if (p < 3) {
        throw InvalidArgument("peak search needs at least 3 coefficients");
    }
    std::vector<std::size_t> out{1};
    // 1-based column j sits at beta[j - 1]
    for (std::size_t j = 2; j <= p - 1; ++j) {
        const double here = beta[j - 1];
        if (sign_of(beta[j] - here) != sign_of(here - beta[j - 2]) && std::fabs(here) >= threshold) {
            out.push_back(j);
        }
    }
    return out;
}

std::vector<std::size_t> merge_adjacent(std::span<const double> beta, std::span<const std::size_t> columns) {
    std::vector<std::size_t> out;
    out.reserve(columns.size());
    for (const std::size_t j : columns) {
        if (!out.empty() && out.back() >= 2 && j <= out.back() + 1) {
            if (std::fabs(beta[j - 1]) > std::fabs(beta[out.back() - 1])) {
                out.back() = j;
            }
            continue;
        }
        out.push_back(j);
    }
    return out;
}

namespace {

// Normal equations of the structured columns, built in closed form.
struct NormalEquations {
    Eigen::MatrixXd gram;
    Eigen::VectorXd rhs;
    double y_squared = 0.0;
};

NormalEquations normal_equations(std::span<const double> y, const DictionaryShape& shape,
                                 std::span<const std::size_t> columns) {
    const std::size_t n = shape.rows();
    const double sigma = shape.sigma();
    const double nd = static_cast<double>(n);
    const auto triangular = [](double m) { return m * (m + 1.0) / 2.0; };
    const auto k = static_cast<Eigen::Index>(columns.size());

    const std::vector<double> correlation = column_correlations(shape, y);
    NormalEquations out;
    out.gram.resize(k, k);
    out.rhs.resize(k);
    for (Eigen::Index a = 0; a < k; ++a) {
        const std::size_t ja = columns[static_cast<std::size_t>(a)];
        out.rhs(a) = correlation[ja - 1];
        for (Eigen::Index b = a; b < k; ++b) {
            const std::size_t jb = columns[static_cast<std::size_t>(b)];
            double g = 0.0;
            if (ja == 1 && jb == 1) {
                g = sigma * sigma * nd * (nd + 1.0) * (2.0 * nd + 1.0) / 6.0;
            } else if (ja == 1) {
                g = sigma * (triangular(nd) - triangular(static_cast<double>(jb) - 2.0));
            } else {
                g = nd - static_cast<double>(std::max(ja, jb)) + 2.0;
            }
            out.gram(a, b) = g;
            out.gram(b, a) = g;
        }
    }
    for (const double v : y) {
        out.y_squared += v * v;
    }
    return out;
}

struct SubsetFit {
    Eigen::VectorXd coefficients;   // over the kept entries, in order
    Eigen::Index rank = 0;
    double rss = 0.0;
};

SubsetFit fit_subset(const NormalEquations& eq, const std::vector<Eigen::Index>& keep) {
    const auto k = static_cast<Eigen::Index>(keep.size());
    Eigen::MatrixXd g(k, k);
    Eigen::VectorXd b(k);
    for (Eigen::Index a = 0; a < k; ++a) {
        b(a) = eq.rhs(keep[static_cast<std::size_t>(a)]);
        for (Eigen::Index c = 0; c < k; ++c) {
            g(a, c) = eq.gram(keep[static_cast<std::size_t>(a)], keep[static_cast<std::size_t>(c)]);
        }
    }
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(g);
    SubsetFit out;
    out.coefficients = cod.solve(b);
    out.rank = cod.rank();
    // ||y - A c||^2 expanded through the normal equations
    out.rss = std::max(0.0, eq.y_squared - 2.0 * out.coefficients.dot(b) +
                                out.coefficients.dot(g * out.coefficients));
    return out;
}

double subset_bic(const SubsetFit& fit, std::size_t p) {
    const double pd = static_cast<double>(p);
    if (fit.rss == 0.0) {
        return -std::numeric_limits<double>::infinity();
    }
    std::size_t nonzeros = 0;
    for (Eigen::Index a = 0; a < fit.coefficients.size(); ++a) {
        nonzeros += fit.coefficients(a) != 0.0 ? 1 : 0;
    }
    return static_cast<double>(nonzeros) * std::log(pd) + pd * std::log(fit.rss / pd);
}

void validate_refit_columns(std::span<const double> y, const DictionaryShape& shape,
                            std::span<const std::size_t> columns) {
    if (y.size() != shape.rows()) {
        throw InvalidArgument("profile length does not match dictionary rows");
    }
    if (columns.empty() || columns.front() != 1) {
        throw InvalidArgument("refit support must include the slope column");
    }
    if (columns.size() > shape.rows()) {
        throw InvalidArgument("refit support larger than the number of samples");
    }
    for (std::size_t k = 0; k < columns.size(); ++k) {
        if (columns[k] > shape.columns() || (k > 0 && columns[k] < columns[k - 1])) {
            throw InvalidArgument("refit columns must be ascending and within the dictionary");
        }
    }
}

}  // namespace

RefitResult least_squares_refit(std::span<const double> y, const DictionaryShape& shape,
                                std::span<const std::size_t> columns) {
    validate_refit_columns(y, shape, columns);
    const NormalEquations eq = normal_equations(y, shape, columns);
    std::vector<Eigen::Index> all(columns.size());
    for (std::size_t a = 0; a < all.size(); ++a) {
        all[a] = static_cast<Eigen::Index>(a);
    }
    const SubsetFit fit = fit_subset(eq, all);

    RefitResult out;
    out.beta.assign(shape.columns(), 0.0);
    for (std::size_t a = 0; a < columns.size(); ++a) {
        out.beta[columns[a] - 1] += fit.coefficients(static_cast<Eigen::Index>(a));
    }
    out.rank = static_cast<std::size_t>(fit.rank);
    out.rank_deficient = out.rank < columns.size();
    return out;
}

RefitResult prune_support(std::span<const double> y, const DictionaryShape& shape,
                          std::span<const std::size_t> columns, double epsilon_min, bool bic_elimination) {
    validate_refit_columns(y, shape, columns);
    const NormalEquations eq = normal_equations(y, shape, columns);
    std::vector<Eigen::Index> keep(columns.size());
    for (std::size_t a = 0; a < keep.size(); ++a) {
        keep[a] = static_cast<Eigen::Index>(a);
    }
    const auto p = static_cast<double>(shape.columns());
    const double log_p = std::log(p);

    SubsetFit fit = fit_subset(eq, keep);
    const bool rank_deficient = static_cast<std::size_t>(fit.rank) < keep.size();
    // Inverse Gram matrix of the kept columns, downdated after each BIC drop.
    // Dropping column a raises the RSS by c_a^2 / inverse(a, a).
    std::optional<Eigen::MatrixXd> inverse;
    for (;;) {
        // small events first; the slope (position 0 of keep) is never dropped
        std::vector<Eigen::Index> large{keep.front()};
        for (std::size_t a = 1; a < keep.size(); ++a) {
            if (std::fabs(fit.coefficients(static_cast<Eigen::Index>(a))) >= epsilon_min) {
                large.push_back(keep[a]);
            }
        }
        if (large.size() != keep.size()) {
            keep = std::move(large);
            fit = fit_subset(eq, keep);
            inverse.reset();
            continue;
        }
        if (!bic_elimination || keep.size() < 2) {
            break;
        }
        const auto k = static_cast<Eigen::Index>(keep.size());
        if (!inverse) {
            if (fit.rank < k) {
                break;   // singular subset; drop-one scores are not defined
            }
            Eigen::MatrixXd g(k, k);
            for (Eigen::Index a = 0; a < k; ++a) {
                for (Eigen::Index c = 0; c < k; ++c) {
                    g(a, c) = eq.gram(keep[static_cast<std::size_t>(a)], keep[static_cast<std::size_t>(c)]);
                }
            }
            const Eigen::LLT<Eigen::MatrixXd> llt(g);
            if (llt.info() != Eigen::Success) {
                break;
            }
            inverse = llt.solve(Eigen::MatrixXd::Identity(k, k));
        }
        const Eigen::MatrixXd& inv = *inverse;
        const Eigen::VectorXd& c = fit.coefficients;
        const auto nonzeros = static_cast<double>((c.array() != 0.0).count());

        double best = subset_bic(fit, shape.columns());
        Eigen::Index drop = 0;
        double drop_rss = 0.0;
        for (Eigen::Index a = 1; a < k; ++a) {
            if (!(inv(a, a) > 0.0)) {
                continue;
            }
            const double rss = fit.rss + c(a) * c(a) / inv(a, a);
            const double count = nonzeros - (c(a) != 0.0 ? 1.0 : 0.0);
            const double score =
                rss == 0.0 ? -std::numeric_limits<double>::infinity() : count * log_p + p * std::log(rss / p);
            if (score < best) {
                best = score;
                drop = a;
                drop_rss = rss;
            }
        }
        if (drop == 0) {
            break;
        }

        // remove entry `drop` from the solution and the inverse
        const Eigen::VectorXd col = inv.col(drop);
        const double pivot = inv(drop, drop);
        const Eigen::VectorXd updated = c - col * (c(drop) / pivot);
        const Eigen::MatrixXd shrunk = inv - col * col.transpose() / pivot;
        std::vector<Eigen::Index> rest;
        rest.reserve(static_cast<std::size_t>(k - 1));
        for (Eigen::Index a = 0; a < k; ++a) {
            if (a != drop) {
                rest.push_back(a);
            }
        }
        Eigen::MatrixXd next_inverse(k - 1, k - 1);
        Eigen::VectorXd next_coefficients(k - 1);
        for (Eigen::Index a = 0; a < k - 1; ++a) {
            next_coefficients(a) = updated(rest[static_cast<std::size_t>(a)]);
            for (Eigen::Index b = 0; b < k - 1; ++b) {
                next_inverse(a, b) = shrunk(rest[static_cast<std::size_t>(a)], rest[static_cast<std::size_t>(b)]);
            }
        }
        keep.erase(keep.begin() + static_cast<std::ptrdiff_t>(drop));
        inverse = std::move(next_inverse);
        fit.coefficients = std::move(next_coefficients);
        fit.rss = drop_rss;
        fit.rank = k - 1;
    }
    // final coefficients from a fresh solve rather than the downdated ones
    fit = fit_subset(eq, keep);

    RefitResult out;
    out.beta.assign(shape.columns(), 0.0);
    for (std::size_t a = 0; a < keep.size(); ++a) {
        out.beta[columns[static_cast<std::size_t>(keep[a])] - 1] += fit.coefficients(static_cast<Eigen::Index>(a));
    }
    out.rank = static_cast<std::size_t>(fit.rank);
    out.rank_deficient = rank_deficient;
    return out;
}

LbotdrResult lbotdr(std::span<const double> y, const SolverConfig& config, std::span<const double> beta_start,
                    std::span<const double> v_start, std::size_t budget, const kernels::KernelSet& kernels) {
    const std::size_t n = y.size();
    config.validate(n);
    const DictionaryShape shape = DictionaryShape::for_samples(n, config.sigma);
    const std::size_t p = shape.columns();

    SolverState start;
    if (!v_start.empty()) {
        if (v_start.size() != p) {
            throw InvalidArgument("hot-start v has the wrong length");
        }
        start = SolverState::hot(v_start, config.lambda);
    } else if (!beta_start.empty()) {
        if (beta_start.size() != p) {
            throw InvalidArgument("hot-start beta has the wrong length");
        }
        std::vector<double> v(p);
        for (std::size_t j = 0; j < p; ++j) {
            v[j] = (std::fabs(beta_start[j]) + config.lambda) * sign_of(beta_start[j]);
        }
        start = SolverState::hot(v, config.lambda);
    } else {
        start = SolverState::cold(p, config.lambda);
    }

    const std::size_t limit = budget != 0 ? budget : config.iteration_budget(n);
    KaczmarzSolver solver(shape, y, std::move(start), kernels);

    LbotdrResult result;
    std::vector<double> history;
    std::size_t used = 0;
    while (used < limit) {
        if (limit - used < n) {
            solver.run_rows(limit - used);
            used = limit;
            break;
        }
        solver.sweep();
        used += n;
        ++result.sweeps;
        ResidualStats stats;
        stats.mean_abs = solver.mean_abs_residual();
        history.push_back(stats.mean_abs);
        const std::size_t w = config.stall_window;
        if (w != 0 && history.size() >= 2 * w) {
            const auto end = history.end();
            const double scale = 1.0 / static_cast<double>(w);
            stats.recent_window = scale * std::accumulate(end - static_cast<std::ptrdiff_t>(w), end, 0.0);
            stats.earlier_window = scale * std::accumulate(end - static_cast<std::ptrdiff_t>(2 * w),
                                                           end - static_cast<std::ptrdiff_t>(w), 0.0);
        }
        if (stopping_criterion(stats, config)) {
            result.converged = true;
            break;
        }
    }
    result.iterations = used;
    result.mean_abs_residual = solver.mean_abs_residual();
    result.dense_beta = solver.state().beta;
    result.dense_v = solver.state().v;

    // slope entry in dB per sample before peak search; only the j = 2 test sees it
    std::vector<double> compensated = result.dense_beta;
    compensated[0] *= config.sigma;
    const std::vector<std::size_t> peaks = peak_locations(compensated, config.peak_threshold);
    result.support = merge_adjacent(compensated, peaks);

    RefitResult refit = prune_support(y, shape, result.support, config.epsilon_min, config.bic_elimination);
    result.rank_deficient = refit.rank_deficient;
    result.beta = std::move(refit.beta);
    return result;
}

EventList to_event_list(std::span<const double> beta, double sigma, double sample_spacing_m) {
    EventList out;
    if (beta.empty()) {
        return out;
    }
    out.slope_db_per_sample = sigma * beta[0];
    for (std::size_t j = 1; j < beta.size(); ++j) {
        if (beta[j] != 0.0) {
            out.events.push_back(Event{j, static_cast<double>(j) * sample_spacing_m, -beta[j]});
        }
    }
    return out;
}

InstrumentedSweep instrumented_sweep(const DictionaryShape& shape, std::span<const double> y, SolverState state) {
    using detail::CountingReal;
    const std::size_t n = shape.rows();
    if (y.size() != n || state.v.size() != shape.columns() || state.beta.size() != shape.columns()) {
        throw InvalidArgument("solver state or profile does not match the dictionary shape");
    }
    if (state.k % n != 0) {
        throw InvalidArgument("instrumented sweep must start at row 1");
    }
    std::vector<CountingReal> v(state.v.begin(), state.v.end());
    const std::vector<double> sigma_row = sigma_row_table(shape);
    const std::vector<double> inv_norm = inverse_row_norms(shape);
    const CountingReal lambda(state.lambda);

    InstrumentedSweep out;
    CountingReal step_sum(0.0);
    for (std::size_t row = 1; row <= n; ++row) {
        detail::OpCounts counts;
        {
            const detail::OpCountScope scope(counts);
            step_sum = step_sum + detail::shrink_generic(v[row], lambda);
            CountingReal r;
            step_sum = row_update<CountingReal>(
                v.data(), row, CountingReal(y[row - 1]), CountingReal(sigma_row[row - 1]),
                CountingReal(inv_norm[row - 1]), lambda, step_sum,
                [](CountingReal* vv, std::size_t count, CountingReal c, CountingReal lam) {
                    return detail::shift_shrink_sum_generic(vv, count, c, lam);
                },
                r);
        }
        out.core_multiplications += counts.multiplications;
        out.core_additions += counts.additions;
        out.max_multiplications_per_iteration =
            std::max<std::uint64_t>(out.max_multiplications_per_iteration, counts.multiplications);
        ++out.iterations;
    }
    for (std::size_t j = 0; j < v.size(); ++j) {
        state.v[j] = v[j].value();
        state.beta[j] = shrink(state.v[j], state.lambda);
    }
    state.k += n;
    out.state = std::move(state);
    return out;
}

}  // namespace lbotdr
