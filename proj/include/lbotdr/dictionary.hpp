#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "lbotdr/types.hpp"

namespace lbotdr {

/// Shape of the slope + step dictionary.
///
/// The dictionary has p columns and n = p - 1 rows. Column 1 is the scaled
/// ramp (sigma * 1, sigma * 2, ..., sigma * n), column j >= 2 is a step that is
/// zero in rows 1..j-2 and one in rows j-1..n. Row and column numbers in this
/// interface are 1-based; coefficient storage is 0-based (column j lives at
/// index j - 1).
///
/// The matrix is never stored. Everything below works on the closed form.
class DictionaryShape {
public:
    static constexpr double kDefaultSigma = 1.0 / 1024.0;

    /// Throws InvalidArgument unless p >= 3 and sigma is a positive power of two.
    explicit DictionaryShape(std::size_t p, double sigma = kDefaultSigma);

    static DictionaryShape for_samples(std::size_t n_samples, double sigma = kDefaultSigma) {
        return DictionaryShape(n_samples + 1, sigma);
    }

    std::size_t columns() const noexcept { return p_; }
    std::size_t rows() const noexcept { return p_ - 1; }
    double sigma() const noexcept { return sigma_; }

private:
    std::size_t p_;
    double sigma_;
};

/// a_i^T beta = sigma * i * beta_1 + sum_{s=2}^{i+1} beta_s, computed in O(i).
double row_inner_product(const DictionaryShape& shape, std::size_t row, std::span<const double> beta);

/// ||a_i||^2 = sigma^2 i^2 + i.
double row_squared_norm(const DictionaryShape& shape, std::size_t row);

/// 1 / ||a_i||^2 for every row, index 0 holding row 1.
std::vector<double> inverse_row_norms(const DictionaryShape& shape);

/// A * beta through one prefix-sum pass.
std::vector<double> apply_dictionary(const DictionaryShape& shape, std::span<const double> beta);

/// a_j^T y for every column j, via suffix sums (index j - 1 holds column j).
std::vector<double> column_correlations(const DictionaryShape& shape, std::span<const double> y);

/// ||a_j||^2 for column j.
double column_squared_norm(const DictionaryShape& shape, std::size_t column);

/// Dense n x |columns| matrix of the selected (strictly ascending, 1-based) columns.
Eigen::MatrixXd materialize_columns(const DictionaryShape& shape, std::span<const std::size_t> columns);

/// Dense row i (length p). Test oracle and debugging aid.
std::vector<double> materialize_row(const DictionaryShape& shape, std::size_t row);

}  // namespace lbotdr
