#include "lbotdr/dictionary.hpp"

#include <cmath>
#include <string>

namespace lbotdr {

namespace {

bool is_power_of_two(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        return false;
    }
    int exponent = 0;
    return std::frexp(x, &exponent) == 0.5;
}

void check_row(const DictionaryShape& shape, std::size_t row) {
    if (row < 1 || row > shape.rows()) {
        throw InvalidArgument("row index " + std::to_string(row) + " outside 1.." +
                              std::to_string(shape.rows()));
    }
}

void check_length(const DictionaryShape& shape, std::size_t length) {
    if (length != shape.columns()) {
        throw InvalidArgument("coefficient vector has length " + std::to_string(length) +
                              ", dictionary has " + std::to_string(shape.columns()) + " columns");
    }
}

}  // namespace

DictionaryShape::DictionaryShape(std::size_t p, double sigma) : p_(p), sigma_(sigma) {
    if (p < 3) {
        throw InvalidArgument("dictionary needs at least 3 columns");
    }
    if (!is_power_of_two(sigma)) {
        throw InvalidArgument("sigma must be a positive power of two");
    }
}

double row_inner_product(const DictionaryShape& shape, std::size_t row, std::span<const double> beta) {
    check_row(shape, row);
    check_length(shape, beta.size());
    double steps = 0.0;
    for (std::size_t s = 1; s <= row; ++s) {
        steps += beta[s];
    }
    return shape.sigma() * static_cast<double>(row) * beta[0] + steps;
}

double row_squared_norm(const DictionaryShape& shape, std::size_t row) {
    check_row(shape, row);
    const double i = static_cast<double>(row);
    const double si = shape.sigma() * i;
    return si * si + i;
}

std::vector<double> inverse_row_norms(const DictionaryShape& shape) {
    std::vector<double> out(shape.rows());
    for (std::size_t row = 1; row <= shape.rows(); ++row) {
        out[row - 1] = 1.0 / row_squared_norm(shape, row);
    }
    return out;
}

std::vector<double> apply_dictionary(const DictionaryShape& shape, std::span<const double> beta) {
    check_length(shape, beta.size());
    std::vector<double> y(shape.rows());
    const double slope = shape.sigma() * beta[0];
    double steps = 0.0;
    for (std::size_t row = 1; row <= shape.rows(); ++row) {
        steps += beta[row];
        y[row - 1] = slope * static_cast<double>(row) + steps;
    }
    return y;
}

std::vector<double> column_correlations(const DictionaryShape& shape, std::span<const double> y) {
    if (y.size() != shape.rows()) {
        throw InvalidArgument("profile length does not match dictionary rows");
    }
    const std::size_t n = shape.rows();
    std::vector<double> out(shape.columns());
    // column j >= 2 covers rows j-1..n: a suffix sum over y
    double suffix = 0.0;
    double ramp = 0.0;
    for (std::size_t row = n; row >= 1; --row) {
        suffix += y[row - 1];
        ramp += static_cast<double>(row) * y[row - 1];
        out[row] = suffix;
    }
    out[0] = shape.sigma() * ramp;
    return out;
}

double column_squared_norm(const DictionaryShape& shape, std::size_t column) {
    if (column < 1 || column > shape.columns()) {
        throw InvalidArgument("column index " + std::to_string(column) + " out of range");
    }
    const double n = static_cast<double>(shape.rows());
    if (column == 1) {
        const double s = shape.sigma();
        return s * s * n * (n + 1.0) * (2.0 * n + 1.0) / 6.0;
    }
    return n - static_cast<double>(column) + 2.0;
}

Eigen::MatrixXd materialize_columns(const DictionaryShape& shape, std::span<const std::size_t> columns) {
    const auto n = static_cast<Eigen::Index>(shape.rows());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(columns.size()));
    std::size_t previous = 0;
    for (std::size_t k = 0; k < columns.size(); ++k) {
        const std::size_t j = columns[k];
        if (j < 1 || j > shape.columns()) {
            throw InvalidArgument("column index " + std::to_string(j) + " out of range");
        }
        if (k > 0 && j <= previous) {
            throw InvalidArgument("column indices must be strictly ascending");
        }
        previous = j;
        const auto col = static_cast<Eigen::Index>(k);
        if (j == 1) {
            for (Eigen::Index r = 0; r < n; ++r) {
                out(r, col) = shape.sigma() * static_cast<double>(r + 1);
            }
        } else {
            out.col(col).tail(n - static_cast<Eigen::Index>(j) + 2).setOnes();
        }
    }
    return out;
}

std::vector<double> materialize_row(const DictionaryShape& shape, std::size_t row) {
    check_row(shape, row);
    std::vector<double> out(shape.columns(), 0.0);
    out[0] = shape.sigma() * static_cast<double>(row);
    for (std::size_t s = 1; s <= row; ++s) {
        out[s] = 1.0;
    }
    return out;
}

}  // namespace lbotdr
