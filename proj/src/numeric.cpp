#include "softpou/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace softpou {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Vector Matrix::column(std::size_t c) const {
    Vector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
}

void Matrix::set_column(std::size_t c, std::span<const double> values) {
    for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

void check_finite(std::span<const double> values, const std::string& what) {
    for (double x : values) {
        if (!std::isfinite(x))
            throw std::invalid_argument(what + ": non-finite entry");
    }
}

void check_finite(const Matrix& m, const std::string& what) {
    check_finite(std::span<const double>(m.data(), m.size()), what);
}

Vector stable_softmax(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("stable_softmax: empty input");
    check_finite(v, "stable_softmax input");
    const double m = *std::max_element(v.begin(), v.end());
    Vector out(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - m);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

void stable_softmax_columns(Matrix& m) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m.rows(); ++i) peak = std::max(peak, m(i, j));
        if (!std::isfinite(peak))
            throw std::invalid_argument("stable_softmax_columns: non-finite score column");
        double sum = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) {
            const double e = std::exp(m(i, j) - peak);
            m(i, j) = e;
            sum += e;
        }
        for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) /= sum;
    }
}

Vector relu(std::span<const double> v) {
    check_finite(v, "relu input");
    Vector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] > 0.0 ? v[i] : 0.0;
    return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matmul: inner dimensions disagree (" +
                                    std::to_string(a.cols()) + " vs " +
                                    std::to_string(b.rows()) + ")");
    Matrix c(a.rows(), b.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* brow = b.data() + k * b.cols();
            double* crow = c.data() + i * c.cols();
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

double log_sum_exp(std::span<const double> v) {
    if (v.empty()) throw std::invalid_argument("log_sum_exp: empty input");
    check_finite(v, "log_sum_exp input");
    const double m = *std::max_element(v.begin(), v.end());
    double sum = 0.0;
    for (double x : v) sum += std::exp(x - m);
    return m + std::log(sum);
}

} // namespace softpou
