#ifndef SOFTPOU_NUMERIC_HPP
#define SOFTPOU_NUMERIC_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace softpou {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles. Small and deliberately simple: the
// sequence lengths and embedding dimensions in this project stay in the
// thousands, so a cache-friendly triple loop is all we need.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(data_.data() + r * cols_, cols_);
    }
    std::span<double> row(std::size_t r) {
        return std::span<double>(data_.data() + r * cols_, cols_);
    }

    Vector column(std::size_t c) const;
    void set_column(std::size_t c, std::span<const double> values);

    Matrix transposed() const;

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Throws std::invalid_argument if any entry is NaN or infinite.
void check_finite(std::span<const double> values, const std::string& what);
void check_finite(const Matrix& m, const std::string& what);

// Softmax with max-subtraction; safe for entries of magnitude ~1e8 and for
// arbitrarily large gaps (far entries underflow to exact zero).
Vector stable_softmax(std::span<const double> v);

// Column-wise in-place stable softmax.
void stable_softmax_columns(Matrix& m);

Vector relu(std::span<const double> v);

// C = A * B. Requires A.cols == B.rows.
Matrix matmul(const Matrix& a, const Matrix& b);

// log(sum_i exp(v_i)) without overflow.
double log_sum_exp(std::span<const double> v);

} // namespace softpou

#endif
