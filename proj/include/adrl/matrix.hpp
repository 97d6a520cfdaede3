#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace adrl {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
    static Matrix ones(std::size_t rows, std::size_t cols) { return Matrix(rows, cols, 1.0); }
    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    bool same_shape(const Matrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    bool all_finite() const noexcept;
    std::string shape_string() const;

    void fill(double v);
    Matrix transposed() const;
    Matrix select_rows(std::span<const std::size_t> idx) const;
    double sum() const noexcept;

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Dense products. Single-threaded, fixed reduction order.
Matrix matmul(const Matrix& a, const Matrix& b);     // a * b
Matrix matmul_nt(const Matrix& a, const Matrix& b);  // a * b^T
Matrix matmul_tn(const Matrix& a, const Matrix& b);  // a^T * b

/// Largest absolute elementwise difference; shapes must match.
double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace adrl
