#include "adrl/matrix.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

#include "adrl/error.hpp"

namespace adrl {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap view(const Matrix& m) {
    return ConstMap(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                    static_cast<Eigen::Index>(m.cols()));
}

MutMap view(Matrix& m) {
    return MutMap(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                  static_cast<Eigen::Index>(m.cols()));
}

void require(bool ok, const char* op, const Matrix& a, const Matrix& b) {
    if (!ok) {
        throw ConfigError(std::string(op) + ": shape mismatch " + a.shape_string() + " vs " +
                          b.shape_string());
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ConfigError("Matrix: data length " + std::to_string(data_.size()) +
                          " does not match " + shape_string());
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ConfigError("Matrix: ragged initializer");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

std::string Matrix::shape_string() const {
    return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
    return t;
}

Matrix Matrix::select_rows(std::span<const std::size_t> idx) const {
    Matrix out(idx.size(), cols_);
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (idx[i] >= rows_) throw ConfigError("select_rows: index out of range");
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(idx[i] * cols_), cols_,
                    out.data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
    }
    return out;
}

double Matrix::sum() const noexcept {
    double s = 0.0;
    for (double v : data_) s += v;
    return s;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), "matmul", a, b);
    Matrix out(a.rows(), b.cols());
    if (out.empty() || a.cols() == 0) return out;
    view(out).noalias() = view(a) * view(b);
    return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.cols(), "matmul_nt", a, b);
    Matrix out(a.rows(), b.rows());
    if (out.empty() || a.cols() == 0) return out;
    view(out).noalias() = view(a) * view(b).transpose();
    return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows(), "matmul_tn", a, b);
    Matrix out(a.cols(), b.cols());
    if (out.empty() || a.rows() == 0) return out;
    view(out).noalias() = view(a).transpose() * view(b);
    return out;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require(a.same_shape(b), "max_abs_diff", a, b);
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace adrl
