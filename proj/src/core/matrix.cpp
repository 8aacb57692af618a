#include "ptai/core/matrix.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "ptai/core/error.hpp"

namespace ptai {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

ConstMap view(const Matrix& m) { return {m.data(), Eigen::Index(m.rows()), Eigen::Index(m.cols())}; }
MutMap view(Matrix& m) { return {m.data(), Eigen::Index(m.rows()), Eigen::Index(m.cols())}; }

std::string shape(const Matrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void same_shape(const Matrix& a, const Matrix& b, const char* op) {
    require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorKind::invalid_dimension,
            std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows * cols, ErrorKind::invalid_dimension,
            "buffer length does not match " + std::to_string(rows) + "x" + std::to_string(cols));
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.begin()->size();
    Matrix m(r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
        require(row.size() == c, ErrorKind::invalid_dimension, "ragged initializer");
        std::copy(row.begin(), row.end(), m.row(i++).begin());
    }
    return m;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::row_vector(std::span<const double> values) {
    return Matrix(1, values.size(), std::vector<double>(values.begin(), values.end()));
}

bool Matrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

void Matrix::fill(double v) noexcept { std::fill(data_.begin(), data_.end(), v); }

Matrix matmul(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.rows(), ErrorKind::invalid_dimension,
            "matmul: " + shape(a) + " * " + shape(b));
    Matrix out(a.rows(), b.cols());
    if (a.cols() == 0) return out;
    view(out).noalias() = view(a) * view(b);
    return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    require(a.cols() == b.cols(), ErrorKind::invalid_dimension,
            "matmul_nt: " + shape(a) + " * " + shape(b) + "^T");
    Matrix out(a.rows(), b.rows());
    if (a.cols() == 0) return out;
    view(out).noalias() = view(a) * view(b).transpose();
    return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    require(a.rows() == b.rows(), ErrorKind::invalid_dimension,
            "matmul_tn: " + shape(a) + "^T * " + shape(b));
    Matrix out(a.cols(), b.cols());
    if (a.rows() == 0) return out;
    view(out).noalias() = view(a).transpose() * view(b);
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) out(c, r) = a(r, c);
    return out;
}

Matrix operator+(const Matrix& a, const Matrix& b) {
    Matrix out = a;
    out += b;
    return out;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
    Matrix out = a;
    out -= b;
    return out;
}

Matrix operator*(double s, const Matrix& a) {
    Matrix out = a;
    for (double& v : out.values()) v *= s;
    return out;
}

Matrix& operator+=(Matrix& a, const Matrix& b) {
    same_shape(a, b, "add");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

Matrix& operator-=(Matrix& a, const Matrix& b) {
    same_shape(a, b, "sub");
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
}

double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double v : a.values()) s += v * v;
    return std::sqrt(s);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
    same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

Matrix gather_rows(const Matrix& a, std::span<const std::size_t> indices) {
    Matrix out(indices.size(), a.cols());
    for (std::size_t r = 0; r < indices.size(); ++r) {
        require(indices[r] < a.rows(), ErrorKind::invalid_input, "gather_rows: index out of range");
        std::copy_n(a.row(indices[r]).begin(), a.cols(), out.row(r).begin());
    }
    return out;
}

Matrix slice_cols(const Matrix& a, std::size_t begin, std::size_t end) {
    require(begin <= end && end <= a.cols(), ErrorKind::invalid_dimension, "slice_cols: bad range");
    Matrix out(a.rows(), end - begin);
    for (std::size_t r = 0; r < a.rows(); ++r)
        std::copy(a.row(r).begin() + begin, a.row(r).begin() + end, out.row(r).begin());
    return out;
}

Matrix vstack(const Matrix& top, const Matrix& bottom) {
    if (top.empty() && top.rows() == 0) return bottom;
    if (bottom.rows() == 0) return top;
    require(top.cols() == bottom.cols(), ErrorKind::invalid_dimension,
            "vstack: " + shape(top) + " over " + shape(bottom));
    Matrix out(top.rows() + bottom.rows(), top.cols());
    std::copy(top.values().begin(), top.values().end(), out.values().begin());
    std::copy(bottom.values().begin(), bottom.values().end(), out.values().begin() + top.size());
    return out;
}

Matrix hstack(const Matrix& left, const Matrix& right) {
    require(left.rows() == right.rows(), ErrorKind::invalid_dimension,
            "hstack: " + shape(left) + " beside " + shape(right));
    Matrix out(left.rows(), left.cols() + right.cols());
    for (std::size_t r = 0; r < left.rows(); ++r) {
        auto dst = out.row(r).begin();
        dst = std::copy(left.row(r).begin(), left.row(r).end(), dst);
        std::copy(right.row(r).begin(), right.row(r).end(), dst);
    }
    return out;
}

}  // namespace ptai
