#include "rembed/dense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rembed/error.hpp"

namespace rembed {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
    if (values_.size() != rows_ * cols_) {
        throw DimensionError("DenseMatrix: expected " + std::to_string(rows_ * cols_) +
                             " values, got " + std::to_string(values_.size()));
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
    return out;
}

bool DenseMatrix::all_finite() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

DenseMatrix DenseMatrix::transposed() const {
    DenseMatrix out(cols_, rows_);
    for (std::size_t j = 0; j < cols_; ++j)
        for (std::size_t i = 0; i < rows_; ++i) out(j, i) = (*this)(i, j);
    return out;
}

DenseMatrix DenseMatrix::left_cols(std::size_t n) const {
    if (n > cols_) throw DimensionError("left_cols: requested more columns than available");
    return DenseMatrix(rows_, n,
                       std::vector<double>(values_.begin(),
                                           values_.begin() + static_cast<std::ptrdiff_t>(rows_ * n)));
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("matmul: inner dimensions differ");
    DenseMatrix out(a.rows(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        auto oc = out.col(j);
        for (std::size_t t = 0; t < a.cols(); ++t) {
            const double s = b(t, j);
            if (s == 0.0) continue;
            auto ac = a.col(t);
            for (std::size_t i = 0; i < a.rows(); ++i) oc[i] += ac[i] * s;
        }
    }
    return out;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows()) throw DimensionError("matmul_tn: row counts differ");
    DenseMatrix out(a.cols(), b.cols());
    for (std::size_t j = 0; j < b.cols(); ++j) {
        auto bc = b.col(j);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            auto ac = a.col(i);
            double s = 0.0;
            for (std::size_t r = 0; r < a.rows(); ++r) s += ac[r] * bc[r];
            out(i, j) = s;
        }
    }
    return out;
}

namespace {

template <typename Op>
DenseMatrix elementwise(const DenseMatrix& a, const DenseMatrix& b, Op op) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("elementwise: shapes differ");
    DenseMatrix out(a.rows(), a.cols());
    auto av = a.values();
    auto bv = b.values();
    auto ov = out.values();
    for (std::size_t i = 0; i < ov.size(); ++i) ov[i] = op(av[i], bv[i]);
    return out;
}

}  // namespace

DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b) {
    return elementwise(a, b, [](double x, double y) { return x - y; });
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
    return elementwise(a, b, [](double x, double y) { return x + y; });
}

DenseMatrix operator*(double s, const DenseMatrix& a) {
    DenseMatrix out = a;
    for (double& v : out.values()) v *= s;
    return out;
}

double frobenius_norm(const DenseMatrix& a) {
    double s = 0.0;
    for (double v : a.values()) s += v * v;
    return std::sqrt(s);
}

double max_abs(const DenseMatrix& a) {
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, std::abs(v));
    return m;
}

double relative_frobenius_error(const DenseMatrix& a, const DenseMatrix& b) {
    const double diff = frobenius_norm(a - b);
    const double ref = frobenius_norm(b);
    return ref > std::numeric_limits<double>::min() ? diff / ref : diff;
}

double orthonormality_error(const DenseMatrix& a) {
    return max_abs(matmul_tn(a, a) - DenseMatrix::identity(a.cols()));
}

}  // namespace rembed
