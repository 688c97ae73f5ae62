#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace rembed {

/// Dense real matrix stored column-major: element (i, j) lives at values[i + j * rows].
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
    /// Takes ownership of column-major values; throws DimensionError on a length mismatch.
    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double& operator()(std::size_t i, std::size_t j) noexcept { return values_[i + j * rows_]; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i + j * rows_]; }

    std::span<double> col(std::size_t j) noexcept { return {values_.data() + j * rows_, rows_}; }
    std::span<const double> col(std::size_t j) const noexcept { return {values_.data() + j * rows_, rows_}; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }

    bool all_finite() const noexcept;

    DenseMatrix transposed() const;
    /// Leading `n` columns.
    DenseMatrix left_cols(std::size_t n) const;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

// Small dense kernels used by the Rayleigh-Ritz step and by tests.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// aᵀ·b without forming aᵀ.
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator-(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double s, const DenseMatrix& a);

double frobenius_norm(const DenseMatrix& a);
double max_abs(const DenseMatrix& a);
/// ‖a − b‖_F / max(‖b‖_F, tiny); equals ‖a‖_F when b is zero.
double relative_frobenius_error(const DenseMatrix& a, const DenseMatrix& b);
/// ‖aᵀa − I‖_max.
double orthonormality_error(const DenseMatrix& a);

}  // namespace rembed
