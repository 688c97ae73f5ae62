#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "rembed/dense.hpp"

namespace rembed {

using Index = std::uint32_t;

/// Compressed sparse row matrix. Column indices are strictly increasing within a row.
class SparseMatrix {
public:
    SparseMatrix() : row_offsets_{0} {}
    /// All-zero matrix.
    SparseMatrix(std::size_t rows, std::size_t cols);
    /// Validates every CSR invariant; throws InvalidArgument on violation.
    SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                 std::vector<Index> col_indices, std::vector<double> values);

    /// Builds from per-row (column, value) lists. Entries are sorted; duplicates throw.
    static SparseMatrix from_rows(std::size_t cols,
                                  const std::vector<std::vector<std::pair<Index, double>>>& rows);
    static SparseMatrix identity(std::size_t n);
    /// Keeps entries whose magnitude is nonzero.
    static SparseMatrix from_dense(const DenseMatrix& dense);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return values_.size(); }

    std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
    std::span<const Index> col_indices() const noexcept { return col_indices_; }
    std::span<const double> values() const noexcept { return values_; }

    std::span<const Index> row_indices(std::size_t i) const noexcept {
        return {col_indices_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
    }
    std::span<const double> row_values(std::size_t i) const noexcept {
        return {values_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
    }

    DenseMatrix to_dense() const;
    SparseMatrix scaled(double s) const;

    friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_offsets_;
    std::vector<Index> col_indices_;
    std::vector<double> values_;
};

/// a·b for CSR a (n×d) and dense b (d×m). Parallel over output rows.
DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& b);

/// aᵀ·b for CSR a (n×d) and dense b (n×m), without forming aᵀ.
/// Each output column is accumulated by a single thread in row order.
DenseMatrix spmm_t(const SparseMatrix& a, const DenseMatrix& b);

/// Scales every nonzero row to unit Euclidean norm; zero rows are left alone.
SparseMatrix row_l2_normalize(const SparseMatrix& a);

/// Mean over rows of ‖row‖²; 0 for an empty matrix.
double mean_squared_row_norm(const SparseMatrix& a);

}  // namespace rembed
