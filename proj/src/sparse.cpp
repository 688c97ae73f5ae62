#include "rembed/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rembed/error.hpp"
#include "rembed/parallel.hpp"

namespace rembed {

namespace {

void require_finite(const DenseMatrix& b, const char* op) {
    if (!b.all_finite()) throw InvalidArgument(std::string(op) + ": non-finite dense operand");
}

// Rows handled per parallel task; small enough to balance, large enough to amortize spawn.
constexpr std::size_t kRowGrain = 256;

}  // namespace

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), row_offsets_(rows + 1, 0) {}

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                           std::vector<Index> col_indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
    if (cols_ > std::numeric_limits<Index>::max())
        throw InvalidArgument("SparseMatrix: column count exceeds index range");
    if (row_offsets_.size() != rows_ + 1)
        throw InvalidArgument("SparseMatrix: row_offsets must have rows+1 entries");
    if (row_offsets_.front() != 0) throw InvalidArgument("SparseMatrix: row_offsets[0] must be 0");
    if (col_indices_.size() != values_.size())
        throw InvalidArgument("SparseMatrix: col_indices and values lengths differ");
    if (row_offsets_.back() != values_.size())
        throw InvalidArgument("SparseMatrix: row_offsets[rows] must equal nnz");
    for (std::size_t i = 0; i < rows_; ++i) {
        const std::size_t lo = row_offsets_[i];
        const std::size_t hi = row_offsets_[i + 1];
        if (hi < lo) throw InvalidArgument("SparseMatrix: row_offsets must be nondecreasing");
        for (std::size_t p = lo; p < hi; ++p) {
            if (col_indices_[p] >= cols_)
                throw InvalidArgument("SparseMatrix: column index out of range in row " +
                                      std::to_string(i));
            if (p > lo && col_indices_[p] <= col_indices_[p - 1])
                throw InvalidArgument("SparseMatrix: column indices not strictly increasing in row " +
                                      std::to_string(i));
            if (!std::isfinite(values_[p]))
                throw InvalidArgument("SparseMatrix: non-finite value in row " + std::to_string(i));
        }
    }
}

SparseMatrix SparseMatrix::from_rows(std::size_t cols,
                                     const std::vector<std::vector<std::pair<Index, double>>>& rows) {
    std::vector<std::size_t> offsets{0};
    offsets.reserve(rows.size() + 1);
    std::vector<Index> indices;
    std::vector<double> values;
    for (const auto& row : rows) {
        auto sorted = row;
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (const auto& [c, v] : sorted) {
            indices.push_back(c);
            values.push_back(v);
        }
        offsets.push_back(indices.size());
    }
    return SparseMatrix(rows.size(), cols, std::move(offsets), std::move(indices), std::move(values));
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
    std::vector<std::size_t> offsets(n + 1);
    std::vector<Index> indices(n);
    for (std::size_t i = 0; i < n; ++i) {
        offsets[i + 1] = i + 1;
        indices[i] = static_cast<Index>(i);
    }
    return SparseMatrix(n, n, std::move(offsets), std::move(indices), std::vector<double>(n, 1.0));
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& dense) {
    std::vector<std::size_t> offsets{0};
    std::vector<Index> indices;
    std::vector<double> values;
    for (std::size_t i = 0; i < dense.rows(); ++i) {
        for (std::size_t j = 0; j < dense.cols(); ++j) {
            if (dense(i, j) != 0.0) {
                indices.push_back(static_cast<Index>(j));
                values.push_back(dense(i, j));
            }
        }
        offsets.push_back(indices.size());
    }
    return SparseMatrix(dense.rows(), dense.cols(), std::move(offsets), std::move(indices),
                        std::move(values));
}

DenseMatrix SparseMatrix::to_dense() const {
    DenseMatrix out(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p)
            out(i, col_indices_[p]) = values_[p];
    return out;
}

SparseMatrix SparseMatrix::scaled(double s) const {
    SparseMatrix out = *this;
    for (double& v : out.values_) v *= s;
    return out;
}

DenseMatrix spmm(const SparseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows())
        throw DimensionError("spmm: A is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                             " but B has " + std::to_string(b.rows()) + " rows");
    require_finite(b, "spmm");
    const std::size_t m = b.cols();
    DenseMatrix out(a.rows(), m);
    parallel_for(
        a.rows(),
        [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                auto idx = a.row_indices(i);
                auto val = a.row_values(i);
                for (std::size_t j = 0; j < m; ++j) {
                    auto bc = b.col(j);
                    double s = 0.0;
                    for (std::size_t p = 0; p < idx.size(); ++p) s += val[p] * bc[idx[p]];
                    out(i, j) = s;
                }
            }
        },
        kRowGrain);
    return out;
}

DenseMatrix spmm_t(const SparseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows())
        throw DimensionError("spmm_t: A has " + std::to_string(a.rows()) + " rows but B has " +
                             std::to_string(b.rows()));
    require_finite(b, "spmm_t");
    DenseMatrix out(a.cols(), b.cols());
    // Column ranges are disjoint across tasks, so each output entry sees the rows in order.
    parallel_for(b.cols(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            auto bc = b.col(j);
            auto oc = out.col(j);
            for (std::size_t i = 0; i < a.rows(); ++i) {
                const double s = bc[i];
                if (s == 0.0) continue;
                auto idx = a.row_indices(i);
                auto val = a.row_values(i);
                for (std::size_t p = 0; p < idx.size(); ++p) oc[idx[p]] += val[p] * s;
            }
        }
    });
    return out;
}

SparseMatrix row_l2_normalize(const SparseMatrix& a) {
    std::vector<double> values(a.values().begin(), a.values().end());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto rv = a.row_values(i);
        double ss = 0.0;
        for (double v : rv) ss += v * v;
        if (ss == 0.0) continue;
        const double norm = std::sqrt(ss);
        // Rows already at unit norm are copied verbatim so normalization is idempotent.
        if (norm == 1.0) continue;
        const std::size_t lo = a.row_offsets()[i];
        for (std::size_t p = 0; p < rv.size(); ++p) values[lo + p] = rv[p] / norm;
    }
    return SparseMatrix(a.rows(), a.cols(),
                        std::vector<std::size_t>(a.row_offsets().begin(), a.row_offsets().end()),
                        std::vector<Index>(a.col_indices().begin(), a.col_indices().end()),
                        std::move(values));
}

double mean_squared_row_norm(const SparseMatrix& a) {
    if (a.rows() == 0) return 0.0;
    double total = 0.0;
    for (double v : a.values()) total += v * v;
    return total / static_cast<double>(a.rows());
}

}  // namespace rembed
