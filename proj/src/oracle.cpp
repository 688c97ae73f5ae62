#include "rembed/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rembed/error.hpp"
#include "rembed/linalg.hpp"

namespace rembed::oracle {

namespace {

constexpr std::size_t kMaxDim = 200;

void check_size(std::size_t n, const char* what) {
    if (n > kMaxDim)
        throw InvalidArgument(std::string("oracle: ") + what + " = " + std::to_string(n) + " exceeds " +
                              std::to_string(kMaxDim));
}

// Lower Cholesky factor of an SPD matrix; throws when a pivot is not safely positive.
DenseMatrix cholesky(const DenseMatrix& a) {
    const std::size_t n = a.rows();
    DenseMatrix l(n, n);
    double diag_max = 0.0;
    for (std::size_t i = 0; i < n; ++i) diag_max = std::max(diag_max, std::abs(a(i, i)));
    const double floor = 1e-13 * std::max(diag_max, 1e-300);
    for (std::size_t j = 0; j < n; ++j) {
        double s = a(j, j);
        for (std::size_t t = 0; t < j; ++t) s -= l(j, t) * l(j, t);
        if (!(s > floor))
            throw InvalidArgument("oracle: XᵀX + λI is singular; use a positive ridge λ");
        l(j, j) = std::sqrt(s);
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a(i, j);
            for (std::size_t t = 0; t < j; ++t) v -= l(i, t) * l(j, t);
            l(i, j) = v / l(j, j);
        }
    }
    return l;
}

}  // namespace

DenseMatrix dense_ridge_solve(const DenseMatrix& x, const DenseMatrix& b, double ridge) {
    if (x.rows() != b.rows()) throw DimensionError("oracle: X and B row counts differ");
    if (!(ridge >= 0.0)) throw InvalidArgument("oracle: ridge must be nonnegative");
    check_size(x.cols(), "d");
    DenseMatrix gram = matmul_tn(x, x);
    for (std::size_t i = 0; i < gram.rows(); ++i) gram(i, i) += ridge;
    const DenseMatrix l = cholesky(gram);
    DenseMatrix w = matmul_tn(x, b);
    const std::size_t d = l.rows();
    for (std::size_t j = 0; j < w.cols(); ++j) {
        auto col = w.col(j);
        for (std::size_t i = 0; i < d; ++i) {
            double v = col[i];
            for (std::size_t t = 0; t < i; ++t) v -= l(i, t) * col[t];
            col[i] = v / l(i, i);
        }
        for (std::size_t i = d; i-- > 0;) {
            double v = col[i];
            for (std::size_t t = i + 1; t < d; ++t) v -= l(t, i) * col[t];
            col[i] = v / l(i, i);
        }
    }
    return w;
}

DenseMatrix hat_operator(const DenseMatrix& x, const DenseMatrix& y, double ridge) {
    check_size(x.rows(), "n");
    check_size(y.cols(), "c");
    const DenseMatrix w = dense_ridge_solve(x, y, ridge);
    DenseMatrix m = matmul_tn(y, matmul(x, w));
    const DenseMatrix mt = m.transposed();
    for (std::size_t j = 0; j < m.cols(); ++j)
        for (std::size_t i = 0; i < m.rows(); ++i) m(i, j) = 0.5 * (m(i, j) + mt(i, j));
    return m;
}

ExactEmbedding exact_embedding(const DenseMatrix& x, const DenseMatrix& y, std::size_t k, double ridge) {
    if (k < 1 || k > y.cols()) throw InvalidArgument("oracle: k must lie in [1, c]");
    const EigResult eig = symmetric_eig(hat_operator(x, y, ridge));
    ExactEmbedding out;
    out.basis = eig.eigenvectors.left_cols(k);
    out.eigenvalues.assign(eig.eigenvalues.begin(), eig.eigenvalues.begin() + static_cast<std::ptrdiff_t>(k));
    out.all_eigenvalues = eig.eigenvalues;
    return out;
}

std::vector<double> principal_angles(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw DimensionError("principal_angles: bases must have the same shape");
    if (orthonormality_error(a) > 1e-8 || orthonormality_error(b) > 1e-8)
        throw InvalidArgument("principal_angles: inputs must have orthonormal columns");
    const DenseMatrix cross = matmul_tn(a, b);
    const EigResult eig = symmetric_eig(matmul_tn(cross, cross));
    std::vector<double> angles;
    angles.reserve(eig.eigenvalues.size());
    // Eigenvalues are nonincreasing, so cosines are too and angles come out nondecreasing.
    for (double s2 : eig.eigenvalues) {
        const double cosine = std::clamp(std::sqrt(std::max(s2, 0.0)), 0.0, 1.0);
        angles.push_back(std::acos(cosine));
    }
    return angles;
}

SparseMatrix random_sparse(std::size_t rows, std::size_t cols, double density, RandomStream& rng) {
    std::vector<std::vector<std::pair<Index, double>>> entries(rows);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            if (rng.uniform() < density) entries[i].emplace_back(static_cast<Index>(j), rng.normal());
    return SparseMatrix::from_rows(cols, entries);
}

SparseMatrix random_multilabel(std::size_t rows, std::size_t labels, RandomStream& rng) {
    std::vector<std::vector<std::pair<Index, double>>> entries(rows);
    for (auto& row : entries) {
        const std::size_t count = std::min<std::size_t>(labels, 1 + rng.below(3));
        while (row.size() < count) {
            const auto l = static_cast<Index>(rng.below(labels));
            if (std::none_of(row.begin(), row.end(), [&](const auto& e) { return e.first == l; }))
                row.emplace_back(l, 1.0);
        }
    }
    return SparseMatrix::from_rows(labels, entries);
}

VerificationInstance verification_instance(std::size_t scale, std::uint64_t seed) {
    RandomStream rng = RandomStream(seed).fork(0x5eed);
    VerificationInstance out;
    out.x = random_sparse(40 * scale, 25 * scale, 0.3, rng);
    out.y = random_multilabel(40 * scale, 30 * scale, rng);
    return out;
}

}  // namespace rembed::oracle
