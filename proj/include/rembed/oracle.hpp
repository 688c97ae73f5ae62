#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rembed/dense.hpp"
#include "rembed/rng.hpp"
#include "rembed/sparse.hpp"

namespace rembed::oracle {

// Brute-force dense references. Small problems only (every dimension <= 200);
// used by tests and by the `verify` command, never by the pipeline.

/// Solves (XᵀX + λI)·W = XᵀB by dense Cholesky. Throws InvalidArgument if the system is
/// numerically singular (λ = 0 with rank-deficient X).
DenseMatrix dense_ridge_solve(const DenseMatrix& x, const DenseMatrix& b, double ridge);

/// Yᵀ·X·(XᵀX + λI)⁻¹·Xᵀ·Y, formed explicitly and symmetrized.
DenseMatrix hat_operator(const DenseMatrix& x, const DenseMatrix& y, double ridge);

struct ExactEmbedding {
    DenseMatrix basis;                // c×k
    std::vector<double> eigenvalues;  // top k, nonincreasing
    std::vector<double> all_eigenvalues;
};

/// Top-k eigenpairs of the explicitly formed hat operator.
ExactEmbedding exact_embedding(const DenseMatrix& x, const DenseMatrix& y, std::size_t k, double ridge);

/// Principal angles between span(a) and span(b), nondecreasing, in [0, π/2].
/// Both inputs must have orthonormal columns (within 1e-8).
std::vector<double> principal_angles(const DenseMatrix& a, const DenseMatrix& b);

/// Random sparse matrix: each entry present with probability `density`, standard normal value.
SparseMatrix random_sparse(std::size_t rows, std::size_t cols, double density, RandomStream& rng);

struct VerificationInstance {
    SparseMatrix x;  // n×d, density 0.3, standard normal entries
    SparseMatrix y;  // n×c, 1-3 labels per row
};

/// The seeded random problem used by `rembed verify`: n = 40s, d = 25s, c = 30s.
/// Seed 11 at scale 1 is well gap-separated (λ₁₁/λ₅ ≈ 0.34 for k = 5, p = 5).
VerificationInstance verification_instance(std::size_t scale, std::uint64_t seed);

/// Random multilabel indicator: each row holds 1, 2 or 3 distinct labels (2 on average).
SparseMatrix random_multilabel(std::size_t rows, std::size_t labels, RandomStream& rng);

}  // namespace rembed::oracle
