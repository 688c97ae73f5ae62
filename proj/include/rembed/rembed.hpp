#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rembed/dense.hpp"
#include "rembed/linalg.hpp"
#include "rembed/sparse.hpp"

namespace rembed {

struct RembedConfig {
    std::size_t embedding_dim = 0;  // k
    std::size_t oversampling = 10;  // p
    std::size_t power_iterations = 3;  // q
    SolverParams solver;
    std::uint64_t seed = 0;

    std::size_t probe_width() const noexcept { return embedding_dim + oversampling; }
    /// Checks k >= 1, q >= 1, solver params, and k + p <= num_labels.
    void validate(std::size_t num_labels) const;
};

/// Orthonormal label basis V (c×k) with Ritz estimates of the top eigenvalues of YᵀP_XY.
struct LabelEmbedding {
    DenseMatrix basis;
    std::vector<double> spectrum;
    RembedConfig config;

    std::size_t num_labels() const noexcept { return basis.rows(); }
    std::size_t dim() const noexcept { return basis.cols(); }
};

struct HatProduct {
    DenseMatrix value;
    SolveReport report;
};

/// Applies M = Yᵀ·X·(XᵀX+λI)⁻¹·Xᵀ·Y to the block Q without forming M:
/// Z = Y·Q, W = ridge_solve_multi(X, Z), result = Yᵀ·(X·W).
HatProduct hat_product(const SparseMatrix& x, const SparseMatrix& y, const DenseMatrix& q,
                       const SolverParams& solver);

struct RembedResult {
    LabelEmbedding embedding;
    /// All inner solves, in the order they ran.
    SolveReport solves;
    /// Full Ritz spectrum of QᵀMQ (k + p values), before truncation to k.
    std::vector<double> ritz_values;
};

/// Randomized subspace iteration against M, finished by Rayleigh-Ritz.
RembedResult rembed(const SparseMatrix& x, const SparseMatrix& y, const RembedConfig& config);

/// z = Vᵀ·y for a label set given as 0-based ids.
std::vector<double> embed_labels(std::span<const Index> labels, const LabelEmbedding& embedding);

}  // namespace rembed
