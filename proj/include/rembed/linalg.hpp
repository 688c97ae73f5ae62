#pragma once

#include <cstddef>
#include <vector>

#include "rembed/dense.hpp"
#include "rembed/rng.hpp"
#include "rembed/sparse.hpp"

namespace rembed {

struct EigResult {
    std::vector<double> eigenvalues;  // nonincreasing
    DenseMatrix eigenvectors;         // column j pairs with eigenvalues[j]
};

/// Controls for the inner ridge least-squares solves.
struct SolverParams {
    double ridge = 0.0;
    double rel_tolerance = 1e-6;
    std::size_t max_iterations = 1000;

    /// Throws InvalidArgument unless ridge >= 0, rel_tolerance in (0, 1), max_iterations >= 1.
    void validate() const;
};

/// The default ridge: 1e-3 times the mean squared row norm of X.
double default_ridge(const SparseMatrix& x);

struct ColumnConvergence {
    std::size_t iterations = 0;
    /// ‖(XᵀX+λI)w − Xᵀb‖ / ‖Xᵀb‖, recomputed from the returned w (0 for zero right-hand sides).
    double relative_residual = 0.0;
    bool converged = false;
};

struct SolveReport {
    std::vector<ColumnConvergence> columns;

    bool all_converged() const;
    std::size_t total_iterations() const;
    std::size_t max_iterations_used() const;
    double max_relative_residual() const;
    /// Folds another report in (used when several solves make up one logical stage).
    void merge(const SolveReport& other);
};

struct RidgeSolution {
    DenseMatrix w;
    SolveReport report;
};

/// Flips each column so its largest-magnitude entry is positive (first such entry on ties).
void canonicalize_signs(DenseMatrix& q);

/// Modified Gram-Schmidt with one re-orthogonalization pass. Columns whose norm drops below
/// 1e-12 of their original norm are treated as dependent and replaced by random directions
/// drawn from `rng`. Signs follow canonicalize_signs.
DenseMatrix orthonormalize(const DenseMatrix& q, RandomStream& rng);

/// Cyclic Jacobi eigensolver for a symmetric matrix (symmetrized internally).
EigResult symmetric_eig(const DenseMatrix& s);

/// Minimizes ‖XW − B‖²_F + λ‖W‖²_F by conjugate gradients on the normal equations,
/// matrix-free, one block of right-hand sides with per-column stopping.
RidgeSolution ridge_solve_multi(const SparseMatrix& x, const DenseMatrix& b, const SolverParams& params);

}  // namespace rembed
