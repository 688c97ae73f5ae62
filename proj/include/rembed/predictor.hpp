#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "rembed/dataset.hpp"
#include "rembed/linalg.hpp"
#include "rembed/rembed.hpp"

namespace rembed {

/// Regressor W_e (d×k) from features into the label embedding, plus the embedding itself.
struct LinearPredictor {
    DenseMatrix regressor;
    LabelEmbedding embedding;
    double ridge_used = 0.0;

    std::size_t num_features() const noexcept { return regressor.rows(); }
    std::size_t num_labels() const noexcept { return embedding.num_labels(); }
    std::size_t dim() const noexcept { return embedding.dim(); }
};

struct FitResult {
    LinearPredictor model;
    SolveReport report;
};

/// Top-t labels, best first; ties resolved toward the smaller label id.
struct Prediction {
    std::vector<Index> label_ids;
    std::vector<double> scores;
};

/// W_e = ridge_solve_multi(X, Y·V).
FitResult fit_regressor(const SparseMatrix& x, const SparseMatrix& y, const LabelEmbedding& embedding,
                        const SolverParams& solver);

/// Scores of every label for one sparse feature row: V·(W_eᵀ·x).
std::vector<double> score_labels(std::span<const Index> indices, std::span<const double> values,
                                 const LinearPredictor& model);

Prediction predict_topt(std::span<const Index> indices, std::span<const double> values,
                        const LinearPredictor& model, std::size_t t);

/// Convenience overload for row `i` of a feature matrix.
Prediction predict_topt(const SparseMatrix& x, std::size_t row, const LinearPredictor& model, std::size_t t);

/// Picks the t best entries of `scores` under the ordering (score desc, id asc).
Prediction top_t(std::span<const double> scores, std::size_t t);

/// precision@t for each requested t; multiclass data also gets test_error = 1 − precision@1.
Metrics evaluate(const LinearPredictor& model, const Dataset& test, std::span<const std::size_t> t_values);

}  // namespace rembed
