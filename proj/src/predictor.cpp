#include "rembed/predictor.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "rembed/error.hpp"
#include "rembed/parallel.hpp"

namespace rembed {

FitResult fit_regressor(const SparseMatrix& x, const SparseMatrix& y, const LabelEmbedding& embedding,
                        const SolverParams& solver) {
    if (x.rows() != y.rows()) throw DimensionError("fit_regressor: X and Y have different row counts");
    if (y.cols() != embedding.num_labels())
        throw DimensionError("fit_regressor: Y has " + std::to_string(y.cols()) +
                             " labels but the embedding covers " + std::to_string(embedding.num_labels()));
    const DenseMatrix targets = spmm(y, embedding.basis);
    RidgeSolution sol = ridge_solve_multi(x, targets, solver);
    return {LinearPredictor{std::move(sol.w), embedding, solver.ridge}, std::move(sol.report)};
}

std::vector<double> score_labels(std::span<const Index> indices, std::span<const double> values,
                                 const LinearPredictor& model) {
    if (indices.size() != values.size())
        throw DimensionError("score_labels: index and value arrays differ in length");
    const auto& w = model.regressor;
    const auto& v = model.embedding.basis;
    if (w.cols() != v.cols()) throw DimensionError("score_labels: regressor and embedding ranks differ");

    std::vector<double> latent(w.cols(), 0.0);
    for (std::size_t p = 0; p < indices.size(); ++p) {
        if (indices[p] >= w.rows())
            throw DimensionError("score_labels: feature " + std::to_string(indices[p]) +
                                 " out of range for " + std::to_string(w.rows()) + " features");
        for (std::size_t j = 0; j < w.cols(); ++j) latent[j] += values[p] * w(indices[p], j);
    }
    std::vector<double> scores(v.rows(), 0.0);
    for (std::size_t j = 0; j < v.cols(); ++j) {
        auto vc = v.col(j);
        for (std::size_t l = 0; l < scores.size(); ++l) scores[l] += vc[l] * latent[j];
    }
    return scores;
}

Prediction top_t(std::span<const double> scores, std::size_t t) {
    if (t > scores.size())
        throw InvalidArgument("top_t: t = " + std::to_string(t) + " exceeds the number of labels " +
                              std::to_string(scores.size()));
    std::vector<Index> ids(scores.size());
    std::iota(ids.begin(), ids.end(), Index{0});
    std::partial_sort(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(t), ids.end(),
                      [&](Index a, Index b) { return scores[a] > scores[b] || (scores[a] == scores[b] && a < b); });
    ids.resize(t);
    Prediction out;
    out.scores.reserve(t);
    for (Index id : ids) out.scores.push_back(scores[id]);
    out.label_ids = std::move(ids);
    return out;
}

Prediction predict_topt(std::span<const Index> indices, std::span<const double> values,
                        const LinearPredictor& model, std::size_t t) {
    if (t > model.num_labels())
        throw InvalidArgument("predict: t = " + std::to_string(t) + " exceeds the number of labels " +
                              std::to_string(model.num_labels()));
    return top_t(score_labels(indices, values, model), t);
}

Prediction predict_topt(const SparseMatrix& x, std::size_t row, const LinearPredictor& model, std::size_t t) {
    if (row >= x.rows()) throw DimensionError("predict: row out of range");
    return predict_topt(x.row_indices(row), x.row_values(row), model, t);
}

Metrics evaluate(const LinearPredictor& model, const Dataset& test, std::span<const std::size_t> t_values) {
    test.validate();
    if (test.num_features() > model.num_features())
        throw DimensionError("evaluate: test data has " + std::to_string(test.num_features()) +
                             " features but the model was trained on " + std::to_string(model.num_features()));
    if (test.num_labels() > model.num_labels())
        throw DimensionError("evaluate: test data has " + std::to_string(test.num_labels()) +
                             " labels but the model knows " + std::to_string(model.num_labels()));

    std::vector<std::size_t> ts(t_values.begin(), t_values.end());
    if (test.kind == DatasetKind::Multiclass) ts.push_back(1);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    for (std::size_t t : ts) {
        if (t == 0) throw InvalidArgument("evaluate: t must be positive");
        if (t > model.num_labels())
            throw InvalidArgument("evaluate: t = " + std::to_string(t) + " exceeds the number of labels " +
                                  std::to_string(model.num_labels()));
    }
    const std::size_t t_max = ts.empty() ? 0 : ts.back();

    const std::size_t n = test.size();
    // hits[i * ts.size() + a] = |top-ts[a] ∩ truth| for example i.
    std::vector<std::size_t> hits(n * ts.size(), 0);
    std::vector<char> has_labels(n, 0);
    parallel_for(
        n,
        [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                auto truth = test.labels.row_indices(i);
                if (truth.empty()) continue;
                has_labels[i] = 1;
                if (t_max == 0) continue;
                const Prediction pred = predict_topt(test.features, i, model, t_max);
                std::size_t running = 0;
                std::size_t a = 0;
                for (std::size_t r = 0; r < t_max; ++r) {
                    if (std::binary_search(truth.begin(), truth.end(), pred.label_ids[r])) ++running;
                    while (a < ts.size() && ts[a] == r + 1) hits[i * ts.size() + a++] = running;
                }
            }
        },
        64);

    Metrics metrics;
    std::vector<double> sums(ts.size(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (!has_labels[i]) {
            ++metrics.n_skipped_empty;
            continue;
        }
        ++metrics.n_evaluated;
        for (std::size_t a = 0; a < ts.size(); ++a)
            sums[a] += static_cast<double>(hits[i * ts.size() + a]) / static_cast<double>(ts[a]);
    }
    for (std::size_t a = 0; a < ts.size(); ++a)
        metrics.precision_at[ts[a]] =
            metrics.n_evaluated == 0 ? 0.0 : sums[a] / static_cast<double>(metrics.n_evaluated);
    if (test.kind == DatasetKind::Multiclass) metrics.test_error = 1.0 - metrics.precision_at.at(1);
    return metrics;
}

}  // namespace rembed
