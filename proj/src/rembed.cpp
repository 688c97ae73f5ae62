#include "rembed/rembed.hpp"

#include <algorithm>
#include <string>

#include "rembed/error.hpp"
#include "rembed/rng.hpp"

namespace rembed {

void RembedConfig::validate(std::size_t num_labels) const {
    if (embedding_dim < 1) throw InvalidArgument("rembed: embedding dimension k must be at least 1");
    if (power_iterations < 1) throw InvalidArgument("rembed: power iterations q must be at least 1");
    solver.validate();
    if (probe_width() > num_labels)
        throw InvalidArgument("rembed: k + p = " + std::to_string(probe_width()) +
                              " exceeds the number of labels c = " + std::to_string(num_labels));
}

HatProduct hat_product(const SparseMatrix& x, const SparseMatrix& y, const DenseMatrix& q,
                       const SolverParams& solver) {
    if (x.rows() != y.rows()) throw DimensionError("hat_product: X and Y have different row counts");
    if (q.rows() != y.cols())
        throw DimensionError("hat_product: Q has " + std::to_string(q.rows()) + " rows but Y has " +
                             std::to_string(y.cols()) + " labels");
    if (q.cols() < 1) throw DimensionError("hat_product: Q needs at least one column");
    const DenseMatrix z = spmm(y, q);
    RidgeSolution sol = ridge_solve_multi(x, z, solver);
    return {spmm_t(y, spmm(x, sol.w)), std::move(sol.report)};
}

RembedResult rembed(const SparseMatrix& x, const SparseMatrix& y, const RembedConfig& config) {
    config.validate(y.cols());
    if (x.rows() < 1) throw InvalidArgument("rembed: need at least one example");
    if (x.rows() != y.rows()) throw DimensionError("rembed: X and Y have different row counts");

    RandomStream probe_rng = RandomStream(config.seed).fork(0);
    RandomStream repair_rng = RandomStream(config.seed).fork(1);

    RembedResult result;
    DenseMatrix q = probe_rng.gaussian_matrix(y.cols(), config.probe_width());
    for (std::size_t it = 0; it < config.power_iterations; ++it) {
        HatProduct mq = hat_product(x, y, q, config.solver);
        result.solves.merge(mq.report);
        q = orthonormalize(mq.value, repair_rng);
    }

    HatProduct mq = hat_product(x, y, q, config.solver);
    result.solves.merge(mq.report);
    DenseMatrix t = matmul_tn(q, mq.value);
    const DenseMatrix tt = t.transposed();
    for (std::size_t j = 0; j < t.cols(); ++j)
        for (std::size_t i = 0; i < t.rows(); ++i) t(i, j) = 0.5 * (t(i, j) + tt(i, j));
    EigResult eig = symmetric_eig(t);

    const std::size_t k = config.embedding_dim;
    result.embedding.basis = matmul(q, eig.eigenvectors.left_cols(k));
    canonicalize_signs(result.embedding.basis);
    result.ritz_values = eig.eigenvalues;
    // M is PSD, so negative Ritz values are inexact-solve noise.
    result.embedding.spectrum.assign(eig.eigenvalues.begin(), eig.eigenvalues.begin() + static_cast<std::ptrdiff_t>(k));
    for (double& v : result.embedding.spectrum) v = std::max(v, 0.0);
    result.embedding.config = config;
    return result;
}

std::vector<double> embed_labels(std::span<const Index> labels, const LabelEmbedding& embedding) {
    const auto& v = embedding.basis;
    std::vector<double> z(v.cols(), 0.0);
    for (Index l : labels) {
        if (l >= v.rows())
            throw InvalidArgument("embed_labels: label " + std::to_string(l) + " out of range for " +
                                  std::to_string(v.rows()) + " labels");
        for (std::size_t j = 0; j < v.cols(); ++j) z[j] += v(l, j);
    }
    return z;
}

}  // namespace rembed
