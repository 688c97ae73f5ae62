#include <doctest.h>

#include <cmath>

#include "naive.hpp"
#include "rembed/error.hpp"
#include "rembed/oracle.hpp"
#include "rembed/parallel.hpp"
#include "rembed/rembed.hpp"

using namespace rembed;

namespace {

SparseMatrix one_hot(const std::vector<Index>& labels, std::size_t c) {
    std::vector<std::vector<std::pair<Index, double>>> rows;
    for (Index l : labels) rows.push_back({{l, 1.0}});
    return SparseMatrix::from_rows(c, rows);
}

RembedConfig tight_config(std::size_t k, std::size_t p, std::size_t q, double ridge, std::uint64_t seed = 0) {
    RembedConfig config;
    config.embedding_dim = k;
    config.oversampling = p;
    config.power_iterations = q;
    config.solver.ridge = ridge;
    config.solver.rel_tolerance = 1e-12;
    config.seed = seed;
    return config;
}

double largest_angle(const DenseMatrix& a, const DenseMatrix& b) { return oracle::principal_angles(a, b).back(); }

}  // namespace

TEST_CASE("hat_product: identity design reduces to Yᵀ·Y·Q") {
    RandomStream rng(1);
    const SparseMatrix y = oracle::random_multilabel(12, 7, rng);
    const DenseMatrix q = rng.gaussian_matrix(7, 3);
    SolverParams solver;
    solver.rel_tolerance = 1e-12;
    const HatProduct mq = hat_product(SparseMatrix::identity(12), y, q, solver);
    const naive::Mat yn = naive::from(y);
    CHECK(naive::rel_err(mq.value, naive::mul(naive::transpose(yn), naive::mul(yn, naive::from(q)))) <= 1e-15);
}

TEST_CASE("hat_product: orthonormal label columns give back Q") {
    // Columns of Y pick distinct rows, so YᵀY = I.
    const SparseMatrix y = SparseMatrix::from_rows(4, {{{2, 1.0}}, {}, {{0, 1.0}}, {{3, 1.0}}, {{1, 1.0}}, {}});
    RandomStream rng(2);
    const DenseMatrix q = rng.gaussian_matrix(4, 2);
    SolverParams solver;
    solver.rel_tolerance = 1e-12;
    CHECK(relative_frobenius_error(hat_product(SparseMatrix::identity(6), y, q, solver).value, q) <= 1e-15);
}

TEST_CASE("hat_product matches the explicitly formed operator") {
    RandomStream rng(3);
    const SparseMatrix x = oracle::random_sparse(30, 20, 0.3, rng);
    const SparseMatrix y = oracle::random_multilabel(30, 25, rng);
    const DenseMatrix q = rng.gaussian_matrix(25, 6);
    SolverParams solver;
    solver.ridge = 1e-3;
    solver.rel_tolerance = 1e-13;
    const DenseMatrix want = matmul(oracle::hat_operator(x.to_dense(), y.to_dense(), 1e-3), q);
    CHECK(relative_frobenius_error(hat_product(x, y, q, solver).value, want) <= 1e-8);

    CHECK_THROWS_AS(hat_product(x, y, DenseMatrix(24, 2), solver), DimensionError);
    CHECK_THROWS_AS(hat_product(x, SparseMatrix(29, 25), q, solver), DimensionError);
}

TEST_CASE("rembed: diagonal operator from class counts (5,3,2,1)") {
    const SparseMatrix y = one_hot({0, 0, 0, 0, 0, 1, 1, 1, 2, 2, 3}, 4);
    const RembedResult r = rembed::rembed(SparseMatrix::identity(11), y, tight_config(2, 2, 3, 0.0));
    CHECK(r.embedding.spectrum[0] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(r.embedding.spectrum[1] == doctest::Approx(3.0).epsilon(1e-12));
    const DenseMatrix& v = r.embedding.basis;
    CHECK(v(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(v(1, 0)) + std::abs(v(2, 0)) + std::abs(v(3, 0)) <= 1e-12);
    CHECK(std::abs(v(0, 1)) + std::abs(v(2, 1)) + std::abs(v(3, 1)) <= 1e-12);
}

TEST_CASE("rembed: k + p = c covers the whole label space") {
    RandomStream rng(4);
    const SparseMatrix x = oracle::random_sparse(40, 20, 0.3, rng);
    const SparseMatrix y = oracle::random_multilabel(40, 10, rng);
    const RembedResult r = rembed::rembed(x, y, tight_config(4, 6, 1, 1e-2));
    const auto exact = oracle::exact_embedding(x.to_dense(), y.to_dense(), 10, 1e-2);
    REQUIRE(r.ritz_values.size() == 10);
    for (std::size_t i = 0; i < 10; ++i)
        CHECK(r.ritz_values[i] == doctest::Approx(exact.all_eigenvalues[i]).epsilon(1e-9).scale(1.0));
    CHECK(orthonormality_error(r.embedding.basis) <= 1e-10);
}

TEST_CASE("rembed recovers the exact top-k eigenspace") {
    const auto inst = oracle::verification_instance(1, 11);
    const auto exact = oracle::exact_embedding(inst.x.to_dense(), inst.y.to_dense(), 5, 1e-6);
    const RembedResult r = rembed::rembed(inst.x, inst.y, tight_config(5, 5, 20, 1e-6));
    CHECK(largest_angle(r.embedding.basis, exact.basis) <= 1e-6);
    for (std::size_t i = 0; i < 5; ++i) CHECK(r.embedding.spectrum[i] <= exact.eigenvalues[i] + 1e-8);
}

TEST_CASE("rembed rejects bad configurations") {
    RandomStream rng(5);
    const SparseMatrix x = oracle::random_sparse(10, 5, 0.5, rng);
    const SparseMatrix y = oracle::random_multilabel(10, 6, rng);
    CHECK_THROWS_AS(rembed::rembed(x, y, tight_config(4, 3, 1, 0.1)), InvalidArgument);  // k + p > c
    CHECK_THROWS_AS(rembed::rembed(x, y, tight_config(0, 3, 1, 0.1)), InvalidArgument);
    CHECK_THROWS_AS(rembed::rembed(x, y, tight_config(2, 3, 0, 0.1)), InvalidArgument);
    CHECK_THROWS_AS(rembed::rembed(x, SparseMatrix(9, 6), tight_config(2, 2, 1, 0.1)), DimensionError);
}

TEST_CASE("rembed surfaces loose inner solves in its report instead of failing") {
    const auto inst = oracle::verification_instance(1, 11);
    RembedConfig config = tight_config(5, 5, 2, 1e-6);
    config.solver.max_iterations = 2;
    const RembedResult r = rembed::rembed(inst.x, inst.y, config);
    CHECK_FALSE(r.solves.all_converged());
    CHECK(r.solves.columns.size() == 3 * 10);
    CHECK(orthonormality_error(r.embedding.basis) <= 1e-8);
}

TEST_CASE("property: rembed is deterministic, including across thread caps") {
    RandomStream rng(6);
    const SparseMatrix x = oracle::random_sparse(600, 80, 0.05, rng);
    const SparseMatrix y = oracle::random_multilabel(600, 40, rng);
    RembedConfig config = tight_config(6, 4, 3, 1e-2, 99);
    config.solver.rel_tolerance = 1e-8;
    set_max_threads(1);
    const RembedResult a = rembed::rembed(x, y, config);
    set_max_threads(4);
    const RembedResult b = rembed::rembed(x, y, config);
    set_max_threads(0);
    const RembedResult c = rembed::rembed(x, y, config);
    CHECK(a.embedding.basis == b.embedding.basis);
    CHECK(a.embedding.basis == c.embedding.basis);
    CHECK(a.embedding.spectrum == b.embedding.spectrum);
    CHECK(a.embedding.spectrum == c.embedding.spectrum);
}

TEST_CASE("property: Ritz values never exceed the exact eigenvalues; spectrum is PSD and sorted") {
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        RandomStream rng(700 + seed);
        const std::size_t c = 8 + rng.below(33);  // c <= 40
        const std::size_t d = 5 + rng.below(30);
        const std::size_t n = 20 + rng.below(40);
        const SparseMatrix x = oracle::random_sparse(n, d, 0.3, rng);
        const SparseMatrix y = oracle::random_multilabel(n, c, rng);
        const std::size_t k = 1 + rng.below(4);
        const RembedResult r = rembed::rembed(x, y, tight_config(k, 3, 4, 1e-3, seed));
        const auto exact = oracle::exact_embedding(x.to_dense(), y.to_dense(), k, 1e-3);
        for (std::size_t i = 0; i < k; ++i) {
            CHECK(r.embedding.spectrum[i] <= exact.eigenvalues[i] + 1e-8);
            CHECK(r.embedding.spectrum[i] >= -1e-8);
            if (i > 0) CHECK(r.embedding.spectrum[i] <= r.embedding.spectrum[i - 1]);
        }
        CHECK(orthonormality_error(r.embedding.basis) <= 1e-8);
    }
}

TEST_CASE("more power iterations bring the subspace closer") {
    const auto inst = oracle::verification_instance(1, 11);
    const auto exact = oracle::exact_embedding(inst.x.to_dense(), inst.y.to_dense(), 5, 1e-6);
    const double coarse = largest_angle(rembed::rembed(inst.x, inst.y, tight_config(5, 5, 2, 1e-6)).embedding.basis, exact.basis);
    const double fine = largest_angle(rembed::rembed(inst.x, inst.y, tight_config(5, 5, 20, 1e-6)).embedding.basis, exact.basis);
    CHECK(fine <= coarse);
}

TEST_CASE("different seeds converge to the same subspace on a gap-separated instance") {
    const auto inst = oracle::verification_instance(1, 11);
    const DenseMatrix a = rembed::rembed(inst.x, inst.y, tight_config(5, 5, 20, 1e-6, 1)).embedding.basis;
    const DenseMatrix b = rembed::rembed(inst.x, inst.y, tight_config(5, 5, 20, 1e-6, 2)).embedding.basis;
    CHECK(largest_angle(a, b) <= 1e-6);
}

TEST_CASE("embed_labels") {
    LabelEmbedding e;
    RandomStream rng(7);
    e.basis = rng.gaussian_matrix(5, 3);
    const std::vector<Index> three{3};
    const auto z3 = embed_labels(three, e);
    for (std::size_t j = 0; j < 3; ++j) CHECK(z3[j] == e.basis(3, j));

    CHECK(embed_labels(std::vector<Index>{}, e) == std::vector<double>(3, 0.0));

    const auto z12 = embed_labels(std::vector<Index>{1, 2}, e);
    for (std::size_t j = 0; j < 3; ++j) CHECK(z12[j] == e.basis(1, j) + e.basis(2, j));

    CHECK_THROWS_AS(embed_labels(std::vector<Index>{5}, e), InvalidArgument);
}
