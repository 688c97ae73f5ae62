#include <doctest.h>

#include <cmath>
#include <limits>

#include "naive.hpp"
#include "rembed/error.hpp"
#include "rembed/oracle.hpp"
#include "rembed/parallel.hpp"
#include "rembed/sparse.hpp"

using namespace rembed;

namespace {

struct ThreadCap {
    explicit ThreadCap(std::size_t n) { set_max_threads(n); }
    ~ThreadCap() { set_max_threads(0); }
};

}  // namespace

TEST_CASE("CSR construction validates its invariants") {
    CHECK_NOTHROW(SparseMatrix(2, 3, {0, 1, 2}, {2, 0}, {1.0, 2.0}));
    CHECK_THROWS_AS(SparseMatrix(2, 3, {0, 1}, {2}, {1.0}), InvalidArgument);              // offsets length
    CHECK_THROWS_AS(SparseMatrix(2, 3, {1, 1, 2}, {0, 1}, {1.0, 1.0}), InvalidArgument);   // offsets[0]
    CHECK_THROWS_AS(SparseMatrix(2, 3, {0, 2, 1}, {0, 1}, {1.0, 1.0}), InvalidArgument);   // decreasing
    CHECK_THROWS_AS(SparseMatrix(1, 3, {0, 2}, {1, 1}, {1.0, 1.0}), InvalidArgument);      // repeated column
    CHECK_THROWS_AS(SparseMatrix(1, 3, {0, 2}, {2, 1}, {1.0, 1.0}), InvalidArgument);      // unsorted
    CHECK_THROWS_AS(SparseMatrix(1, 3, {0, 1}, {3}, {1.0}), InvalidArgument);              // out of range
    CHECK_THROWS_AS(SparseMatrix(1, 3, {0, 1}, {0}, {NAN}), InvalidArgument);              // non-finite
    CHECK_THROWS_AS(SparseMatrix(1, 3, {0, 1}, {0}, {1.0, 2.0}), InvalidArgument);         // length mismatch
    CHECK_THROWS_AS(SparseMatrix::from_rows(3, {{{1, 1.0}, {1, 2.0}}}), InvalidArgument);  // duplicate
}

TEST_CASE("spmm: identity and annihilator") {
    RandomStream rng(1);
    const DenseMatrix b = rng.gaussian_matrix(3, 2);
    CHECK(spmm(SparseMatrix::identity(3), b) == b);
    const DenseMatrix zero = spmm(SparseMatrix(3, 3), b);
    CHECK(zero == DenseMatrix(3, 2));
}

TEST_CASE("spmm matches the naive triple loop") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        RandomStream rng(seed);
        const SparseMatrix a = oracle::random_sparse(20, 15, 0.2, rng);
        const DenseMatrix b = rng.gaussian_matrix(15, 4);
        CHECK(naive::rel_err(spmm(a, b), naive::mul(naive::from(a), naive::from(b))) <= 1e-12);
    }
}

TEST_CASE("spmm_t: identity, single-entry expansion, naive oracle") {
    RandomStream rng(2);
    const DenseMatrix b = rng.gaussian_matrix(3, 2);
    CHECK(spmm_t(SparseMatrix::identity(3), b) == b);

    const SparseMatrix single(2, 4, {0, 1, 1}, {2}, {5.0});
    const DenseMatrix e0(2, 1, {1.0, 0.0});
    CHECK(spmm_t(single, e0) == DenseMatrix(4, 1, {0.0, 0.0, 5.0, 0.0}));

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        RandomStream r(seed + 100);
        const SparseMatrix a = oracle::random_sparse(20, 15, 0.2, r);
        const DenseMatrix bt = r.gaussian_matrix(20, 3);
        CHECK(naive::rel_err(spmm_t(a, bt), naive::mul(naive::transpose(naive::from(a)), naive::from(bt))) <=
              1e-12);
    }
}

TEST_CASE("kernels reject bad operands") {
    const SparseMatrix a = SparseMatrix::identity(3);
    CHECK_THROWS_AS(spmm(a, DenseMatrix(4, 2)), DimensionError);
    CHECK_THROWS_AS(spmm_t(a, DenseMatrix(2, 2)), DimensionError);
    DenseMatrix bad(3, 1);
    bad(1, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(spmm(a, bad), InvalidArgument);
    CHECK_THROWS_AS(spmm_t(a, bad), InvalidArgument);
}

TEST_CASE("stored zeros do not change products") {
    const SparseMatrix with_zero(2, 3, {0, 2, 3}, {0, 2, 1}, {1.5, 0.0, -2.0});
    const SparseMatrix without(2, 3, {0, 1, 2}, {0, 1}, {1.5, -2.0});
    RandomStream rng(3);
    const DenseMatrix b = rng.gaussian_matrix(3, 2);
    const DenseMatrix bt = rng.gaussian_matrix(2, 2);
    CHECK(spmm(with_zero, b) == spmm(without, b));
    CHECK(spmm_t(with_zero, bt) == spmm_t(without, bt));
}

TEST_CASE("property: AᵀAB via spmm_t∘spmm equals the naive product") {
    RandomStream sizes(4);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + sizes.below(50), d = 1 + sizes.below(50), m = 1 + sizes.below(6);
        RandomStream rng(1000 + trial);
        const SparseMatrix a = oracle::random_sparse(n, d, 0.25, rng);
        const DenseMatrix b = rng.gaussian_matrix(d, m);
        const naive::Mat an = naive::from(a);
        const naive::Mat want = naive::mul(naive::transpose(an), naive::mul(an, naive::from(b)));
        CHECK(naive::rel_err(spmm_t(a, spmm(a, b)), want) <= 1e-10);
    }
}

TEST_CASE("property: products are bit-identical under any thread cap") {
    RandomStream rng(5);
    const SparseMatrix a = oracle::random_sparse(3000, 200, 0.02, rng);
    const DenseMatrix b = rng.gaussian_matrix(200, 7);
    const DenseMatrix bt = rng.gaussian_matrix(3000, 7);
    DenseMatrix ref, ref_t;
    {
        ThreadCap cap(1);
        ref = spmm(a, b);
        ref_t = spmm_t(a, bt);
    }
    for (std::size_t threads : {2u, 3u, 5u, 8u}) {
        ThreadCap cap(threads);
        CHECK(spmm(a, b) == ref);
        CHECK(spmm_t(a, bt) == ref_t);
        CHECK(spmm(a, b) == spmm(a, b));
    }
}

TEST_CASE("row_l2_normalize") {
    SUBCASE("(3,4) becomes (0.6,0.8)") {
        const SparseMatrix a = SparseMatrix::from_rows(2, {{{0, 3.0}, {1, 4.0}}});
        const SparseMatrix n = row_l2_normalize(a);
        CHECK(n.values()[0] == doctest::Approx(0.6).epsilon(1e-15));
        CHECK(n.values()[1] == doctest::Approx(0.8).epsilon(1e-15));
    }
    SUBCASE("zero rows stay zero, unit rows are unchanged") {
        const SparseMatrix a = SparseMatrix::from_rows(3, {{}, {{0, 1.0}}, {{1, 0.0}}});
        CHECK(row_l2_normalize(a) == a);
    }
    SUBCASE("idempotent") {
        RandomStream rng(6);
        const SparseMatrix a = oracle::random_sparse(40, 30, 0.2, rng);
        const SparseMatrix once = row_l2_normalize(a);
        const SparseMatrix twice = row_l2_normalize(once);
        for (std::size_t p = 0; p < once.nnz(); ++p)
            CHECK(std::abs(once.values()[p] - twice.values()[p]) <= 1e-15);
        for (std::size_t i = 0; i < once.rows(); ++i) {
            double ss = 0.0;
            for (double v : once.row_values(i)) ss += v * v;
            if (!once.row_values(i).empty()) CHECK(std::sqrt(ss) == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
}
