#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "rnnls/core.hpp"
#include "rnnls/errors.hpp"
#include "rnnls/rng.hpp"

using namespace rnnls;

namespace {

SparseMatrix random_sparse(oracle::Gen& g, std::size_t n, std::size_t d, double density) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            if (g.uniform() < density) t.push_back({i, j, g.normal()});
    return SparseMatrix::from_triplets(n, d, std::move(t));
}

oracle::Mat rows_of(const DenseMatrix& a) {
    oracle::Mat m(a.rows(), oracle::Vec(a.cols()));
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) m[i][j] = a(i, j);
    return m;
}

}  // namespace

TEST(DenseMatrix, RejectsNonFiniteAndBadSize) {
    EXPECT_THROW(DenseMatrix(2, 2, Vector{1, 2, 3}), DimensionError);
    EXPECT_THROW(DenseMatrix(1, 2, Vector{1, NAN}), InvalidArgument);
    EXPECT_THROW(DenseMatrix::from_rows({{1, 2}, {3}}), DimensionError);
}

TEST(DenseMatrix, ColumnMajorLayout) {
    const auto a = DenseMatrix::from_rows({{1, 2}, {3, 4}, {5, 6}});
    EXPECT_EQ(a(2, 1), 6);
    EXPECT_EQ(a.col(1)[0], 2);
    EXPECT_EQ(a.transpose()(1, 2), 6);
}

TEST(SparseMatrix, Invariants) {
    EXPECT_THROW(SparseMatrix::from_triplets(2, 2, {{0, 0, 1}, {0, 0, 2}}), InvalidArgument);
    EXPECT_THROW(SparseMatrix::from_triplets(2, 2, {{2, 0, 1}}), DimensionError);
    const auto s = SparseMatrix::from_triplets(3, 3, {{2, 1, 4}, {0, 2, 1}, {0, 0, 0}, {1, 1, 2}});
    EXPECT_EQ(s.nnz(), 3u);  // explicit zero dropped
    EXPECT_EQ(s.row_ptr().size(), 4u);
    EXPECT_EQ(s.row_ptr().back(), s.nnz());
    EXPECT_EQ(s.to_dense()(2, 1), 4);
    EXPECT_EQ(SparseMatrix::from_dense(s.to_dense()).to_dense(), s.to_dense());
    EXPECT_EQ(s.transpose().to_dense(), s.to_dense().transpose());
}

TEST(NnlsProblem, Validation) {
    EXPECT_THROW(NnlsProblem(DenseMatrix::identity(2), Vector{1}), DimensionError);
    EXPECT_THROW(NnlsProblem(DenseMatrix::identity(2), Vector{1, INFINITY}), InvalidArgument);
    const NnlsProblem p(SparseMatrix::from_triplets(3, 2, {}), Vector{0, 0, 0});
    EXPECT_TRUE(p.is_sparse());
    EXPECT_EQ(p.n(), 3u);
    EXPECT_EQ(p.d(), 2u);
}

TEST(Matvec, Examples) {
    EXPECT_EQ(matvec(DenseMatrix::identity(2), Vector{3, -1}), (Vector{3, -1}));
    EXPECT_EQ(matvec(SparseMatrix::from_triplets(3, 2, {}), Vector{1, 1}), (Vector{0, 0, 0}));
    EXPECT_EQ(matvec_transpose(DenseMatrix::identity(2), Vector{5, 7}), (Vector{5, 7}));
    EXPECT_EQ(matvec_transpose(DenseMatrix(4, 1, Vector{1, 1, 1, 1}), Vector{1, 1, 1, 1}), (Vector{4}));
    EXPECT_THROW(matvec(DenseMatrix::identity(2), Vector{1}), DimensionError);
    EXPECT_THROW(matvec_transpose(SparseMatrix::from_triplets(3, 2, {}), Vector{1}), DimensionError);
}

TEST(Matvec, SparseAndDenseMatchNaiveOracle) {
    oracle::Gen g(11);
    for (int trial = 0; trial < 20; ++trial) {
        const auto s = random_sparse(g, 8, 3, 0.5);
        const auto dense = s.to_dense();
        const auto u = g.vec(3);
        const auto ref = oracle::mul(rows_of(dense), u);
        const auto ys = matvec(s, u);
        const auto yd = matvec(dense, u);
        for (std::size_t i = 0; i < 8; ++i) {
            EXPECT_NEAR(ys[i], ref[i], 1e-12);
            EXPECT_NEAR(yd[i], ref[i], 1e-12);
        }
        const auto s2 = random_sparse(g, 16, 4, 0.6);
        const auto v = g.vec(16);
        const auto ref_t = oracle::mul_t(rows_of(s2.to_dense()), v);
        const auto yt = matvec_transpose(s2, v);
        const auto ytd = matvec_transpose(s2.to_dense(), v);
        for (std::size_t j = 0; j < 4; ++j) {
            EXPECT_NEAR(yt[j], ref_t[j], 1e-12);
            EXPECT_NEAR(ytd[j], ref_t[j], 1e-12);
        }
    }
}

TEST(Gram, Examples) {
    EXPECT_EQ(gram(DenseMatrix::identity(3)), DenseMatrix::identity(3));
    const Matrix a = DenseMatrix(2, 1, Vector{1, 2});
    EXPECT_EQ(gram(a)(0, 0), 5);
    EXPECT_EQ(moment(a, Vector{1, 1}), (Vector{3}));
    const Matrix eye = DenseMatrix::identity(3);
    EXPECT_EQ(moment(eye, Vector{1, 2, 3}), (Vector{1, 2, 3}));
}

TEST(Gram, MatchesTripleLoopAndIsSymmetric) {
    oracle::Gen g(12);
    const auto rows = g.mat(32, 5);
    const auto a = DenseMatrix::from_rows(rows);
    const auto ref = oracle::gram(rows);
    const auto q = gram(a);
    const auto qs = gram(SparseMatrix::from_dense(a));
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < 5; ++j) {
            EXPECT_NEAR(q(i, j), ref[i][j], 1e-12);
            EXPECT_NEAR(qs(i, j), ref[i][j], 1e-12);
            EXPECT_EQ(q(i, j), q(j, i));
            EXPECT_EQ(qs(i, j), qs(j, i));
        }
}

// Property: v^T (A u) = (A^T v)^T u for random shapes, dense and sparse.
TEST(Kernels, AdjointConsistency) {
    oracle::Gen g(13);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = g.index(1, 40), d = g.index(1, 12);
        const auto s = random_sparse(g, n, d, g.uniform(0.1, 1.0));
        const auto u = g.vec(d), v = g.vec(n);
        for (const Matrix& a : {Matrix(s), Matrix(s.to_dense())}) {
            const double lhs = dot(v, matvec(a, u));
            const double rhs = dot(matvec_transpose(a, v), u);
            EXPECT_NEAR(lhs, rhs, 1e-10 * std::max(1.0, std::abs(lhs)));
        }
    }
}

// The parallel kernels equal the serial references bit for bit, above and below
// the threading threshold.
TEST(Kernels, ParallelMatchesSerialBitwise) {
    oracle::Gen g(14);
    for (std::size_t n : {37u, 3000u}) {
        const std::size_t d = 23;
        const auto s = random_sparse(g, n, d, 0.3);
        const auto a = s.to_dense();
        const auto u = g.vec(d), v = g.vec(n);
        EXPECT_EQ(matvec(a, u), serial::matvec(a, u));
        EXPECT_EQ(matvec(s, u), serial::matvec(s, u));
        EXPECT_EQ(matvec_transpose(a, v), serial::matvec_transpose(a, v));
        EXPECT_EQ(matvec_transpose(s, v), serial::matvec_transpose(s, v));
        EXPECT_EQ(gram(a), serial::gram(a));
        EXPECT_EQ(gram(s), serial::gram(s));
    }
}

TEST(Kernels, ResidualNormSq) {
    const Matrix a = DenseMatrix::identity(2);
    EXPECT_EQ(residual_norm_sq(a, Vector{1, -1}, Vector{1, 0}), 1.0);
    EXPECT_DOUBLE_EQ(norm2(Vector{3, 4}), 5.0);
}

TEST(Rng, DeterministicStreams) {
    RngStream a(42, 7), b(42, 7), c(42, 8);
    bool differs = false;
    for (int i = 0; i < 10000; ++i) {
        const auto x = a.next_u64();
        EXPECT_EQ(x, b.next_u64());
        differs |= x != c.next_u64();
    }
    EXPECT_TRUE(differs);
    EXPECT_EQ(RngStream(1, 2).derive(3).next_u64(), RngStream(1, 2).derive(3).next_u64());
    EXPECT_NE(RngStream(1, 2).derive(3).next_u64(), RngStream(1, 2).derive(4).next_u64());
}

TEST(Rng, VariateRanges) {
    RngStream r(5, 0);
    double mean = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        mean += u;
        const double s = r.sign();
        ASSERT_TRUE(s == 1.0 || s == -1.0);
        ASSERT_LT(r.uniform_index(7), 7u);
    }
    mean /= 100000;
    EXPECT_NEAR(mean, 0.5, 3 * std::sqrt(1.0 / 12 / 100000));
}
