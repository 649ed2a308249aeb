#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "rnnls/errors.hpp"
#include "rnnls/fwht.hpp"
#include "rnnls/sketch.hpp"

using namespace rnnls;

namespace {

DenseMatrix random_dense(oracle::Gen& g, std::size_t n, std::size_t d) { return DenseMatrix::from_rows(g.mat(n, d)); }

SketchPlan full_plan(std::size_t n) {
    SketchPlan p;
    p.n = n;
    p.r_target = n;
    p.sign_diagonal.assign(n, 1.0);
    p.kept_rows.resize(n);
    std::iota(p.kept_rows.begin(), p.kept_rows.end(), std::size_t{0});
    p.row_scales.assign(n, 1.0);
    return p;
}

}  // namespace

TEST(SketchPlan, Validation) {
    RngStream rng(1, 0);
    EXPECT_THROW(draw_sketch_plan(8, 0, rng), InvalidArgument);
    EXPECT_THROW(draw_sketch_plan(8, 8, rng), InvalidArgument);
    EXPECT_THROW(draw_sketch_plan(6, 2, rng), InvalidArgument);
    EXPECT_THROW(SamplingProbabilities(Vector{0.5, -0.1, 0.6}), InvalidArgument);
    EXPECT_THROW(SamplingProbabilities(Vector{0.5, 0.4}), InvalidArgument);
}

TEST(SketchPlan, KeptCountMonteCarlo) {
    // n = 4, r = 3: kept count is Binomial(4, 3/4), mean 3, variance 3/4.
    RngStream rng(2, 0);
    const int draws = 100000;
    double sum = 0.0, sign_sum = 0.0;
    for (int t = 0; t < draws; ++t) {
        const auto plan = draw_sketch_plan(4, 3, rng);
        sum += static_cast<double>(plan.kept());
        sign_sum += plan.sign_diagonal[0];
        for (double s : plan.row_scales) ASSERT_DOUBLE_EQ(s, std::sqrt(4.0 / 3.0));
        ASSERT_TRUE(std::is_sorted(plan.kept_rows.begin(), plan.kept_rows.end()));
    }
    EXPECT_NEAR(sum / draws, 3.0, 3 * std::sqrt(0.75 / draws));
    EXPECT_NEAR(sign_sum / draws, 0.0, 3 * std::sqrt(1.0 / draws));
}

TEST(SketchPlan, Deterministic) {
    RngStream a(3, 9), b(3, 9);
    const auto p = draw_sketch_plan(64, 10, a);
    const auto q = draw_sketch_plan(64, 10, b);
    EXPECT_EQ(p.kept_rows, q.kept_rows);
    EXPECT_EQ(p.sign_diagonal, q.sign_diagonal);
    EXPECT_EQ(p.row_scales, q.row_scales);
}

TEST(ApplySketch, FullPlanIsHadamardTimesA) {
    oracle::Gen g(31);
    const auto a = random_dense(g, 8, 3);
    const auto b = g.vec(8);
    const auto out = apply_sketch(full_plan(8), a, b);
    EXPECT_EQ(out.a, fwht_matrix_columns(a));
    Vector hb = b;
    fwht_inplace(hb);
    EXPECT_EQ(out.b, hb);
}

TEST(ApplySketch, HandComputedFourByOne) {
    // H_4 / 2 applied to D a with D = diag(1, -1, 1, -1), a = (1, 2, 3, 4):
    // D a = (1, -2, 3, -4); H_4 (D a) = (-2, 10, 0, -4); halved = (-1, 5, 0, -2).
    SketchPlan plan;
    plan.n = 4;
    plan.r_target = 2;
    plan.sign_diagonal = {1, -1, 1, -1};
    plan.kept_rows = {1, 2};
    plan.row_scales = {std::sqrt(2.0), std::sqrt(2.0)};
    const DenseMatrix a(4, 1, Vector{1, 2, 3, 4});
    const Vector b{0, 0, 0, 1};  // D b = (0, 0, 0, -1); H = (-1, 1, 1, -1) / 2
    for (bool trimmed : {false, true}) {
        const auto out = apply_sketch(plan, a, b, trimmed);
        ASSERT_EQ(out.a.rows(), 2u);
        EXPECT_NEAR(out.a(0, 0), 5 * std::sqrt(2.0), 1e-12);
        EXPECT_NEAR(out.a(1, 0), 0.0, 1e-12);
        EXPECT_NEAR(out.b[0], 0.5 * std::sqrt(2.0), 1e-12);
        EXPECT_NEAR(out.b[1], 0.5 * std::sqrt(2.0), 1e-12);
    }
}

TEST(ApplySketch, EmptyPlanAndDimensionErrors) {
    SketchPlan plan = full_plan(4);
    plan.kept_rows.clear();
    plan.row_scales.clear();
    EXPECT_THROW(apply_sketch(plan, DenseMatrix(4, 1), Vector(4)), EmptySketchError);
    EXPECT_THROW(apply_sketch(full_plan(4), DenseMatrix(8, 1), Vector(8)), DimensionError);
}

// Property: the sketched residual equals the residual computed through the full
// n-dimensional transform followed by selection and scaling.
TEST(ApplySketch, TwoPathResidualIdentity) {
    oracle::Gen g(32);
    RngStream rng(33, 0);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t n = std::size_t{1} << g.index(2, 9), d = g.index(1, 6);
        const auto a = random_dense(g, n, d);
        const auto b = g.vec(n);
        const auto x = g.vec(d);
        const auto plan = draw_sketch_plan(n, g.index(1, n - 1), rng);
        if (plan.kept() == 0) continue;

        const auto h = oracle::hadamard(n);
        const auto ax = matvec(a, x);
        oracle::Vec dr(n);
        for (std::size_t i = 0; i < n; ++i) dr[i] = plan.sign_diagonal[i] * (ax[i] - b[i]);
        const auto hdr = oracle::mul(h, dr);
        double ref = 0.0;
        for (std::size_t k = 0; k < plan.kept(); ++k) {
            const double v = plan.row_scales[k] * hdr[plan.kept_rows[k]];
            ref += v * v;
        }
        for (bool trimmed : {false, true}) {
            const auto sk = apply_sketch(plan, a, b, trimmed);
            const auto sax = matvec(sk.a, x);
            double got = 0.0;
            for (std::size_t k = 0; k < sk.b.size(); ++k) got += (sax[k] - sk.b[k]) * (sax[k] - sk.b[k]);
            ASSERT_NEAR(got, ref, 1e-10 * std::max(1.0, ref));
        }
    }
}

TEST(ApplySketch, SparseInputMatchesDense) {
    oracle::Gen g(34);
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < 32; ++i)
        for (std::size_t j = 0; j < 4; ++j)
            if (g.uniform() < 0.3) t.push_back({i, j, g.uniform()});
    const auto s = SparseMatrix::from_triplets(32, 4, t);
    const auto b = g.vec(32);
    RngStream rng(35, 0);
    const auto plan = draw_sketch_plan(32, 12, rng);
    const auto from_sparse = apply_sketch(plan, Matrix(s), b);
    const auto from_dense = apply_sketch(plan, s.to_dense(), b);
    for (std::size_t i = 0; i < from_dense.a.rows(); ++i)
        for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(from_sparse.a(i, j), from_dense.a(i, j), 1e-12);
}

TEST(SubspaceSample, DegenerateCases) {
    oracle::Gen g(36);
    const auto phi = random_dense(g, 16, 3);
    RngStream rng(37, 0);
    EXPECT_EQ(subspace_sample(phi, 16, SamplingProbabilities::uniform(16), rng), phi);

    Vector p(16, 0.0);
    p[0] = 1.0;
    const auto one = subspace_sample(phi, 1, SamplingProbabilities(p), rng);
    ASSERT_EQ(one.rows(), 1u);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(one(0, j), phi(0, j));
}

TEST(SubspaceSample, ExpectedRowCount) {
    oracle::Gen g(38);
    Vector w(64);
    for (auto& x : w) x = g.uniform(0.1, 3.0);
    const auto p = SamplingProbabilities::proportional(w);
    const std::size_t r = 20;
    double expect = 0.0, var = 0.0;
    for (std::size_t i = 0; i < 64; ++i) {
        const double q = std::min(1.0, r * p[i]);
        expect += q;
        var += q * (1 - q);
    }
    EXPECT_LE(expect, static_cast<double>(r) + 1e-9);
    RngStream rng(39, 0);
    const int draws = 10000;
    double sum = 0.0;
    for (int t = 0; t < draws; ++t) sum += static_cast<double>(draw_subspace_plan(p, r, rng).kept());
    EXPECT_NEAR(sum / draws, expect, 3 * std::sqrt(var / draws));
}

TEST(SubspaceSample, UnbiasedGram) {
    oracle::Gen g(40);
    const auto phi = random_dense(g, 64, 3);
    const auto exact = gram(phi);
    Vector w(64);
    for (auto& x : w) x = g.uniform(0.2, 1.0);
    const auto p = SamplingProbabilities::proportional(w);
    RngStream rng(41, 0);
    const int draws = 10000;
    std::vector<double> sum(9, 0.0), sum_sq(9, 0.0);
    for (int t = 0; t < draws; ++t) {
        const auto q = gram(subspace_sample(phi, 16, p, rng));
        for (std::size_t k = 0; k < 9; ++k) {
            const double v = q(k / 3, k % 3);
            sum[k] += v;
            sum_sq[k] += v * v;
        }
    }
    for (std::size_t k = 0; k < 9; ++k) {
        const double mean = sum[k] / draws;
        const double sd = std::sqrt((sum_sq[k] / draws - mean * mean) / draws);
        EXPECT_NEAR(mean, exact(k / 3, k % 3), 3 * sd) << "entry " << k;
    }
}

TEST(RandomizedNnls, ConsistentProblemHasUnitRelativeError) {
    oracle::Gen g(42);
    const std::size_t n = 200, d = 5;
    oracle::Mat rows(n, oracle::Vec(d));
    for (auto& r : rows)
        for (auto& x : r) x = g.uniform();
    const auto a = DenseMatrix::from_rows(rows);
    const Vector xs{0.5, 0.0, 1.5, 0.25, 2.0};
    const NnlsProblem p(a, matvec(a, xs));
    const auto res = randomized_nnls(p, 60, RngStream(43, 0));
    EXPECT_EQ(res.padded.padded_n, 256u);
    EXPECT_LE(std::sqrt(res.solution.residual_norm_sq), 1e-6 * norm2(p.b()));
    for (std::size_t j = 0; j < d; ++j) EXPECT_NEAR(res.solution.x[j], xs[j], 1e-6);
}

TEST(RandomizedNnls, NearFullSamplingAndOptimality) {
    oracle::Gen g(44);
    std::vector<double> ratios;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto a = random_dense(g, 16, 3);
        const NnlsProblem p(a, g.vec(16));
        const double exact = std::sqrt(solve(p).residual_norm_sq);
        const auto res = randomized_nnls(p, 15, RngStream(seed, 0));
        const double ratio = std::sqrt(res.solution.residual_norm_sq) / exact;
        EXPECT_GE(ratio, 1 - 1e-10);
        ratios.push_back(ratio);
    }
    std::nth_element(ratios.begin(), ratios.begin() + 50, ratios.end());
    EXPECT_LE(ratios[50], 1 + 1e-3);
}

TEST(RandomizedNnls, DeterministicAndTrimmedAgrees) {
    oracle::Gen g(45);
    const NnlsProblem p(random_dense(g, 100, 4), g.vec(100));
    const auto r1 = randomized_nnls(p, 30, RngStream(46, 1));
    const auto r2 = randomized_nnls(p, 30, RngStream(46, 1));
    EXPECT_EQ(r1.solution.x, r2.solution.x);
    EXPECT_EQ(r1.plan.kept_rows, r2.plan.kept_rows);
    RandomizedOptions opt;
    opt.trimmed_transform = true;
    const auto r3 = randomized_nnls(p, 30, RngStream(46, 1), opt);
    EXPECT_EQ(r3.plan.kept_rows, r1.plan.kept_rows);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(r3.solution.x[j], r1.solution.x[j], 1e-9);
}

TEST(RandomizedNnls, RetriesAndErrors) {
    oracle::Gen g(47);
    const NnlsProblem p(random_dense(g, 64, 20), g.vec(64));
    EXPECT_THROW(randomized_nnls(p, 64, RngStream(1, 0)), InvalidArgument);
    try {
        randomized_nnls(p, 1, RngStream(1, 0));
        FAIL() << "expected retries_exhausted";
    } catch (const SolverError& e) {
        EXPECT_EQ(e.kind(), SolverError::Kind::retries_exhausted);
    }
}

TEST(SufficientR, SubstitutionAndMonotonicity) {
    // The guarantee is stated for eps <= 1/3; 0.5 is rejected.
    EXPECT_THROW(sufficient_r(1 << 20, 10, 0.5), InvalidArgument);
    EXPECT_THROW(sufficient_r(1 << 20, 10, 0.0), InvalidArgument);
    const auto s = sufficient_r(1 << 20, 10, 1.0 / 3.0);
    const double r = static_cast<double>(s.r);
    EXPECT_GE(r / std::log2(r), 342.0 * 11 * 20 / (1.0 / 9.0));
    EXPECT_TRUE(s.satisfies_condition);
    EXPECT_TRUE(s.exceeds_n);  // the bound is vacuous at this size
    for (double eps : {0.05, 0.1, 0.2, 0.3}) {
        std::uint64_t prev = 0;
        for (std::size_t d : {1u, 5u, 10u, 50u, 200u}) {
            const auto cur = sufficient_r(1 << 16, d, eps).r;
            EXPECT_GE(cur, prev);
            prev = cur;
        }
    }
    for (std::size_t d : {1u, 10u, 100u}) {
        EXPECT_GE(sufficient_r(1 << 16, d, 0.1).r, sufficient_r(1 << 16, d, 0.2).r);
        EXPECT_GE(sufficient_r(1 << 21, d, 0.1).r, sufficient_r(1 << 20, d, 0.1).r);
    }
}
