// Serial reference kernels vs the OpenMP versions.

#include <benchmark/benchmark.h>

#include "rnnls/core.hpp"
#include "rnnls/fwht.hpp"
#include "rnnls/rng.hpp"
#include "rnnls/sketch.hpp"

namespace {

rnnls::DenseMatrix random_dense(std::size_t n, std::size_t d, std::uint64_t seed) {
    rnnls::RngStream rng(seed, 0);
    rnnls::Vector v(n * d);
    for (auto& x : v) x = rng.uniform();
    return {n, d, std::move(v)};
}

rnnls::SparseMatrix random_sparse(std::size_t n, std::size_t d, double density, std::uint64_t seed) {
    rnnls::RngStream rng(seed, 0);
    std::vector<rnnls::Triplet> t;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            if (rng.bernoulli(density)) t.push_back({i, j, rng.uniform()});
    return rnnls::SparseMatrix::from_triplets(n, d, std::move(t));
}

void BM_FwhtColumnsSerial(benchmark::State& st) {
    const auto a = random_dense(static_cast<std::size_t>(st.range(0)), 200, 1);
    for (auto _ : st) benchmark::DoNotOptimize(rnnls::serial::fwht_matrix_columns(a));
}
void BM_FwhtColumnsParallel(benchmark::State& st) {
    const auto a = random_dense(static_cast<std::size_t>(st.range(0)), 200, 1);
    for (auto _ : st) benchmark::DoNotOptimize(rnnls::fwht_matrix_columns(a));
}
BENCHMARK(BM_FwhtColumnsSerial)->Arg(4096)->Arg(16384);
BENCHMARK(BM_FwhtColumnsParallel)->Arg(4096)->Arg(16384);

void BM_GramSerial(benchmark::State& st) {
    const auto a = random_dense(static_cast<std::size_t>(st.range(0)), 200, 2);
    for (auto _ : st) benchmark::DoNotOptimize(rnnls::serial::gram(a));
}
void BM_GramParallel(benchmark::State& st) {
    const auto a = random_dense(static_cast<std::size_t>(st.range(0)), 200, 2);
    for (auto _ : st) benchmark::DoNotOptimize(rnnls::gram(a));
}
BENCHMARK(BM_GramSerial)->Arg(4096);
BENCHMARK(BM_GramParallel)->Arg(4096);

void BM_MatvecSerial(benchmark::State& st) {
    const auto a = random_dense(16384, 200, 3);
    const rnnls::Vector u(200, 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(rnnls::serial::matvec(a, u));
}
void BM_MatvecParallel(benchmark::State& st) {
    const auto a = random_dense(16384, 200, 3);
    const rnnls::Vector u(200, 1.0);
    for (auto _ : st) benchmark::DoNotOptimize(rnnls::matvec(a, u));
}
BENCHMARK(BM_MatvecSerial);
BENCHMARK(BM_MatvecParallel);

void BM_SparseGramSerial(benchmark::State& st) {
    const auto a = random_sparse(10000, 300, 0.04, 4);
    for (auto _ : st) benchmark::DoNotOptimize(rnnls::serial::gram(a));
}
void BM_SparseGramParallel(benchmark::State& st) {
    const auto a = random_sparse(10000, 300, 0.04, 4);
    for (auto _ : st) benchmark::DoNotOptimize(rnnls::gram(a));
}
BENCHMARK(BM_SparseGramSerial);
BENCHMARK(BM_SparseGramParallel);

void BM_ApplySketch(benchmark::State& st) {
    const auto a = random_dense(16384, 200, 5);
    const rnnls::Vector b(16384, 1.0);
    rnnls::RngStream rng(6, 0);
    const auto plan = rnnls::draw_sketch_plan(16384, 600, rng);
    const bool trimmed = st.range(0) != 0;
    for (auto _ : st) benchmark::DoNotOptimize(rnnls::apply_sketch(plan, a, b, trimmed));
}
BENCHMARK(BM_ApplySketch)->Arg(0)->Arg(1);

}  // namespace

BENCHMARK_MAIN();
