#include "rnnls/sketch.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rnnls/errors.hpp"

namespace rnnls {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Column-major (n x cols) buffer holding [D A | D b], zero rows past the original height.
Vector signed_buffer(const SketchPlan& plan, const Matrix& a, std::span<const double> b) {
    const std::size_t n = plan.n;
    const std::size_t m = rows(a);
    const std::size_t d = cols(a);
    if (m > n || b.size() != m) throw DimensionError("apply_sketch: A, b and plan disagree on the row count");
    Vector buf(n * (d + 1), 0.0);
    const auto& sign = plan.sign_diagonal;
    if (const auto* dense = std::get_if<DenseMatrix>(&a)) {
        for (std::size_t j = 0; j < d; ++j) {
            const auto c = dense->col(j);
            double* out = buf.data() + j * n;
            for (std::size_t i = 0; i < m; ++i) out[i] = sign[i] * c[i];
        }
    } else {
        const auto& sp = std::get<SparseMatrix>(a);
        const auto ptr = sp.row_ptr();
        const auto idx = sp.col_idx();
        const auto val = sp.values();
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) buf[idx[k] * n + i] = sign[i] * val[k];
    }
    double* out = buf.data() + d * n;
    for (std::size_t i = 0; i < m; ++i) out[i] = sign[i] * b[i];
    return buf;
}

SketchedSystem sketch_buffer(const SketchPlan& plan, Vector buf, std::size_t d, bool trimmed) {
    const std::size_t n = plan.n;
    const std::size_t k = plan.kept();
    if (k == 0) throw EmptySketchError("apply_sketch: plan kept no rows; redraw");
    Vector out(k * (d + 1));
    const auto ncols = static_cast<std::ptrdiff_t>(d + 1);
    if (trimmed) {
#pragma omp parallel for schedule(static) if (n * (d + 1) >= (1 << 14))
        for (std::ptrdiff_t jj = 0; jj < ncols; ++jj) {
            const auto j = static_cast<std::size_t>(jj);
            const Vector picked = fwht_select(std::span<const double>(buf.data() + j * n, n), plan.kept_rows);
            for (std::size_t t = 0; t < k; ++t) out[j * k + t] = plan.row_scales[t] * picked[t];
        }
    } else {
        fwht_columns_inplace(buf, n, d + 1);
        for (std::size_t j = 0; j <= d; ++j)
            for (std::size_t t = 0; t < k; ++t) out[j * k + t] = plan.row_scales[t] * buf[j * n + plan.kept_rows[t]];
    }
    Vector b(out.begin() + static_cast<std::ptrdiff_t>(d * k), out.end());
    out.resize(d * k);
    return {DenseMatrix(k, d, std::move(out)), std::move(b)};
}

void check_plan(const SketchPlan& plan) {
    if (!is_power_of_two(plan.n) || plan.n < 2) throw InvalidArgument("sketch plan: n must be a power of two >= 2");
    if (plan.sign_diagonal.size() != plan.n || plan.row_scales.size() != plan.kept_rows.size()) {
        throw DimensionError("sketch plan: inconsistent array lengths");
    }
}

}  // namespace

// ---------------------------------------------------------------- probabilities

SamplingProbabilities::SamplingProbabilities(Vector p) : p_(std::move(p)) {
    double sum = 0.0;
    for (std::size_t i = 0; i < p_.size(); ++i) {
        if (!(p_[i] >= 0.0) || !std::isfinite(p_[i])) {
            throw InvalidArgument("SamplingProbabilities: p[" + std::to_string(i) + "] is negative or non-finite");
        }
        sum += p_[i];
    }
    if (std::abs(sum - 1.0) > 1e-10) {
        throw InvalidArgument("SamplingProbabilities: probabilities sum to " + std::to_string(sum) + ", not 1");
    }
}

SamplingProbabilities SamplingProbabilities::uniform(std::size_t n) {
    if (n == 0) throw InvalidArgument("SamplingProbabilities::uniform: n must be positive");
    return SamplingProbabilities(Vector(n, 1.0 / static_cast<double>(n)));
}

SamplingProbabilities SamplingProbabilities::proportional(std::span<const double> weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw InvalidArgument("SamplingProbabilities::proportional: weights sum to zero");
    Vector p(weights.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = weights[i] / total;
    return SamplingProbabilities(std::move(p));
}

// ---------------------------------------------------------------- plans

SketchPlan draw_sketch_plan(std::size_t n, std::size_t r, RngStream& rng) {
    if (n < 2 || !is_power_of_two(n)) throw InvalidArgument("draw_sketch_plan: n must be a power of two >= 2");
    if (r == 0 || r >= n) {
        throw InvalidArgument("draw_sketch_plan: need 1 <= r < n (r = " + std::to_string(r) + ", n = " +
                              std::to_string(n) + ")");
    }
    SketchPlan plan;
    plan.n = n;
    plan.r_target = r;
    plan.sign_diagonal.resize(n);
    for (auto& s : plan.sign_diagonal) s = rng.sign();
    const double keep = static_cast<double>(r) / static_cast<double>(n);
    const double scale = std::sqrt(static_cast<double>(n) / static_cast<double>(r));
    for (std::size_t i = 0; i < n; ++i) {
        if (rng.bernoulli(keep)) {
            plan.kept_rows.push_back(i);
            plan.row_scales.push_back(scale);
        }
    }
    return plan;
}

SketchPlan draw_subspace_plan(const SamplingProbabilities& p, std::size_t r, RngStream& rng) {
    if (r == 0) throw InvalidArgument("draw_subspace_plan: r must be positive");
    constexpr double kOne = 1.0 - 4 * std::numeric_limits<double>::epsilon();
    SketchPlan plan;
    plan.n = p.size();
    plan.r_target = r;
    plan.sign_diagonal.assign(p.size(), 1.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        double q = std::min(1.0, static_cast<double>(r) * p[i]);
        // r * (1/n) can round to just below 1 when n is not a power of two.
        if (q >= kOne) q = 1.0;
        if (q > 0.0 && rng.bernoulli(q)) {
            plan.kept_rows.push_back(i);
            plan.row_scales.push_back(q == 1.0 ? 1.0 : 1.0 / std::sqrt(q));
        }
    }
    return plan;
}

DenseMatrix select_rows(const SketchPlan& plan, const DenseMatrix& phi) {
    if (phi.rows() != plan.n) throw DimensionError("select_rows: matrix rows differ from plan size");
    const std::size_t k = plan.kept();
    Vector out(k * phi.cols());
    for (std::size_t j = 0; j < phi.cols(); ++j) {
        const auto c = phi.col(j);
        for (std::size_t t = 0; t < k; ++t) out[j * k + t] = plan.row_scales[t] * c[plan.kept_rows[t]];
    }
    return {k, phi.cols(), std::move(out)};
}

// ---------------------------------------------------------------- application

SketchedSystem apply_sketch(const SketchPlan& plan, const Matrix& a, std::span<const double> b, bool trimmed) {
    check_plan(plan);
    if (rows(a) != plan.n || b.size() != plan.n) throw DimensionError("apply_sketch: A and b must have plan.n rows");
    return sketch_buffer(plan, signed_buffer(plan, a, b), cols(a), trimmed);
}

SketchedSystem apply_sketch(const SketchPlan& plan, const DenseMatrix& a, std::span<const double> b, bool trimmed) {
    check_plan(plan);
    if (a.rows() != plan.n || b.size() != plan.n) throw DimensionError("apply_sketch: A and b must have plan.n rows");
    Vector buf(plan.n * (a.cols() + 1));
    for (std::size_t j = 0; j < a.cols(); ++j) {
        const auto c = a.col(j);
        for (std::size_t i = 0; i < plan.n; ++i) buf[j * plan.n + i] = plan.sign_diagonal[i] * c[i];
    }
    for (std::size_t i = 0; i < plan.n; ++i) buf[a.cols() * plan.n + i] = plan.sign_diagonal[i] * b[i];
    return sketch_buffer(plan, std::move(buf), a.cols(), trimmed);
}

DenseMatrix subspace_sample(const DenseMatrix& phi, std::size_t r, const SamplingProbabilities& p, RngStream& rng) {
    if (p.size() != phi.rows()) throw DimensionError("subspace_sample: probabilities length differs from rows");
    return select_rows(draw_subspace_plan(p, r, rng), phi);
}

RandomizedResult randomized_nnls(const NnlsProblem& problem, std::size_t r, const RngStream& rng,
                                 const RandomizedOptions& options) {
    const std::size_t d = problem.d();
    const std::size_t padded = next_power_of_two(problem.n());
    if (r == 0 || r >= padded) {
        throw InvalidArgument("randomized_nnls: need 1 <= r < padded n (r = " + std::to_string(r) +
                              ", padded n = " + std::to_string(padded) + ")");
    }

    RandomizedResult result;
    result.padded = {problem.n(), padded};
    const auto t0 = Clock::now();
    bool ok = false;
    for (std::size_t k = 0; k < options.max_attempts && !ok; ++k) {
        RngStream attempt = rng.derive(k);
        result.plan = draw_sketch_plan(padded, r, attempt);
        result.attempts = k + 1;
        ok = result.plan.kept() >= d;
    }
    if (!ok) {
        throw SolverError(SolverError::Kind::retries_exhausted,
                          "randomized_nnls: every plan kept fewer than d = " + std::to_string(d) + " rows after " +
                              std::to_string(options.max_attempts) + " attempts");
    }
    SketchedSystem small =
        sketch_buffer(result.plan, signed_buffer(result.plan, problem.a(), problem.b()), d, options.trimmed_transform);
    result.preprocessing_time = seconds_since(t0);

    const NnlsProblem small_problem(std::move(small.a), std::move(small.b));
    const auto t1 = Clock::now();
    result.solution = solve(small_problem, options.solver);
    result.small_solve_time = seconds_since(t1);
    result.solution.residual_norm_sq = residual_norm_sq(problem.a(), problem.b(), result.solution.x);
    return result;
}

// ---------------------------------------------------------------- sample size bound

SufficientR sufficient_r(std::size_t n, std::size_t d, double eps, double c_o) {
    if (!(eps > 0.0) || eps > 1.0 / 3.0) throw InvalidArgument("sufficient_r: eps must lie in (0, 1/3]");
    if (!(c_o > 0.0)) throw InvalidArgument("sufficient_r: c_o must be positive");
    if (n < 2 || d < 1) throw InvalidArgument("sufficient_r: need n >= 2 and d >= 1");

    SufficientR out;
    out.alpha = 342.0 * c_o * c_o * static_cast<double>(d + 1) * std::log2(static_cast<double>(n)) / (eps * eps);
    // gamma >= 2 alpha log2(alpha) implies gamma / log2(gamma) >= alpha only for alpha >= 4.
    const double a = std::max(out.alpha, 4.0);
    out.r = static_cast<std::uint64_t>(std::ceil(2.0 * a * std::log2(a)));
    const double rr = static_cast<double>(out.r);
    out.satisfies_condition = rr / std::log2(rr) >= out.alpha;
    out.exceeds_n = out.r >= n;
    return out;
}

}  // namespace rnnls
