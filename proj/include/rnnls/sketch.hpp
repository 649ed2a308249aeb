#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

#include "rnnls/core.hpp"
#include "rnnls/fwht.hpp"
#include "rnnls/rng.hpp"
#include "rnnls/solver.hpp"

namespace rnnls {

/// Realized randomness of one sketch: sign diagonal D plus the kept rows of S
/// and their scale factors.
struct SketchPlan {
    std::size_t n = 0;         // padded row count
    std::size_t r_target = 0;  // expected kept count for uniform plans; the r parameter otherwise
    Vector sign_diagonal;      // +-1, length n (all +1 for subspace-sampling plans)
    std::vector<std::size_t> kept_rows;  // strictly increasing, < n
    Vector row_scales;                   // aligned with kept_rows

    std::size_t kept() const noexcept { return kept_rows.size(); }
};

/// Row-sampling distribution: p_i >= 0, sum p_i = 1 (within 1e-10).
class SamplingProbabilities {
public:
    explicit SamplingProbabilities(Vector p);

    static SamplingProbabilities uniform(std::size_t n);
    /// p_i proportional to the given nonnegative weights (e.g. leverage scores).
    static SamplingProbabilities proportional(std::span<const double> weights);

    std::size_t size() const noexcept { return p_.size(); }
    double operator[](std::size_t i) const noexcept { return p_[i]; }
    std::span<const double> values() const noexcept { return p_; }

private:
    Vector p_;
};

/// Uniform Bernoulli plan: every row kept independently with probability r/n and
/// scaled by sqrt(n/r); independent +-1 signs. Requires n a power of two and 1 <= r < n.
SketchPlan draw_sketch_plan(std::size_t n, std::size_t r, RngStream& rng);

/// Subspace-sampling plan: row i kept with probability min{1, r p_i} and scaled by
/// 1/sqrt(min{1, r p_i}). Signs are all +1.
SketchPlan draw_subspace_plan(const SamplingProbabilities& p, std::size_t r, RngStream& rng);

/// Scaled kept rows of `phi` (no transform).
DenseMatrix select_rows(const SketchPlan& plan, const DenseMatrix& phi);

struct SketchedSystem {
    DenseMatrix a;
    Vector b;
};

/// (scale * S H D A, scale * S H D b) restricted to the kept rows.
///
/// `trimmed` computes only the kept outputs of each column transform instead of
/// the full transform followed by selection. Throws EmptySketchError if the plan
/// kept no rows.
SketchedSystem apply_sketch(const SketchPlan& plan, const DenseMatrix& a, std::span<const double> b,
                            bool trimmed = false);
/// Same, with a sparse or dense A; sparse A is densified since H D A is dense anyway.
SketchedSystem apply_sketch(const SketchPlan& plan, const Matrix& a, std::span<const double> b, bool trimmed = false);

/// Algorithm-2 style subsample of phi.
DenseMatrix subspace_sample(const DenseMatrix& phi, std::size_t r, const SamplingProbabilities& p, RngStream& rng);

struct RandomizedOptions {
    SolverConfig solver;
    /// Redraws allowed when the plan keeps fewer than d rows.
    std::size_t max_attempts = 8;
    bool trimmed_transform = false;
};

struct RandomizedResult {
    /// residual_norm_sq is ||A x - b||^2 on the original problem; kkt_residual and
    /// certified describe the small sketched solve.
    NnlsSolution solution;
    SketchPlan plan;
    PaddedSize padded;
    std::size_t attempts = 0;
    double preprocessing_time = 0;  // pad + signs + transform + row selection
    double small_solve_time = 0;    // backend solve only
};

/// Pad, draw a plan, sketch, and solve the small NNLS problem.
/// Attempt k draws its plan from rng.derive(k). Requires 1 <= r < padded n.
/// Throws SolverError(retries_exhausted) if every attempt keeps fewer than d rows.
RandomizedResult randomized_nnls(const NnlsProblem& problem, std::size_t r, const RngStream& rng,
                                 const RandomizedOptions& options = {});

struct SufficientR {
    double alpha = 0;          // 342 c_o^2 (d+1) log2(n) / eps^2
    std::uint64_t r = 0;       // ceil(684 c_o^2 (d+1) log2(n) log2(alpha) / eps^2)
    bool satisfies_condition = false;  // r / log2(r) >= alpha, checked by substitution
    bool exceeds_n = false;    // r >= n: the guarantee is vacuous at this size
};

/// Sample size sufficient for the (1 + eps) guarantee, base-2 logarithms throughout.
/// Requires eps in (0, 1/3], c_o > 0, n >= 2, d >= 1.
SufficientR sufficient_r(std::size_t n, std::size_t d, double eps, double c_o = 1.0);

}  // namespace rnnls
