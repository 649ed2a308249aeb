#pragma once

#include <cstddef>
#include <span>
#include <string_view>

#include "rnnls/core.hpp"

namespace rnnls {

enum class SolverMethod { active_set, projected_gradient_qp };

std::string_view to_string(SolverMethod m) noexcept;
/// Accepts "active-set" and "pgqp"; throws InvalidArgument otherwise.
SolverMethod parse_solver_method(std::string_view name);

struct SolverConfig {
    SolverMethod method = SolverMethod::active_set;
    double kkt_tolerance = 1e-8;
    /// Lawson-Hanson entering threshold on the gradient 2 A^T (Ax - b).
    double dual_feasibility_tolerance = 1e-8;
    /// 0 selects the method default: 10 d outer iterations (active set), 1e5 (projected gradient).
    std::size_t max_iterations = 0;
    /// Record the objective after each outer iteration into NnlsSolution::objective_trace.
    bool record_trace = false;

    /// Throws InvalidArgument on non-positive tolerances.
    void validate() const;
};

/// Optimality report for the QP  min x^T Q x - 2 q^T x,  x >= 0  with gradient g = 2 (Qx - q).
struct KktCertificate {
    bool primal_feasible = false;      // every x_i >= 0
    double dual_violation = 0;         // max_i max(0, -g_i)
    double complementarity = 0;        // max_i |x_i g_i|
    double stationarity_violation = 0; // max(dual_violation, complementarity / (1 + objective))
    double objective = 0;              // ||Ax - b||^2
    bool certified = false;            // primal_feasible && stationarity_violation <= tol
};

KktCertificate certify_kkt(const NnlsProblem& problem, std::span<const double> x, double tol);

/// Lawson-Hanson active-set method. Each inner step solves the least-squares
/// problem on the passive columns by a fresh Householder QR.
///
/// Throws SolverError(max_iterations) when the outer loop does not terminate and
/// SolverError(rank_deficient) when the passive column block loses rank.
NnlsSolution solve_active_set(const NnlsProblem& problem, const SolverConfig& config = {});

/// Projected Barzilai-Borwein gradient method on the QP form, started from x = 0,
/// with a monotone Armijo backtrack along the projection arc. Dense A uses the
/// d x d Gram matrix; sparse A is only touched through A u and A^T (A u).
/// Hitting max_iterations returns the best iterate with certified = false.
NnlsSolution solve_projected_gradient_qp(const NnlsProblem& problem, const SolverConfig& config = {});

/// Dispatch on config.method.
NnlsSolution solve(const NnlsProblem& problem, const SolverConfig& config = {});

}  // namespace rnnls
