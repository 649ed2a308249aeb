#include "rnnls/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include "rnnls/errors.hpp"

namespace rnnls {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

// Entries below this after the final subproblem are set to exactly zero.
constexpr double kSnap = 1e-14;

struct Stationarity {
    double dual = 0;
    double comp = 0;
    double overall = 0;
};

Stationarity stationarity(std::span<const double> x, std::span<const double> g, double objective) {
    Stationarity s;
    for (std::size_t i = 0; i < x.size(); ++i) {
        s.dual = std::max(s.dual, -g[i]);
        s.comp = std::max(s.comp, std::abs(x[i] * g[i]));
    }
    s.overall = std::max(s.dual, s.comp / (1.0 + std::abs(objective)));
    return s;
}

void finish(NnlsSolution& sol, const NnlsProblem& problem, double tol) {
    for (auto& v : sol.x) {
        if (v < kSnap) v = 0.0;
    }
    const auto cert = certify_kkt(problem, sol.x, tol);
    sol.residual_norm_sq = cert.objective;
    sol.kkt_residual = cert.stationarity_violation;
    sol.certified = cert.certified;
}

}  // namespace

std::string_view to_string(SolverMethod m) noexcept {
    return m == SolverMethod::active_set ? "active-set" : "pgqp";
}

SolverMethod parse_solver_method(std::string_view name) {
    if (name == "active-set") return SolverMethod::active_set;
    if (name == "pgqp") return SolverMethod::projected_gradient_qp;
    throw InvalidArgument("unknown solver method '" + std::string(name) + "'");
}

void SolverConfig::validate() const {
    if (!(kkt_tolerance > 0) || !(dual_feasibility_tolerance > 0)) {
        throw InvalidArgument("SolverConfig: tolerances must be positive");
    }
}

KktCertificate certify_kkt(const NnlsProblem& problem, std::span<const double> x, double tol) {
    if (x.size() != problem.d()) throw DimensionError("certify_kkt: x length does not match d");
    Vector r = matvec(problem.a(), x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= problem.b()[i];
    Vector g = matvec_transpose(problem.a(), r);
    for (auto& v : g) v *= 2.0;

    KktCertificate cert;
    cert.objective = dot(r, r);
    cert.primal_feasible = std::all_of(x.begin(), x.end(), [](double v) { return v >= 0.0; });
    const auto s = stationarity(x, g, cert.objective);
    cert.dual_violation = s.dual;
    cert.complementarity = s.comp;
    cert.stationarity_violation = s.overall;
    cert.certified = cert.primal_feasible && s.overall <= tol;
    return cert;
}

// ---------------------------------------------------------------- active set

NnlsSolution solve_active_set(const NnlsProblem& problem, const SolverConfig& config) {
    config.validate();
    const auto start = Clock::now();
    const std::size_t n = problem.n();
    const std::size_t d = problem.d();
    const std::size_t max_outer = config.max_iterations ? config.max_iterations : 10 * d;

    const DenseMatrix dense = to_dense(problem.a());
    const Eigen::Map<const Eigen::MatrixXd> a(dense.data().data(), static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(d));
    const Eigen::Map<const Eigen::VectorXd> b(problem.b().data(), static_cast<Eigen::Index>(n));

    Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d));
    std::vector<char> passive(d, 0);
    std::vector<char> blocked(d, 0);
    Eigen::VectorXd resid = b;
    Eigen::VectorXd w = a.transpose() * resid;  // -g/2

    NnlsSolution sol;
    std::vector<Eigen::Index> cols;
    Eigen::MatrixXd sub;
    Eigen::VectorXd z;
    [[maybe_unused]] double prev_objective = resid.squaredNorm();

    // Least squares on the passive columns; z is indexed like `cols`.
    auto solve_passive = [&] {
        cols.clear();
        for (std::size_t j = 0; j < d; ++j)
            if (passive[j]) cols.push_back(static_cast<Eigen::Index>(j));
        const auto k = static_cast<Eigen::Index>(cols.size());
        if (k == 0) {
            z.resize(0);
            return;
        }
        sub.resize(static_cast<Eigen::Index>(n), k);
        for (Eigen::Index c = 0; c < k; ++c) sub.col(c) = a.col(cols[c]);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(sub);
        const auto diag = qr.matrixQR().diagonal().cwiseAbs();
        if (static_cast<std::size_t>(k) > n || diag.minCoeff() <= 1e-12 * std::max(1.0, diag.maxCoeff())) {
            throw SolverError(SolverError::Kind::rank_deficient,
                              "solve_active_set: passive columns are rank deficient (" + std::to_string(k) +
                                  " columns)");
        }
        z = qr.solve(b);
    };

    const double enter_threshold = 0.5 * config.dual_feasibility_tolerance;
    for (;;) {
        std::size_t t = d;
        double best = enter_threshold;
        for (std::size_t j = 0; j < d; ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            if (!passive[j] && !blocked[j] && w[jj] > best) {
                best = w[jj];
                t = j;
            }
        }
        if (t == d) break;
        if (sol.iterations >= max_outer) {
            throw SolverError(SolverError::Kind::max_iterations,
                              "solve_active_set: no convergence after " + std::to_string(max_outer) + " iterations");
        }
        ++sol.iterations;
        passive[t] = 1;

        bool entered = true;
        for (std::size_t inner = 0;; ++inner) {
            solve_passive();
            const auto k = static_cast<Eigen::Index>(cols.size());
            if (inner == 0) {
                const auto pos = std::find(cols.begin(), cols.end(), static_cast<Eigen::Index>(t)) - cols.begin();
                if (z[pos] <= 0.0) {
                    // Rounding put the entering variable on the wrong side; park it until x moves.
                    passive[t] = 0;
                    blocked[t] = 1;
                    entered = false;
                    break;
                }
            }
            if ((z.array() > 0.0).all()) {
                x.setZero();
                for (Eigen::Index c = 0; c < k; ++c) x[cols[c]] = z[c];
                break;
            }
            // Step toward z until the first passive variable hits zero; ties go to the smallest index.
            double alpha = std::numeric_limits<double>::infinity();
            Eigen::Index leaving = -1;
            for (Eigen::Index c = 0; c < k; ++c) {
                if (z[c] <= 0.0) {
                    const double xi = x[cols[c]];
                    const double step = xi / (xi - z[c]);
                    if (step < alpha) {
                        alpha = step;
                        leaving = cols[c];
                    }
                }
            }
            for (Eigen::Index c = 0; c < k; ++c) {
                const auto j = cols[c];
                x[j] += alpha * (z[c] - x[j]);
            }
            x[leaving] = 0.0;
            for (Eigen::Index c = 0; c < k; ++c) {
                const auto j = cols[c];
                if (x[j] <= kSnap) {
                    x[j] = 0.0;
                    passive[static_cast<std::size_t>(j)] = 0;
                }
            }
            if (inner > d) {
                throw SolverError(SolverError::Kind::max_iterations, "solve_active_set: inner loop did not terminate");
            }
        }
        if (entered) std::fill(blocked.begin(), blocked.end(), 0);

        resid = b - a * x;
        w = a.transpose() * resid;
        const double objective = resid.squaredNorm();
        assert(objective <= prev_objective * (1 + 1e-9) + 1e-300);
        prev_objective = objective;
        if (config.record_trace) sol.objective_trace.push_back(objective);
    }

    sol.x.assign(x.data(), x.data() + x.size());
    finish(sol, problem, config.kkt_tolerance);
    sol.solve_time = seconds_since(start);
    return sol;
}

// ---------------------------------------------------------------- projected gradient

namespace {

// Q u for the QP, either from an explicit Gram matrix or as A^T (A u).
class QuadraticForm {
public:
    explicit QuadraticForm(const NnlsProblem& p) : problem_(p) {
        if (const auto* sp = std::get_if<SparseMatrix>(&p.a())) {
            at_ = sp->transpose();
        } else {
            q_ = gram(std::get<DenseMatrix>(p.a()));
        }
        linear_ = moment(p.a(), p.b());
        bb_ = dot(p.b(), p.b());
    }

    Vector apply(std::span<const double> u) const {
        if (problem_.is_sparse()) return matvec(at_, matvec(problem_.a(), u));
        return matvec(q_, u);
    }

    const Vector& linear() const { return linear_; }
    double bb() const { return bb_; }

private:
    const NnlsProblem& problem_;
    DenseMatrix q_;
    SparseMatrix at_;
    Vector linear_;
    double bb_ = 0;
};

}  // namespace

NnlsSolution solve_projected_gradient_qp(const NnlsProblem& problem, const SolverConfig& config) {
    config.validate();
    const auto start = Clock::now();
    const std::size_t d = problem.d();
    const std::size_t max_iter = config.max_iterations ? config.max_iterations : 100000;
    constexpr std::size_t kRefresh = 100;

    const QuadraticForm form(problem);
    const Vector& q = form.linear();

    Vector x(d, 0.0);
    Vector qx(d, 0.0);  // Q x, updated incrementally and refreshed every kRefresh steps
    Vector g(d), dir(d), qd;
    auto objective = [&] { return dot(x, qx) - 2.0 * dot(q, x) + form.bb(); };

    NnlsSolution sol;
    double step = 0.0;
    bool converged = false;
    for (std::size_t it = 0;; ++it) {
        for (std::size_t i = 0; i < d; ++i) g[i] = 2.0 * (qx[i] - q[i]);
        const double f = std::max(0.0, objective());
        if (stationarity(x, g, f).overall <= config.kkt_tolerance) {
            converged = true;
            break;
        }
        if (it >= max_iter) break;
        ++sol.iterations;

        if (it == 0) {
            double gmax = 0.0;
            for (std::size_t i = 0; i < d; ++i) gmax = std::max(gmax, std::abs(g[i]));
            step = gmax > 0 ? 1.0 / gmax : 1.0;
        }
        double dnorm = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            dir[i] = std::max(0.0, x[i] - step * g[i]) - x[i];
            dnorm = std::max(dnorm, std::abs(dir[i]));
        }
        if (dnorm == 0.0) break;

        // f is quadratic along the segment, so the exact minimizer over [0, 1] is closed-form.
        qd = form.apply(dir);
        const double slope = dot(g, dir);
        const double curv = 2.0 * dot(dir, qd);
        double lambda = slope < 0.0 ? 1.0 : 0.0;
        if (curv > 0.0) lambda = std::min(1.0, -slope / curv);
        if (!(lambda > 0.0)) break;

        double ss = 0.0, sy = 0.0;
        for (std::size_t i = 0; i < d; ++i) {
            const double s = lambda * dir[i];
            x[i] = std::max(0.0, x[i] + s);
            qx[i] += lambda * qd[i];
            ss += s * s;
            sy += s * 2.0 * lambda * qd[i];
        }
        if ((it + 1) % kRefresh == 0) qx = form.apply(x);
        if (sy > 0.0) step = std::clamp(ss / sy, 1e-30, 1e30);
        if (config.record_trace) sol.objective_trace.push_back(objective());
    }

    sol.x = x;
    finish(sol, problem, config.kkt_tolerance);
    if (!converged) sol.certified = false;
    sol.solve_time = seconds_since(start);
    return sol;
}

NnlsSolution solve(const NnlsProblem& problem, const SolverConfig& config) {
    return config.method == SolverMethod::active_set ? solve_active_set(problem, config)
                                                     : solve_projected_gradient_qp(problem, config);
}

}  // namespace rnnls
