// rnnls: sketch-and-solve NNLS command line.
//
//   rnnls solve --matrix A.mtx --rhs b.txt [--method active-set|pgqp|sketched] [--r 200]
//   rnnls sweep-r --n 8192 --d 100 --density 0.64 --trials 30 --out r.csv
//   rnnls sweep-density --density-list 0.02,0.64 --out dens.json --format json
//   rnnls diagnose coherence|distortion|leverage ...
//   rnnls bound-r --n 1048576 --d 10 --eps 0.5
//
// Exit codes: 0 success, 1 usage error, 2 solver failure, 3 I/O error.

#include <omp.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <json.hpp>
#include <string>
#include <vector>

#include "rnnls/diagnostics.hpp"
#include "rnnls/errors.hpp"
#include "rnnls/harness.hpp"
#include "rnnls/io.hpp"
#include "rnnls/sketch.hpp"
#include "rnnls/solver.hpp"

using nlohmann::json;
using namespace rnnls;

namespace {

enum Exit { kOk = 0, kUsage = 1, kSolver = 2, kIo = 3 };

json certificate_json(const KktCertificate& c) {
    return {{"primal_feasible", c.primal_feasible},
            {"dual_violation", c.dual_violation},
            {"complementarity", c.complementarity},
            {"stationarity_violation", c.stationarity_violation},
            {"objective", c.objective},
            {"certified", c.certified}};
}

void print_json(const json& j) { std::cout << j.dump(2) << '\n'; }

struct SolveArgs {
    std::string matrix, rhs, method = "active-set", backend = "active-set";
    std::size_t r = 0;
    std::uint64_t seed = 1;
    double tol = 1e-8;
    bool trimmed = false;
};

int run_solve(const SolveArgs& args) {
    const Matrix a = io::read_matrix(args.matrix);
    const NnlsProblem problem(a, io::read_vector(args.rhs));
    SolverConfig cfg;
    cfg.kkt_tolerance = args.tol;
    cfg.dual_feasibility_tolerance = args.tol;

    json out;
    out["method"] = args.method;
    out["n"] = problem.n();
    out["d"] = problem.d();
    NnlsSolution sol;
    if (args.method == "sketched") {
        if (args.r == 0) throw InvalidArgument("--r is required for --method sketched");
        cfg.method = parse_solver_method(args.backend);
        RandomizedOptions opt;
        opt.solver = cfg;
        opt.trimmed_transform = args.trimmed;
        const RandomizedResult res = randomized_nnls(problem, args.r, RngStream(args.seed, 0), opt);
        sol = res.solution;
        out["sketch"] = {{"r", args.r},
                         {"padded_n", res.padded.padded_n},
                         {"kept_rows", res.plan.kept()},
                         {"attempts", res.attempts},
                         {"seed", args.seed},
                         {"backend", args.backend},
                         {"small_problem_certified", sol.certified},
                         {"preprocessing_time", res.preprocessing_time},
                         {"small_solve_time", res.small_solve_time}};
    } else {
        cfg.method = parse_solver_method(args.method);
        sol = solve(problem, cfg);
    }
    out["x"] = sol.x;
    out["residual_norm_sq"] = sol.residual_norm_sq;
    out["iterations"] = sol.iterations;
    out["solve_time"] = sol.solve_time;
    out["kkt"] = certificate_json(certify_kkt(problem, sol.x, args.tol));
    print_json(out);
    return kOk;
}

struct SweepArgs {
    std::size_t n = 8192, d = 100, trials = 30;
    double density = 1.0;
    std::vector<double> densities;
    std::vector<std::size_t> r_list;
    std::uint64_t seed = 1;
    std::string out, format = "csv", method = "active-set", values = "uniform";
    bool trimmed = false, techtc_like = false, full_scale = false;
};

harness::ProblemSpec spec_from(const SweepArgs& a) {
    harness::ProblemSpec spec;
    spec.n = a.n;
    spec.d = a.d;
    spec.density = a.density;
    spec.seed = a.seed;
    if (a.values == "truncated-normal") {
        spec.values = harness::ValueDistribution::truncated_normal;
    } else if (a.values != "uniform") {
        throw InvalidArgument("--values must be uniform or truncated-normal");
    }
    return spec;
}

harness::SweepOptions options_from(const SweepArgs& a) {
    harness::SweepOptions opt;
    opt.r_values = a.r_list;
    opt.trials = a.trials;
    opt.solver.method = parse_solver_method(a.method);
    opt.trimmed_transform = a.trimmed;
    return opt;
}

// Phase decomposition: times as a percentage of the exact solve.
void print_summary(const std::vector<harness::ExperimentRecord>& records) {
    const auto cells = harness::summarize(records);
    std::printf("%-8s %-18s %6s %5s %14s %12s %8s %8s %10s\n", "density", "method", "r", "count", "median_rel_err",
                "median_total_s", "pre_%", "small_%", "overall_%");
    double exact_time = 0.0;
    for (const auto& c : cells) {
        if (c.method != "sketched") exact_time = c.median_total_time;
        const double scale = exact_time > 0 ? 100.0 / exact_time : 0.0;
        std::printf("%-8g %-18s %6s %5zu %14s %12.6f %8.1f %8.1f %10.1f\n", c.density, c.method.c_str(),
                    c.r ? std::to_string(*c.r).c_str() : "-", c.count,
                    c.median_relative_error ? std::to_string(*c.median_relative_error).c_str() : "-",
                    c.median_total_time, c.median_preprocessing_time * scale, c.median_small_solve_time * scale,
                    c.median_total_time * scale);
    }
}

int finish_sweep(const std::vector<harness::ExperimentRecord>& records, const SweepArgs& a) {
    print_summary(records);
    if (!a.out.empty()) {
        harness::emit_results(records, harness::parse_format(a.format), a.out,
                              harness::make_metadata(a.seed, spec_from(a), options_from(a).solver));
    }
    for (const auto& r : records)
        if (r.status != "ok") return kSolver;
    return kOk;
}

int run_sweep_r(SweepArgs a) {
    if (a.techtc_like) {
        a.n = 20000;
        a.d = 250;
        a.density = 0.02;
    }
    return finish_sweep(harness::run_r_sweep(spec_from(a), options_from(a)), a);
}

int run_sweep_density(SweepArgs a) {
    if (a.full_scale) {
        a.n = harness::kFullN;
        a.d = harness::kFullD;
    }
    if (a.densities.empty()) a.densities = harness::kDefaultDensities;
    return finish_sweep(harness::run_density_sweep(a.densities, spec_from(a), options_from(a)), a);
}

struct DiagArgs {
    std::string matrix, probabilities = "uniform";
    std::size_t n = 1024, d = 10, r = 0, trials = 200;
    std::uint64_t seed = 1;
    double eps = 0.0;
    bool force = false, hd = false, full = false;
};

DenseMatrix diag_matrix(const DiagArgs& a, RngStream& rng) {
    if (!a.matrix.empty()) return to_dense(io::read_matrix(a.matrix));
    return random_orthonormal(a.n, a.d, rng);
}

int run_diag_leverage(const DiagArgs& a) {
    RngStream rng(a.seed, 0);
    const LeverageProfile prof = leverage_scores(diag_matrix(a, rng));
    double sum = 0.0;
    for (double v : prof.row_norms_sq) sum += v;
    json out{{"n", prof.row_norms_sq.size()},
             {"max_leverage", prof.max_leverage},
             {"coherence_bound", prof.coherence_bound},
             {"sum", sum},
             {"log_base", 2}};
    if (a.full) out["row_norms_sq"] = prof.row_norms_sq;
    print_json(out);
    return kOk;
}

int run_diag_coherence(const DiagArgs& a) {
    RngStream rng(a.seed, 0);
    const DenseMatrix u = a.matrix.empty() ? random_orthonormal(a.n, a.d, rng) : orthonormal_basis(diag_matrix(a, rng));
    std::size_t within = 0;
    double worst = 0.0, bound = 0.0;
    for (std::size_t t = 0; t < a.trials; ++t) {
        RngStream s = rng.derive(1 + t);
        const CoherenceReport rep = coherence_after_hd(u, s, a.force);
        within += rep.within_bound;
        worst = std::max(worst, rep.max_row_norm_sq);
        bound = rep.bound;
    }
    print_json({{"n", u.rows()},
                {"d", u.cols()},
                {"trials", a.trials},
                {"bound", bound},
                {"log_base", 2},
                {"fraction_within_bound", static_cast<double>(within) / static_cast<double>(a.trials)},
                {"worst_max_row_norm_sq", worst}});
    return kOk;
}

int run_diag_distortion(const DiagArgs& a) {
    RngStream rng(a.seed, 0);
    DenseMatrix phi = diag_matrix(a, rng);
    if (a.hd) phi = randomized_hadamard(phi, rng);
    const std::size_t r = a.r ? a.r : 4 * phi.cols();
    const SamplingProbabilities p = a.probabilities == "leverage"
                                        ? SamplingProbabilities::proportional(leverage_scores(phi).row_norms_sq)
                                        : SamplingProbabilities::uniform(phi.rows());
    const DistortionReport rep = measure_distortion(phi, r, p, a.trials, rng.derive(99), a.eps);
    print_json({{"r", rep.r},
                {"trials", rep.trials},
                {"probabilities", a.probabilities},
                {"max_relative_distortion", rep.max_relative_distortion},
                {"median_relative_distortion", rep.median_relative_distortion},
                {"max_spectral_distortion", rep.max_spectral_distortion},
                {"median_spectral_distortion", rep.median_spectral_distortion},
                {"epsilon_target", rep.epsilon_target},
                {"mean_kept_rows", rep.mean_kept_rows}});
    return kOk;
}

int run_bound_r(std::size_t n, std::size_t d, double eps, double c_o) {
    const SufficientR s = sufficient_r(n, d, eps, c_o);
    print_json({{"n", n},
                {"d", d},
                {"eps", eps},
                {"c_o", c_o},
                {"alpha", s.alpha},
                {"r", s.r},
                {"satisfies_condition", s.satisfies_condition},
                {"exceeds_n", s.exceeds_n},
                {"log_base", 2}});
    return kOk;
}

void add_sweep_options(CLI::App* cmd, SweepArgs& a) {
    cmd->add_option("--n", a.n, "rows");
    cmd->add_option("--d", a.d, "columns");
    cmd->add_option("--r-list", a.r_list, "comma-separated r values")->delimiter(',');
    cmd->add_option("--trials", a.trials, "problems per cell");
    cmd->add_option("--seed", a.seed, "global seed");
    cmd->add_option("--out", a.out, "output path");
    cmd->add_option("--format", a.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--method", a.method, "exact/backend solver")->check(CLI::IsMember({"active-set", "pgqp"}));
    cmd->add_option("--values", a.values, "uniform or truncated-normal");
    cmd->add_flag("--trimmed", a.trimmed, "transform only the sampled rows");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Randomized Hadamard sketch-and-solve for nonnegative least squares"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "OpenMP worker count (0 = runtime default)");

    SolveArgs solve_args;
    auto* solve_cmd = app.add_subcommand("solve", "solve one NNLS problem, print JSON");
    solve_cmd->add_option("--matrix", solve_args.matrix, "Matrix Market or dense text file")->required();
    solve_cmd->add_option("--rhs", solve_args.rhs, "vector file")->required();
    solve_cmd->add_option("--method", solve_args.method)->check(CLI::IsMember({"active-set", "pgqp", "sketched"}));
    solve_cmd->add_option("--backend", solve_args.backend, "small-problem solver for sketched")
        ->check(CLI::IsMember({"active-set", "pgqp"}));
    solve_cmd->add_option("--r", solve_args.r, "expected sketch rows");
    solve_cmd->add_option("--seed", solve_args.seed);
    solve_cmd->add_option("--tol", solve_args.tol, "KKT tolerance");
    solve_cmd->add_flag("--trimmed", solve_args.trimmed);

    SweepArgs r_args;
    auto* sweep_r = app.add_subcommand("sweep-r", "relative error and timing across r");
    add_sweep_options(sweep_r, r_args);
    sweep_r->add_option("--density", r_args.density, "fraction of nonzeros");
    sweep_r->add_flag("--techtc-like", r_args.techtc_like, "n = 20000, d = 250, density = 0.02");

    SweepArgs d_args;
    d_args.n = harness::kDeskN;
    d_args.d = harness::kDeskD;
    auto* sweep_d = app.add_subcommand("sweep-density", "relative error and timing across densities and r");
    add_sweep_options(sweep_d, d_args);
    sweep_d->add_option("--density-list", d_args.densities, "comma-separated densities")->delimiter(',');
    sweep_d->add_flag("--full-scale", d_args.full_scale, "n = 10000, d = 300");

    DiagArgs diag;
    auto* diag_cmd = app.add_subcommand("diagnose", "empirical checks of coherence, distortion and leverage");
    diag_cmd->require_subcommand(1);
    auto add_diag = [&](CLI::App* c) {
        c->add_option("--matrix", diag.matrix, "input matrix (default: random orthonormal n x d)");
        c->add_option("--n", diag.n);
        c->add_option("--d", diag.d);
        c->add_option("--seed", diag.seed);
    };
    auto* d_cov = diag_cmd->add_subcommand("coherence", "max row norm of H D U against 4.2 d log2(n) / n");
    add_diag(d_cov);
    d_cov->add_option("--trials", diag.trials);
    d_cov->add_flag("--force", diag.force, "allow n < 20");
    auto* d_dist = diag_cmd->add_subcommand("distortion", "subspace-sampling distortion");
    add_diag(d_dist);
    d_dist->add_option("--r", diag.r);
    d_dist->add_option("--trials", diag.trials);
    d_dist->add_option("--eps", diag.eps, "target epsilon (echoed)");
    d_dist->add_option("--probabilities", diag.probabilities)->check(CLI::IsMember({"uniform", "leverage"}));
    d_dist->add_flag("--hd", diag.hd, "rotate by H D before sampling");
    auto* d_lev = diag_cmd->add_subcommand("leverage", "leverage scores");
    add_diag(d_lev);
    d_lev->add_flag("--full", diag.full, "include every row norm");

    std::size_t bn = 0, bd = 0;
    double beps = 0.0, bc = 1.0;
    auto* bound = app.add_subcommand("bound-r", "sufficient r for the (1 + eps) guarantee");
    bound->add_option("--n", bn)->required();
    bound->add_option("--d", bd)->required();
    bound->add_option("--eps", beps)->required();
    bound->add_option("--c_o", bc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }
    if (threads > 0) omp_set_num_threads(threads);

    try {
        if (*solve_cmd) return run_solve(solve_args);
        if (*sweep_r) return run_sweep_r(r_args);
        if (*sweep_d) return run_sweep_density(d_args);
        if (*d_cov) return run_diag_coherence(diag);
        if (*d_dist) return run_diag_distortion(diag);
        if (*d_lev) return run_diag_leverage(diag);
        if (*bound) return run_bound_r(bn, bd, beps, bc);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kSolver;
    } catch (const EmptySketchError& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return kSolver;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
