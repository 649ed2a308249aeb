#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rnnls/core.hpp"
#include "rnnls/solver.hpp"

namespace rnnls::harness {

enum class ProblemMode {
    column_extraction,       // draw an n x (d+1) matrix, one random column becomes b
    consistent_nonnegative,  // b = A x* (+ noise) for a known x* >= 0
};

enum class ValueDistribution {
    uniform,           // nonzeros uniform on (0, 1]
    truncated_normal,  // N(0.5, 0.25^2) restricted to (0, 1]
};

struct ProblemSpec {
    std::size_t n = 0;
    std::size_t d = 0;
    double density = 1.0;  // fraction of nonzero entries, in (0, 1]
    ProblemMode mode = ProblemMode::column_extraction;
    ValueDistribution values = ValueDistribution::uniform;
    double noise = 0.0;  // standard deviation of the Gaussian noise in consistent mode
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    /// Throws InvalidArgument for n, d < 1, density outside (0, 1], or density n d < d.
    void validate() const;
};

struct GeneratedProblem {
    NnlsProblem problem;
    std::optional<Vector> planted;  // x* in consistent mode
};

/// Dense storage when density == 1, CSR otherwise.
GeneratedProblem generate_problem(const ProblemSpec& spec);

struct ExperimentRecord {
    std::string problem_id;
    std::string method;  // "exact-active-set", "exact-pgqp" or "sketched"
    std::optional<std::size_t> r;
    std::optional<double> relative_error;  // sketched records only
    double preprocessing_time = 0;
    double small_solve_time = 0;
    double total_time = 0;
    std::size_t kept_rows = 0;  // rows of the system actually solved
    std::uint64_t seed = 0;
    double density = 0;
    std::string status = "ok";  // solver error text when a trial failed

    friend bool operator==(const ExperimentRecord&, const ExperimentRecord&) = default;
};

/// |A x~ - b| / |A x_opt - b|, with both norms floored at 1e-12 |b| so that
/// consistent problems (zero optimal residual) report 1 instead of 0/0.
double relative_error(double sketched_norm, double exact_norm, double b_norm);

struct SweepOptions {
    std::vector<std::size_t> r_values;  // empty selects d + {50, 100, ..., 400}
    std::size_t trials = 30;
    SolverConfig solver;
    bool trimmed_transform = false;
};

/// d + i * 50 for i = 1..8.
std::vector<std::size_t> default_r_values(std::size_t d);

/// For each trial t: generate with stream (t, 0), solve exactly once, then sketch-and-solve
/// at every r with stream (t, 1 + k). Trials run in parallel; values depend only on
/// spec.seed, never on the worker count.
std::vector<ExperimentRecord> run_r_sweep(const ProblemSpec& spec, const SweepOptions& options);

inline const std::vector<double> kDefaultDensities{0.02, 0.04, 0.08, 0.16, 0.32, 0.64};

/// Desk-scale default sizes for the density sweep; same n/d ratio as the 10000 x 300 setting.
inline constexpr std::size_t kDeskN = 2000;
inline constexpr std::size_t kDeskD = 60;
inline constexpr std::size_t kFullN = 10000;
inline constexpr std::size_t kFullD = 300;

/// r = d, d + 50, d + 100, d + 150.
std::vector<std::size_t> default_density_r_values(std::size_t d);

/// Full factorial density x r; template spec supplies n, d, mode, seed.
std::vector<ExperimentRecord> run_density_sweep(const std::vector<double>& densities, const ProblemSpec& base,
                                                const SweepOptions& options);

struct CellSummary {
    double density = 0;
    std::string method;
    std::optional<std::size_t> r;
    std::size_t count = 0;
    std::optional<double> median_relative_error;
    double median_preprocessing_time = 0;
    double median_small_solve_time = 0;
    double median_total_time = 0;
};

/// Medians per (density, method, r) cell over successful records.
std::vector<CellSummary> summarize(const std::vector<ExperimentRecord>& records);

enum class Format { csv, json };
Format parse_format(const std::string& name);

struct RunMetadata {
    std::string library_version;
    std::string generator_family;
    std::uint64_t global_seed = 0;
    std::string value_distribution = "uniform";
    std::string solver = "active-set";
    std::string log_base = "2";
};

RunMetadata make_metadata(std::uint64_t seed, const ProblemSpec& spec, const SolverConfig& solver);

/// CSV: a "# {metadata json}" line, then the fixed header, then one row per record.
/// JSON: {"metadata": {...}, "records": [...]}. Doubles carry 17 significant digits.
/// Throws InvalidArgument on an empty record list (nothing is written) and IoError if
/// the path cannot be opened.
void emit_results(const std::vector<ExperimentRecord>& records, Format format, const std::filesystem::path& path,
                  const RunMetadata& meta);
void write_csv(std::ostream& out, const std::vector<ExperimentRecord>& records, const RunMetadata& meta);
void write_json(std::ostream& out, const std::vector<ExperimentRecord>& records, const RunMetadata& meta);

/// Inverse of write_json.
std::vector<ExperimentRecord> read_json(std::istream& in);

inline constexpr const char* kCsvHeader =
    "problem-id,method,r,relative_error,preprocessing_time,small_solve_time,total_time,kept_rows,seed,density,status";

}  // namespace rnnls::harness
