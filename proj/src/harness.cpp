#include "rnnls/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "json.hpp"
#include "rnnls/errors.hpp"
#include "rnnls/fwht.hpp"
#include "rnnls/rng.hpp"
#include "rnnls/sketch.hpp"

namespace rnnls::harness {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

double draw_value(ValueDistribution dist, RngStream& rng) {
    if (dist == ValueDistribution::uniform) return 1.0 - rng.uniform();  // (0, 1]
    for (;;) {
        const double v = 0.5 + 0.25 * rng.normal();
        if (v > 0.0 && v <= 1.0) return v;
    }
}

// Row-major Bernoulli-masked random matrix, stored dense when every entry is drawn nonzero.
Matrix random_matrix(std::size_t n, std::size_t cols, double density, ValueDistribution dist, RngStream& rng,
                     bool force_sparse) {
    if (density >= 1.0 && !force_sparse) {
        Vector data(n * cols);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < cols; ++j) data[j * n + i] = draw_value(dist, rng);
        return DenseMatrix(n, cols, std::move(data));
    }
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(static_cast<double>(n * cols) * density) + 16);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            if (density >= 1.0 || rng.bernoulli(density)) trips.push_back({i, j, draw_value(dist, rng)});
    return SparseMatrix::from_triplets(n, cols, std::move(trips));
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string density_tag(double density) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", density);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

nlohmann::json metadata_json(const RunMetadata& m) {
    return {{"library_version", m.library_version}, {"generator_family", m.generator_family},
            {"global_seed", m.global_seed},         {"value_distribution", m.value_distribution},
            {"solver", m.solver},                   {"log_base", m.log_base}};
}

}  // namespace

void ProblemSpec::validate() const {
    if (n < 1 || d < 1) throw InvalidArgument("ProblemSpec: n and d must be positive");
    if (!(density > 0.0) || density > 1.0) throw InvalidArgument("ProblemSpec: density must lie in (0, 1]");
    if (density * static_cast<double>(n) * static_cast<double>(d) < static_cast<double>(d)) {
        throw InvalidArgument("ProblemSpec: density * n * d < d, too few expected nonzeros");
    }
    if (!(noise >= 0.0)) throw InvalidArgument("ProblemSpec: noise must be nonnegative");
}

GeneratedProblem generate_problem(const ProblemSpec& spec) {
    spec.validate();
    RngStream rng(spec.seed, spec.stream);
    if (spec.mode == ProblemMode::column_extraction) {
        Matrix full = random_matrix(spec.n, spec.d + 1, spec.density, spec.values, rng, false);
        const std::size_t pick = rng.uniform_index(spec.d + 1);
        Vector b(spec.n, 0.0);
        if (const auto* dense = std::get_if<DenseMatrix>(&full)) {
            Vector data;
            data.reserve(spec.n * spec.d);
            for (std::size_t j = 0; j <= spec.d; ++j) {
                const auto c = dense->col(j);
                if (j == pick) {
                    b.assign(c.begin(), c.end());
                } else {
                    data.insert(data.end(), c.begin(), c.end());
                }
            }
            return {NnlsProblem(DenseMatrix(spec.n, spec.d, std::move(data)), std::move(b)), std::nullopt};
        }
        const auto& sp = std::get<SparseMatrix>(full);
        std::vector<std::size_t> ptr(spec.n + 1, 0);
        std::vector<std::size_t> idx;
        Vector val;
        idx.reserve(sp.nnz());
        val.reserve(sp.nnz());
        for (std::size_t i = 0; i < spec.n; ++i) {
            for (std::size_t k = sp.row_ptr()[i]; k < sp.row_ptr()[i + 1]; ++k) {
                const std::size_t j = sp.col_idx()[k];
                if (j == pick) {
                    b[i] = sp.values()[k];
                } else {
                    idx.push_back(j < pick ? j : j - 1);
                    val.push_back(sp.values()[k]);
                }
            }
            ptr[i + 1] = val.size();
        }
        return {NnlsProblem(SparseMatrix(spec.n, spec.d, std::move(ptr), std::move(idx), std::move(val)), std::move(b)),
                std::nullopt};
    }

    Matrix a = random_matrix(spec.n, spec.d, spec.density, spec.values, rng, false);
    Vector planted(spec.d);
    for (auto& v : planted) v = rng.bernoulli(0.25) ? 0.0 : rng.uniform();
    Vector b = matvec(a, planted);
    if (spec.noise > 0.0)
        for (auto& v : b) v += spec.noise * rng.normal();
    return {NnlsProblem(std::move(a), std::move(b)), std::move(planted)};
}

double relative_error(double sketched_norm, double exact_norm, double b_norm) {
    const double floor = 1e-12 * b_norm;
    const double den = std::max(exact_norm, floor);
    if (den == 0.0) return 1.0;  // b = 0: both residuals vanish
    return std::max(sketched_norm, floor) / den;
}

std::vector<std::size_t> default_r_values(std::size_t d) {
    std::vector<std::size_t> out;
    for (std::size_t i = 1; i <= 8; ++i) out.push_back(d + 50 * i);
    return out;
}

std::vector<std::size_t> default_density_r_values(std::size_t d) { return {d, d + 50, d + 100, d + 150}; }

std::vector<ExperimentRecord> run_r_sweep(const ProblemSpec& spec, const SweepOptions& options) {
    spec.validate();
    if (options.trials == 0) throw InvalidArgument("run_r_sweep: trials must be positive");
    const std::vector<std::size_t> r_values = options.r_values.empty() ? default_r_values(spec.d) : options.r_values;
    const std::size_t padded = next_power_of_two(spec.n);
    for (auto r : r_values) {
        if (r == 0 || r >= padded) {
            throw InvalidArgument("run_r_sweep: r = " + std::to_string(r) + " outside [1, " + std::to_string(padded) +
                                  ")");
        }
    }
    const std::string exact_method =
        options.solver.method == SolverMethod::active_set ? "exact-active-set" : "exact-pgqp";
    const RngStream base(spec.seed, spec.stream);

    std::vector<std::vector<ExperimentRecord>> per_trial(options.trials);
    const auto ntrials = static_cast<std::ptrdiff_t>(options.trials);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t tt = 0; tt < ntrials; ++tt) {
        const auto t = static_cast<std::size_t>(tt);
        auto& out = per_trial[t];
        const RngStream trial = base.derive(t);
        ProblemSpec ts = spec;
        ts.stream = trial.derive(0).stream_id();
        const std::string id = "n" + std::to_string(spec.n) + "-d" + std::to_string(spec.d) + "-rho" +
                               density_tag(spec.density) + "-t" + std::to_string(t);

        ExperimentRecord exact{id, exact_method, std::nullopt, std::nullopt, 0, 0, 0, spec.n, spec.seed, spec.density};
        const GeneratedProblem gen = generate_problem(ts);
        const NnlsProblem& problem = gen.problem;
        double exact_norm = 0.0;
        try {
            const auto t0 = Clock::now();
            const NnlsSolution sol = solve(problem, options.solver);
            exact.total_time = seconds_since(t0);
            exact.small_solve_time = sol.solve_time;
            exact_norm = std::sqrt(sol.residual_norm_sq);
        } catch (const std::exception& e) {
            exact.status = e.what();
            out.push_back(exact);
            continue;
        }
        out.push_back(exact);
        const double b_norm = norm2(problem.b());

        RandomizedOptions ropt;
        ropt.solver = options.solver;
        ropt.trimmed_transform = options.trimmed_transform;
        for (std::size_t k = 0; k < r_values.size(); ++k) {
            ExperimentRecord rec{id, "sketched", r_values[k], std::nullopt, 0, 0, 0, 0, spec.seed, spec.density};
            try {
                const auto t0 = Clock::now();
                const RandomizedResult res = randomized_nnls(problem, r_values[k], trial.derive(1 + k), ropt);
                rec.total_time = seconds_since(t0);
                rec.preprocessing_time = res.preprocessing_time;
                rec.small_solve_time = res.small_solve_time;
                rec.kept_rows = res.plan.kept();
                rec.relative_error = relative_error(std::sqrt(res.solution.residual_norm_sq), exact_norm, b_norm);
            } catch (const std::exception& e) {
                rec.status = e.what();
            }
            out.push_back(std::move(rec));
        }
    }

    std::vector<ExperimentRecord> records;
    for (auto& v : per_trial) records.insert(records.end(), v.begin(), v.end());
    return records;
}

std::vector<ExperimentRecord> run_density_sweep(const std::vector<double>& densities, const ProblemSpec& base,
                                                const SweepOptions& options) {
    SweepOptions opt = options;
    if (opt.r_values.empty()) opt.r_values = default_density_r_values(base.d);
    std::vector<ExperimentRecord> records;
    for (std::size_t k = 0; k < densities.size(); ++k) {
        ProblemSpec spec = base;
        spec.density = densities[k];
        spec.stream = mix64(base.stream + k);
        auto part = run_r_sweep(spec, opt);
        records.insert(records.end(), part.begin(), part.end());
    }
    return records;
}

std::vector<CellSummary> summarize(const std::vector<ExperimentRecord>& records) {
    using Key = std::tuple<double, std::string, std::size_t>;
    std::map<Key, std::size_t> index;
    std::vector<CellSummary> cells;
    std::vector<std::vector<const ExperimentRecord*>> members;
    for (const auto& rec : records) {
        if (rec.status != "ok") continue;
        const Key key{rec.density, rec.method, rec.r.value_or(0)};
        auto [it, inserted] = index.try_emplace(key, cells.size());
        if (inserted) {
            cells.push_back({rec.density, rec.method, rec.r, 0, std::nullopt, 0, 0, 0});
            members.emplace_back();
        }
        members[it->second].push_back(&rec);
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
        std::vector<double> rel, pre, small, total;
        for (const auto* rec : members[c]) {
            if (rec->relative_error) rel.push_back(*rec->relative_error);
            pre.push_back(rec->preprocessing_time);
            small.push_back(rec->small_solve_time);
            total.push_back(rec->total_time);
        }
        cells[c].count = members[c].size();
        if (!rel.empty()) cells[c].median_relative_error = median_of(rel);
        cells[c].median_preprocessing_time = median_of(pre);
        cells[c].median_small_solve_time = median_of(small);
        cells[c].median_total_time = median_of(total);
    }
    return cells;
}

Format parse_format(const std::string& name) {
    if (name == "csv") return Format::csv;
    if (name == "json") return Format::json;
    throw InvalidArgument("unknown output format '" + name + "'");
}

RunMetadata make_metadata(std::uint64_t seed, const ProblemSpec& spec, const SolverConfig& solver) {
    RunMetadata m;
    m.library_version = RNNLS_VERSION;
    m.generator_family = std::string(kGeneratorFamily);
    m.global_seed = seed;
    m.value_distribution = spec.values == ValueDistribution::uniform ? "uniform(0,1]" : "truncated-normal(0.5,0.25)";
    m.solver = std::string(to_string(solver.method));
    return m;
}

void write_csv(std::ostream& out, const std::vector<ExperimentRecord>& records, const RunMetadata& meta) {
    out << "# " << metadata_json(meta).dump() << '\n' << kCsvHeader << '\n';
    for (const auto& r : records) {
        out << csv_field(r.problem_id) << ',' << r.method << ',' << (r.r ? std::to_string(*r.r) : "") << ','
            << (r.relative_error ? fmt17(*r.relative_error) : "") << ',' << fmt17(r.preprocessing_time) << ','
            << fmt17(r.small_solve_time) << ',' << fmt17(r.total_time) << ',' << r.kept_rows << ',' << r.seed << ','
            << fmt17(r.density) << ',' << csv_field(r.status) << '\n';
    }
}

void write_json(std::ostream& out, const std::vector<ExperimentRecord>& records, const RunMetadata& meta) {
    // Records are written by hand so every double carries exactly 17 significant digits.
    out << "{\"metadata\":" << metadata_json(meta).dump() << ",\"records\":[";
    for (std::size_t k = 0; k < records.size(); ++k) {
        const auto& r = records[k];
        out << (k ? ",\n" : "\n") << "{\"problem_id\":" << nlohmann::json(r.problem_id).dump()
            << ",\"method\":" << nlohmann::json(r.method).dump()
            << ",\"r\":" << (r.r ? std::to_string(*r.r) : "null")
            << ",\"relative_error\":" << (r.relative_error ? fmt17(*r.relative_error) : "null")
            << ",\"preprocessing_time\":" << fmt17(r.preprocessing_time)
            << ",\"small_solve_time\":" << fmt17(r.small_solve_time) << ",\"total_time\":" << fmt17(r.total_time)
            << ",\"kept_rows\":" << r.kept_rows << ",\"seed\":" << r.seed << ",\"density\":" << fmt17(r.density)
            << ",\"status\":" << nlohmann::json(r.status).dump() << "}";
    }
    out << "\n]}\n";
}

std::vector<ExperimentRecord> read_json(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("invalid results JSON: ") + e.what());
    }
    std::vector<ExperimentRecord> out;
    for (const auto& j : doc.at("records")) {
        ExperimentRecord r;
        r.problem_id = j.at("problem_id").get<std::string>();
        r.method = j.at("method").get<std::string>();
        if (!j.at("r").is_null()) r.r = j.at("r").get<std::size_t>();
        if (!j.at("relative_error").is_null()) r.relative_error = j.at("relative_error").get<double>();
        r.preprocessing_time = j.at("preprocessing_time").get<double>();
        r.small_solve_time = j.at("small_solve_time").get<double>();
        r.total_time = j.at("total_time").get<double>();
        r.kept_rows = j.at("kept_rows").get<std::size_t>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.density = j.at("density").get<double>();
        r.status = j.at("status").get<std::string>();
        out.push_back(std::move(r));
    }
    return out;
}

void emit_results(const std::vector<ExperimentRecord>& records, Format format, const std::filesystem::path& path,
                  const RunMetadata& meta) {
    if (records.empty()) throw InvalidArgument("emit_results: no records to write");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    if (format == Format::csv) {
        write_csv(out, records, meta);
    } else {
        write_json(out, records, meta);
    }
    if (!out) throw IoError("write to " + path.string() + " failed");
}

}  // namespace rnnls::harness
