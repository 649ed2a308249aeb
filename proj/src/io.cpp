#include "rnnls/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "rnnls/errors.hpp"

namespace rnnls::io {

namespace {

std::ifstream open(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return in;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool blank_or_comment(const std::string& line, char comment) {
    const auto pos = line.find_first_not_of(" \t\r");
    return pos == std::string::npos || line[pos] == comment;
}

double parse_value(const std::string& token, long line) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(token, &used);
    } catch (const std::exception&) {
        throw IoError("invalid number '" + token + "'", line);
    }
    if (used != token.size()) throw IoError("invalid number '" + token + "'", line);
    if (!std::isfinite(v)) throw IoError("non-finite value '" + token + "'", line);
    return v;
}

std::size_t parse_index(const std::string& token, long line) {
    if (token.empty() || !std::all_of(token.begin(), token.end(), [](unsigned char c) { return std::isdigit(c); })) {
        throw IoError("invalid index '" + token + "'", line);
    }
    return std::stoull(token);
}

std::vector<std::string> tokens(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    for (std::string t; ss >> t;) out.push_back(t);
    return out;
}

}  // namespace

SparseMatrix read_matrix_market(std::istream& in) {
    std::string line;
    long lineno = 0;
    if (!std::getline(in, line)) throw IoError("empty Matrix Market input", 1);
    ++lineno;
    const auto banner = tokens(lower(line));
    if (banner.size() != 5 || banner[0] != "%%matrixmarket" || banner[1] != "matrix") {
        throw IoError("missing %%MatrixMarket matrix banner", lineno);
    }
    if (banner[2] != "coordinate") throw IoError("only coordinate format is supported", lineno);
    const std::string& field = banner[3];
    const std::string& symmetry = banner[4];
    if (field != "real" && field != "integer" && field != "pattern") {
        throw IoError("unsupported field '" + field + "'", lineno);
    }
    if (symmetry != "general" && symmetry != "symmetric") {
        throw IoError("unsupported symmetry '" + symmetry + "'", lineno);
    }
    const bool pattern = field == "pattern";
    const bool symmetric = symmetry == "symmetric";

    std::size_t rows = 0, cols = 0, entries = 0;
    bool have_size = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank_or_comment(line, '%')) continue;
        const auto t = tokens(line);
        if (t.size() != 3) throw IoError("size line must hold rows, cols, entries", lineno);
        rows = parse_index(t[0], lineno);
        cols = parse_index(t[1], lineno);
        entries = parse_index(t[2], lineno);
        have_size = true;
        break;
    }
    if (!have_size) throw IoError("missing size line", lineno);
    if (symmetric && rows != cols) throw IoError("symmetric matrix must be square", lineno);

    std::vector<Triplet> trips;
    trips.reserve(symmetric ? 2 * entries : entries);
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank_or_comment(line, '%')) continue;
        const auto t = tokens(line);
        const std::size_t want = pattern ? 2 : 3;
        if (t.size() != want) {
            throw IoError("expected " + std::to_string(want) + " fields, got " + std::to_string(t.size()), lineno);
        }
        if (seen == entries) throw IoError("more entries than declared (" + std::to_string(entries) + ")", lineno);
        const std::size_t i = parse_index(t[0], lineno);
        const std::size_t j = parse_index(t[1], lineno);
        if (i < 1 || i > rows || j < 1 || j > cols) {
            throw IoError("index (" + t[0] + ", " + t[1] + ") outside " + std::to_string(rows) + "x" +
                              std::to_string(cols),
                          lineno);
        }
        const double v = pattern ? 1.0 : parse_value(t[2], lineno);
        trips.push_back({i - 1, j - 1, v});
        if (symmetric && i != j) trips.push_back({j - 1, i - 1, v});
        ++seen;
    }
    if (seen != entries) {
        throw IoError("declared " + std::to_string(entries) + " entries, found " + std::to_string(seen), lineno);
    }
    try {
        return SparseMatrix::from_triplets(rows, cols, std::move(trips));
    } catch (const std::invalid_argument& e) {
        throw IoError(e.what());
    }
}

SparseMatrix read_matrix_market(const std::filesystem::path& path) {
    auto in = open(path);
    return read_matrix_market(in);
}

DenseMatrix read_dense(std::istream& in) {
    std::vector<Vector> rows;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank_or_comment(line, '#')) continue;
        Vector row;
        for (const auto& t : tokens(line)) row.push_back(parse_value(t, lineno));
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw IoError("expected " + std::to_string(rows.front().size()) + " values, got " +
                              std::to_string(row.size()),
                          lineno);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw IoError("no matrix rows found");
    return DenseMatrix::from_rows(rows);
}

DenseMatrix read_dense(const std::filesystem::path& path) {
    auto in = open(path);
    return read_dense(in);
}

Vector read_vector(std::istream& in) {
    Vector v;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank_or_comment(line, '#')) continue;
        const auto t = tokens(line);
        if (t.size() != 1) throw IoError("expected one value per line, got " + std::to_string(t.size()), lineno);
        v.push_back(parse_value(t[0], lineno));
    }
    return v;
}

Vector read_vector(const std::filesystem::path& path) {
    auto in = open(path);
    return read_vector(in);
}

Matrix read_matrix(const std::filesystem::path& path) {
    auto in = open(path);
    std::string first;
    std::getline(in, first);
    in.clear();
    in.seekg(0);
    if (lower(first).rfind("%%matrixmarket", 0) == 0) return read_matrix_market(in);
    return read_dense(in);
}

}  // namespace rnnls::io
