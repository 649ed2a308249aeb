#include "rnnls/fwht.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "rnnls/errors.hpp"

namespace rnnls {

namespace {

void require_power_of_two(std::size_t n, const char* what) {
    if (n < 2 || !is_power_of_two(n)) {
        throw InvalidArgument(std::string(what) + ": length " + std::to_string(n) + " is not a power of two >= 2");
    }
}

// Butterflies for all stages; the last stage also applies `scale`.
void butterfly(double* v, std::size_t n, double scale) noexcept {
    std::size_t h = 1;
    for (; 2 * h < n; h *= 2) {
        for (std::size_t i = 0; i < n; i += 2 * h) {
            for (std::size_t j = i; j < i + h; ++j) {
                const double a = v[j];
                const double b = v[j + h];
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
    }
    for (std::size_t j = 0; j < h; ++j) {
        const double a = v[j];
        const double b = v[j + h];
        v[j] = (a + b) * scale;
        v[j + h] = (a - b) * scale;
    }
}

// Unnormalized (H_m v)_k for the sorted indices `want`, written to out[0..want.size()).
void select_rec(std::span<const double> v, std::span<const std::size_t> want, std::size_t offset, double* out) {
    const std::size_t m = v.size();
    if (want.empty()) return;
    if (m == 1) {
        out[0] = v[0];
        return;
    }
    if (want.size() == 1) {
        const std::size_t k = want[0] - offset;
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += (std::popcount(k & j) & 1) ? -v[j] : v[j];
        out[0] = s;
        return;
    }
    const std::size_t h = m / 2;
    const auto split = std::lower_bound(want.begin(), want.end(), offset + h) - want.begin();
    const auto top = want.subspan(0, static_cast<std::size_t>(split));
    const auto bottom = want.subspan(static_cast<std::size_t>(split));
    Vector half(h);
    if (!top.empty()) {
        for (std::size_t j = 0; j < h; ++j) half[j] = v[j] + v[j + h];
        select_rec(half, top, offset, out);
    }
    if (!bottom.empty()) {
        for (std::size_t j = 0; j < h; ++j) half[j] = v[j] - v[j + h];
        select_rec(half, bottom, offset + h, out + top.size());
    }
}

}  // namespace

std::size_t next_power_of_two(std::size_t n) noexcept { return std::max<std::size_t>(2, std::bit_ceil(n)); }

void fwht_inplace(std::span<double> v) {
    require_power_of_two(v.size(), "fwht_inplace");
    butterfly(v.data(), v.size(), 1.0 / std::sqrt(static_cast<double>(v.size())));
}

namespace serial {

void fwht_columns_inplace(std::span<double> data, std::size_t rows, std::size_t cols) {
    require_power_of_two(rows, "fwht_columns_inplace");
    if (data.size() != rows * cols) throw DimensionError("fwht_columns_inplace: buffer size mismatch");
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
    for (std::size_t j = 0; j < cols; ++j) butterfly(data.data() + j * rows, rows, scale);
}

DenseMatrix fwht_matrix_columns(const DenseMatrix& a) {
    Vector data(a.data().begin(), a.data().end());
    fwht_columns_inplace(data, a.rows(), a.cols());
    return {a.rows(), a.cols(), std::move(data)};
}

}  // namespace serial

void fwht_columns_inplace(std::span<double> data, std::size_t rows, std::size_t cols) {
    require_power_of_two(rows, "fwht_columns_inplace");
    if (data.size() != rows * cols) throw DimensionError("fwht_columns_inplace: buffer size mismatch");
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
    const auto ncols = static_cast<std::ptrdiff_t>(cols);
#pragma omp parallel for schedule(static) if (rows * cols >= (1 << 14))
    for (std::ptrdiff_t j = 0; j < ncols; ++j) butterfly(data.data() + j * rows, rows, scale);
}

DenseMatrix fwht_matrix_columns(const DenseMatrix& a) {
    Vector data(a.data().begin(), a.data().end());
    fwht_columns_inplace(data, a.rows(), a.cols());
    return {a.rows(), a.cols(), std::move(data)};
}

Vector fwht_select(std::span<const double> v, std::span<const std::size_t> rows_out) {
    require_power_of_two(v.size(), "fwht_select");
    if (!std::is_sorted(rows_out.begin(), rows_out.end()) ||
        std::adjacent_find(rows_out.begin(), rows_out.end()) != rows_out.end()) {
        throw InvalidArgument("fwht_select: output rows must be strictly increasing");
    }
    if (!rows_out.empty() && rows_out.back() >= v.size()) throw DimensionError("fwht_select: output row out of range");
    Vector out(rows_out.size());
    select_rec(v, rows_out, 0, out.data());
    const double scale = 1.0 / std::sqrt(static_cast<double>(v.size()));
    for (auto& x : out) x *= scale;
    return out;
}

std::pair<NnlsProblem, PaddedSize> pad_to_power_of_two(const NnlsProblem& problem) {
    const std::size_t n = problem.n();
    const std::size_t padded = next_power_of_two(n);
    const PaddedSize size{n, padded};
    if (padded == n) return {problem, size};

    Vector b = problem.b();
    b.resize(padded, 0.0);
    if (const auto* sp = std::get_if<SparseMatrix>(&problem.a())) {
        std::vector<std::size_t> ptr(sp->row_ptr().begin(), sp->row_ptr().end());
        ptr.resize(padded + 1, ptr.back());
        SparseMatrix a(padded, sp->cols(), std::move(ptr), {sp->col_idx().begin(), sp->col_idx().end()},
                       {sp->values().begin(), sp->values().end()});
        return {NnlsProblem(std::move(a), std::move(b)), size};
    }
    const auto& dense = std::get<DenseMatrix>(problem.a());
    Vector data(padded * dense.cols(), 0.0);
    for (std::size_t j = 0; j < dense.cols(); ++j) std::copy_n(dense.col(j).begin(), n, data.begin() + j * padded);
    return {NnlsProblem(DenseMatrix(padded, dense.cols(), std::move(data)), std::move(b)), size};
}

}  // namespace rnnls
