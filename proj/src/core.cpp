#include "rnnls/core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rnnls/errors.hpp"

namespace rnnls {

namespace {

// Below this many multiply-adds the OpenMP fork costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 15;

void require_finite(std::span<const double> values, const char* what) {
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (!std::isfinite(values[k])) {
            throw InvalidArgument(std::string(what) + ": non-finite entry at position " + std::to_string(k));
        }
    }
}

void require_len(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw DimensionError(std::string(what) + ": expected length " + std::to_string(want) + ", got " +
                             std::to_string(got));
    }
}

}  // namespace

// ---------------------------------------------------------------- DenseMatrix

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, Vector data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require_len(data_.size(), rows * cols, "DenseMatrix data");
    require_finite(data_, "DenseMatrix");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    Vector data(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) data[i * n + i] = 1.0;
    return {n, n, std::move(data)};
}

DenseMatrix DenseMatrix::from_rows(const std::vector<Vector>& rows) {
    const std::size_t m = rows.size();
    const std::size_t n = m == 0 ? 0 : rows.front().size();
    Vector data(m * n);
    for (std::size_t i = 0; i < m; ++i) {
        require_len(rows[i].size(), n, "DenseMatrix::from_rows row");
        for (std::size_t j = 0; j < n; ++j) data[j * m + i] = rows[i][j];
    }
    return {m, n, std::move(data)};
}

DenseMatrix DenseMatrix::transpose() const {
    Vector out(data_.size());
    for (std::size_t j = 0; j < cols_; ++j)
        for (std::size_t i = 0; i < rows_; ++i) out[i * cols_ + j] = data_[j * rows_ + i];
    return {cols_, rows_, std::move(out)};
}

// ---------------------------------------------------------------- SparseMatrix

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                           std::vector<std::size_t> col_idx, Vector values)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)), values_(std::move(values)) {
    require_len(row_ptr_.size(), rows_ + 1, "SparseMatrix row_ptr");
    require_len(col_idx_.size(), values_.size(), "SparseMatrix col_idx");
    if (row_ptr_.front() != 0 || row_ptr_.back() != values_.size()) {
        throw InvalidArgument("SparseMatrix: row_ptr must start at 0 and end at nnz");
    }
    for (std::size_t i = 0; i < rows_; ++i) {
        if (row_ptr_[i + 1] < row_ptr_[i]) throw InvalidArgument("SparseMatrix: row_ptr decreases at row " + std::to_string(i));
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            if (col_idx_[k] >= cols_) throw InvalidArgument("SparseMatrix: column index out of range in row " + std::to_string(i));
            if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1]) {
                throw InvalidArgument("SparseMatrix: column indices not strictly increasing in row " + std::to_string(i));
            }
            if (values_[k] == 0.0 || !std::isfinite(values_[k])) {
                throw InvalidArgument("SparseMatrix: stored value must be finite and nonzero in row " + std::to_string(i));
            }
        }
    }
}

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries) {
    std::erase_if(entries, [](const Triplet& t) { return t.value == 0.0; });
    std::sort(entries.begin(), entries.end(),
              [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
    std::vector<std::size_t> row_ptr(rows + 1, 0);
    std::vector<std::size_t> col_idx;
    Vector values;
    col_idx.reserve(entries.size());
    values.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size(); ++k) {
        const auto& t = entries[k];
        if (t.row >= rows || t.col >= cols) throw DimensionError("SparseMatrix::from_triplets: entry out of range");
        if (k > 0 && entries[k - 1].row == t.row && entries[k - 1].col == t.col) {
            throw InvalidArgument("SparseMatrix::from_triplets: duplicate entry (" + std::to_string(t.row) + ", " +
                                  std::to_string(t.col) + ")");
        }
        ++row_ptr[t.row + 1];
        col_idx.push_back(t.col);
        values.push_back(t.value);
    }
    for (std::size_t i = 0; i < rows; ++i) row_ptr[i + 1] += row_ptr[i];
    return {rows, cols, std::move(row_ptr), std::move(col_idx), std::move(values)};
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& a) {
    std::vector<std::size_t> row_ptr(a.rows() + 1, 0);
    std::vector<std::size_t> col_idx;
    Vector values;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (a(i, j) != 0.0) {
                col_idx.push_back(j);
                values.push_back(a(i, j));
            }
        }
        row_ptr[i + 1] = values.size();
    }
    return {a.rows(), a.cols(), std::move(row_ptr), std::move(col_idx), std::move(values)};
}

DenseMatrix SparseMatrix::to_dense() const {
    Vector data(rows_ * cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) data[col_idx_[k] * rows_ + i] = values_[k];
    return {rows_, cols_, std::move(data)};
}

SparseMatrix SparseMatrix::transpose() const {
    std::vector<std::size_t> ptr(cols_ + 1, 0);
    for (auto j : col_idx_) ++ptr[j + 1];
    for (std::size_t j = 0; j < cols_; ++j) ptr[j + 1] += ptr[j];
    std::vector<std::size_t> idx(values_.size());
    Vector vals(values_.size());
    std::vector<std::size_t> next(ptr.begin(), ptr.end() - 1);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
            const std::size_t dst = next[col_idx_[k]]++;
            idx[dst] = i;
            vals[dst] = values_[k];
        }
    }
    return {cols_, rows_, std::move(ptr), std::move(idx), std::move(vals)};
}

// ---------------------------------------------------------------- Matrix / NnlsProblem

std::size_t rows(const Matrix& a) noexcept {
    return std::visit([](const auto& m) { return m.rows(); }, a);
}

std::size_t cols(const Matrix& a) noexcept {
    return std::visit([](const auto& m) { return m.cols(); }, a);
}

DenseMatrix to_dense(const Matrix& a) {
    if (const auto* d = std::get_if<DenseMatrix>(&a)) return *d;
    return std::get<SparseMatrix>(a).to_dense();
}

NnlsProblem::NnlsProblem(Matrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
    if (n() < 1 || d() < 1) throw DimensionError("NnlsProblem: A must have at least one row and one column");
    require_len(b_.size(), n(), "NnlsProblem b");
    require_finite(b_, "NnlsProblem b");
}

// ---------------------------------------------------------------- kernels

double dot(std::span<const double> u, std::span<const double> v) noexcept {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}

double norm2(std::span<const double> u) noexcept { return std::sqrt(dot(u, u)); }

namespace serial {

Vector matvec(const DenseMatrix& a, std::span<const double> u) {
    require_len(u.size(), a.cols(), "matvec");
    Vector y(a.rows(), 0.0);
    for (std::size_t j = 0; j < a.cols(); ++j) {
        const auto c = a.col(j);
        for (std::size_t i = 0; i < a.rows(); ++i) y[i] += c[i] * u[j];
    }
    return y;
}

Vector matvec(const SparseMatrix& a, std::span<const double> u) {
    require_len(u.size(), a.cols(), "matvec");
    const auto ptr = a.row_ptr();
    const auto idx = a.col_idx();
    const auto val = a.values();
    Vector y(a.rows(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double s = 0.0;
        for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) s += val[k] * u[idx[k]];
        y[i] = s;
    }
    return y;
}

Vector matvec_transpose(const DenseMatrix& a, std::span<const double> v) {
    require_len(v.size(), a.rows(), "matvec_transpose");
    Vector y(a.cols());
    for (std::size_t j = 0; j < a.cols(); ++j) y[j] = dot(a.col(j), v);
    return y;
}

Vector matvec_transpose(const SparseMatrix& a, std::span<const double> v) {
    require_len(v.size(), a.rows(), "matvec_transpose");
    const auto ptr = a.row_ptr();
    const auto idx = a.col_idx();
    const auto val = a.values();
    Vector y(a.cols(), 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) y[idx[k]] += val[k] * v[i];
    return y;
}

DenseMatrix gram(const DenseMatrix& a) {
    const std::size_t d = a.cols();
    Vector q(d * d);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t k = j; k < d; ++k) {
            const double s = dot(a.col(j), a.col(k));
            q[k * d + j] = s;
            q[j * d + k] = s;
        }
    }
    return {d, d, std::move(q)};
}

DenseMatrix gram(const SparseMatrix& a) {
    const std::size_t d = a.cols();
    const auto ptr = a.row_ptr();
    const auto idx = a.col_idx();
    const auto val = a.values();
    Vector q(d * d, 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t p = ptr[i]; p < ptr[i + 1]; ++p) {
            for (std::size_t s = p; s < ptr[i + 1]; ++s) q[idx[s] * d + idx[p]] += val[p] * val[s];
        }
    }
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = j + 1; k < d; ++k) q[j * d + k] = q[k * d + j];
    return {d, d, std::move(q)};
}

}  // namespace serial

Vector matvec(const DenseMatrix& a, std::span<const double> u) {
    require_len(u.size(), a.cols(), "matvec");
    constexpr std::size_t kBlock = 512;
    const std::size_t m = a.rows();
    const auto blocks = static_cast<std::ptrdiff_t>((m + kBlock - 1) / kBlock);
    Vector y(m, 0.0);
#pragma omp parallel for schedule(static) if (m * a.cols() > kParallelWork)
    for (std::ptrdiff_t blk = 0; blk < blocks; ++blk) {
        const std::size_t lo = static_cast<std::size_t>(blk) * kBlock;
        const std::size_t hi = std::min(m, lo + kBlock);
        for (std::size_t j = 0; j < a.cols(); ++j) {
            const auto c = a.col(j);
            for (std::size_t i = lo; i < hi; ++i) y[i] += c[i] * u[j];
        }
    }
    return y;
}

Vector matvec(const SparseMatrix& a, std::span<const double> u) {
    require_len(u.size(), a.cols(), "matvec");
    const auto ptr = a.row_ptr();
    const auto idx = a.col_idx();
    const auto val = a.values();
    const auto m = static_cast<std::ptrdiff_t>(a.rows());
    Vector y(a.rows(), 0.0);
#pragma omp parallel for schedule(static) if (a.nnz() > kParallelWork)
    for (std::ptrdiff_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t k = ptr[i]; k < ptr[i + 1]; ++k) s += val[k] * u[idx[k]];
        y[i] = s;
    }
    return y;
}

Vector matvec(const Matrix& a, std::span<const double> u) {
    return std::visit([&](const auto& m) { return matvec(m, u); }, a);
}

Vector matvec_transpose(const DenseMatrix& a, std::span<const double> v) {
    require_len(v.size(), a.rows(), "matvec_transpose");
    const auto d = static_cast<std::ptrdiff_t>(a.cols());
    Vector y(a.cols());
#pragma omp parallel for schedule(static) if (a.rows() * a.cols() > kParallelWork)
    for (std::ptrdiff_t j = 0; j < d; ++j) y[j] = dot(a.col(j), v);
    return y;
}

// The scatter has no race-free row partition; callers needing a parallel
// A^T v on sparse data should multiply by a.transpose() instead.
Vector matvec_transpose(const SparseMatrix& a, std::span<const double> v) { return serial::matvec_transpose(a, v); }

Vector matvec_transpose(const Matrix& a, std::span<const double> v) {
    return std::visit([&](const auto& m) { return matvec_transpose(m, v); }, a);
}

DenseMatrix gram(const DenseMatrix& a) {
    const std::size_t d = a.cols();
    Vector q(d * d);
#pragma omp parallel for schedule(dynamic) if (a.rows() * d * d > kParallelWork)
    for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(d); ++jj) {
        const auto j = static_cast<std::size_t>(jj);
        for (std::size_t k = j; k < d; ++k) {
            const double s = dot(a.col(j), a.col(k));
            q[k * d + j] = s;
            q[j * d + k] = s;
        }
    }
    return {d, d, std::move(q)};
}

DenseMatrix gram(const SparseMatrix& a) {
    // Each worker owns output column c and sweeps the rows holding column c in
    // ascending order, the same accumulation order as the serial outer-product sweep.
    const std::size_t d = a.cols();
    const SparseMatrix at = a.transpose();
    const auto ptr = a.row_ptr();
    const auto idx = a.col_idx();
    const auto val = a.values();
    const auto cptr = at.row_ptr();
    const auto crow = at.col_idx();
    const auto cval = at.values();
    Vector q(d * d, 0.0);
#pragma omp parallel for schedule(dynamic, 8) if (a.nnz() * d > kParallelWork)
    for (std::ptrdiff_t cc = 0; cc < static_cast<std::ptrdiff_t>(d); ++cc) {
        const auto c = static_cast<std::size_t>(cc);
        double* out = q.data() + c * d;
        for (std::size_t t = cptr[c]; t < cptr[c + 1]; ++t) {
            const std::size_t i = crow[t];
            for (std::size_t p = ptr[i]; p < ptr[i + 1] && idx[p] <= c; ++p) out[idx[p]] += val[p] * cval[t];
        }
    }
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t k = j + 1; k < d; ++k) q[j * d + k] = q[k * d + j];
    return {d, d, std::move(q)};
}

DenseMatrix gram(const Matrix& a) {
    return std::visit([](const auto& m) { return gram(m); }, a);
}

Vector moment(const Matrix& a, std::span<const double> b) { return matvec_transpose(a, b); }

double residual_norm_sq(const Matrix& a, std::span<const double> b, std::span<const double> x) {
    require_len(b.size(), rows(a), "residual b");
    Vector r = matvec(a, x);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        const double e = r[i] - b[i];
        s += e * e;
    }
    return s;
}

}  // namespace rnnls
