#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace rnnls {

using Vector = std::vector<double>;

/// Column-major dense matrix. Entries are finite; checked at construction.
class DenseMatrix {
public:
    DenseMatrix() = default;
    /// Zero matrix.
    DenseMatrix(std::size_t rows, std::size_t cols);
    /// Takes ownership of column-major `data`; throws on size mismatch or non-finite entries.
    DenseMatrix(std::size_t rows, std::size_t cols, Vector data);

    static DenseMatrix identity(std::size_t n);
    /// Build from row-major nested values (tests, small literals).
    static DenseMatrix from_rows(const std::vector<Vector>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double operator()(std::size_t i, std::size_t j) const noexcept { return data_[j * rows_ + i]; }
    std::span<const double> col(std::size_t j) const noexcept { return {data_.data() + j * rows_, rows_}; }
    std::span<const double> data() const noexcept { return data_; }

    DenseMatrix transpose() const;

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector data_;
};

struct Triplet {
    std::size_t row;
    std::size_t col;
    double value;
};

/// Compressed-sparse-row matrix. Column indices strictly increase within a row and
/// every stored value is finite and nonzero.
class SparseMatrix {
public:
    SparseMatrix() = default;
    /// Validates every CSR invariant; throws InvalidArgument on violation.
    SparseMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_ptr,
                 std::vector<std::size_t> col_idx, Vector values);

    /// Zero entries are dropped; duplicate (row, col) pairs are rejected.
    static SparseMatrix from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);
    static SparseMatrix from_dense(const DenseMatrix& a);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t nnz() const noexcept { return values_.size(); }
    std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
    std::span<const std::size_t> col_idx() const noexcept { return col_idx_; }
    std::span<const double> values() const noexcept { return values_; }

    DenseMatrix to_dense() const;
    SparseMatrix transpose() const;

    friend bool operator==(const SparseMatrix&, const SparseMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> col_idx_;
    Vector values_;
};

using Matrix = std::variant<DenseMatrix, SparseMatrix>;

std::size_t rows(const Matrix& a) noexcept;
std::size_t cols(const Matrix& a) noexcept;
DenseMatrix to_dense(const Matrix& a);

/// The pair (A, b) of an NNLS instance: minimize ||Ax - b||^2 subject to x >= 0.
class NnlsProblem {
public:
    /// Throws DimensionError unless n >= 1, d >= 1 and b has n entries; non-finite b is rejected.
    NnlsProblem(Matrix a, Vector b);

    const Matrix& a() const noexcept { return a_; }
    const Vector& b() const noexcept { return b_; }
    std::size_t n() const noexcept { return rows(a_); }
    std::size_t d() const noexcept { return cols(a_); }
    bool is_sparse() const noexcept { return std::holds_alternative<SparseMatrix>(a_); }

private:
    Matrix a_;
    Vector b_;
};

struct NnlsSolution {
    Vector x;                      // every entry >= 0
    double residual_norm_sq = 0;   // ||Ax - b||^2, recomputed from x
    double kkt_residual = 0;       // stationarity violation at return
    bool certified = false;        // kkt_residual within the configured tolerance
    std::size_t iterations = 0;
    double solve_time = 0;         // seconds
    std::vector<double> objective_trace;  // per outer iteration, when requested
};

// Kernels. Dense and sparse paths run their outer loop under OpenMP; the
// results are bitwise equal to the rnnls::serial reference versions because
// every output entry is accumulated in the same order.

Vector matvec(const DenseMatrix& a, std::span<const double> u);
Vector matvec(const SparseMatrix& a, std::span<const double> u);
Vector matvec(const Matrix& a, std::span<const double> u);

Vector matvec_transpose(const DenseMatrix& a, std::span<const double> v);
Vector matvec_transpose(const SparseMatrix& a, std::span<const double> v);
Vector matvec_transpose(const Matrix& a, std::span<const double> v);

/// A^T A; the upper triangle is accumulated and mirrored, so the result is exactly symmetric.
DenseMatrix gram(const DenseMatrix& a);
DenseMatrix gram(const SparseMatrix& a);
DenseMatrix gram(const Matrix& a);

/// A^T b.
Vector moment(const Matrix& a, std::span<const double> b);

/// ||Ax - b||^2.
double residual_norm_sq(const Matrix& a, std::span<const double> b, std::span<const double> x);

double dot(std::span<const double> u, std::span<const double> v) noexcept;
double norm2(std::span<const double> u) noexcept;

namespace serial {

Vector matvec(const DenseMatrix& a, std::span<const double> u);
Vector matvec(const SparseMatrix& a, std::span<const double> u);
Vector matvec_transpose(const DenseMatrix& a, std::span<const double> v);
Vector matvec_transpose(const SparseMatrix& a, std::span<const double> v);
DenseMatrix gram(const DenseMatrix& a);
DenseMatrix gram(const SparseMatrix& a);

}  // namespace serial

}  // namespace rnnls
