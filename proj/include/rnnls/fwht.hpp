#pragma once

#include <cstddef>
#include <span>
#include <utility>

#include "rnnls/core.hpp"

namespace rnnls {

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

/// Least power of two >= max(n, 2).
std::size_t next_power_of_two(std::size_t n) noexcept;

struct PaddedSize {
    std::size_t original_n = 0;
    std::size_t padded_n = 0;
};

/// In-place normalized Walsh-Hadamard transform, natural (Sylvester) ordering.
///
/// Computes H v with H = H_n / sqrt(n), where H_n(i, j) = (-1)^popcount(i & j).
/// The 1/sqrt(n) factor is applied inside the last butterfly stage.
/// Throws InvalidArgument unless v.size() is a power of two >= 2.
void fwht_inplace(std::span<double> v);

/// Transform each of `cols` contiguous columns of length `rows` (column-major buffer).
/// Columns run in parallel; output is bitwise equal to serial::fwht_columns_inplace.
void fwht_columns_inplace(std::span<double> data, std::size_t rows, std::size_t cols);

/// H applied to every column of A.
DenseMatrix fwht_matrix_columns(const DenseMatrix& a);

/// Entries (H v)_k for k in `rows_out` only (sorted ascending), without the full
/// transform: recursion on the half-size sums/differences is pruned wherever no
/// requested output lives, which costs O(n log r) for r requested rows.
Vector fwht_select(std::span<const double> v, std::span<const std::size_t> rows_out);

/// Appends zero rows to A and zero entries to b up to the next power of two (>= 2).
/// A problem that is already a power of two is returned unchanged.
std::pair<NnlsProblem, PaddedSize> pad_to_power_of_two(const NnlsProblem& problem);

namespace serial {

void fwht_columns_inplace(std::span<double> data, std::size_t rows, std::size_t cols);
DenseMatrix fwht_matrix_columns(const DenseMatrix& a);

}  // namespace serial

}  // namespace rnnls
