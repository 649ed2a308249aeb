#pragma once

#include <filesystem>
#include <istream>

#include "rnnls/core.hpp"

namespace rnnls::io {

/// Matrix Market coordinate file (real/integer/pattern, general/symmetric).
SparseMatrix read_matrix_market(std::istream& in);
SparseMatrix read_matrix_market(const std::filesystem::path& path);

/// Whitespace-delimited rows, one matrix row per line. Blank lines and
/// lines starting with '#' are skipped.
DenseMatrix read_dense(std::istream& in);
DenseMatrix read_dense(const std::filesystem::path& path);

/// One value per line.
Vector read_vector(std::istream& in);
Vector read_vector(const std::filesystem::path& path);

/// Dispatches on the "%%MatrixMarket" banner: sparse if present, dense otherwise.
Matrix read_matrix(const std::filesystem::path& path);

}  // namespace rnnls::io
