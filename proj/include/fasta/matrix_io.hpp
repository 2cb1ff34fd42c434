#pragma once

#include "fasta/types.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace fasta {

/// Raw bytes of a file. Throws std::runtime_error with the path on failure.
std::string read_file_bytes(const std::filesystem::path &path);

/// Lower-case hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

/// Parses a dense matrix from Matrix Market (coordinate or array, real or
/// integer, general or symmetric) or from header-free row-major CSV. The
/// format is detected from the "%%MatrixMarket" banner. `source` only
/// labels error messages.
Matrix parse_matrix(std::string_view bytes, const std::string &source = "<memory>");

/// A matrix with a single row or column, returned as a vector.
Vector parse_vector(std::string_view bytes, const std::string &source = "<memory>");

/// Row-major CSV with shortest round-trip decimal representation.
std::string format_csv(const Eigen::Ref<const Matrix> &m);

/// Matrix Market "array real general" (column-major, per the format).
std::string format_matrix_market(const Eigen::Ref<const Matrix> &m);

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

void write_file_bytes(const std::filesystem::path &path, std::string_view bytes);

} // namespace fasta
