#pragma once

// Matrix and vector files.
//
// CSV: one row per line, entries separated by commas and/or whitespace.
// Binary: 8-byte magic "DMATv001", little-endian u64 rows, u64 cols, then
// rows*cols little-endian IEEE-754 doubles in row-major order.

#include <iosfwd>
#include <string>

#include "lewisreg/core.hpp"

namespace lewisreg {

inline constexpr char kBinaryMagic[9] = "DMATv001";

DenseMatrix parse_matrix_csv(std::istream& in);
DenseMatrix parse_matrix_binary(std::istream& in);
void write_matrix_csv(std::ostream& out, const DenseMatrix& A);
void write_matrix_binary(std::ostream& out, const DenseMatrix& A);

/// Reads either format, sniffing the magic bytes.
DenseMatrix read_matrix(const std::string& path);
void write_matrix(const std::string& path, const DenseMatrix& A, bool binary);

/// One real per line (a single-column CSV).
DenseVector read_vector(const std::string& path);
void write_vector(const std::string& path, const DenseVector& v);

} // namespace lewisreg
