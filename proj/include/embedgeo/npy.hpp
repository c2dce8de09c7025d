#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "embedgeo/matrix.hpp"

namespace embedgeo {

/// Parsed .npy preamble.
struct NpyHeader {
  std::uint8_t major = 1;
  std::uint8_t minor = 0;
  std::string descr;
  bool fortran_order = false;
  std::vector<std::size_t> shape;
  /// Offset of the first data byte.
  std::size_t data_offset = 0;
};

/// Parses the Python dict literal stored in an .npy header, e.g.
/// "{'descr': '<f4', 'fortran_order': False, 'shape': (3, 4), }".
NpyHeader parse_npy_dict(std::string_view dict);

/// Reads a 2-D little-endian float32/float64 C-order array. float64 input is
/// narrowed to float32. Errors: FormatError (magic, version, dtype,
/// truncation), UnsupportedLayout (Fortran order, big-endian), ShapeError
/// (rank ≠ 2 or an empty axis), DataErrorAtRow (NaN/Inf).
EmbeddingMatrix read_matrix(std::istream& in, NpyHeader* header = nullptr);
EmbeddingMatrix load_matrix(const std::filesystem::path& path, NpyHeader* header = nullptr);

/// Writes an .npy v1.0 file with descr '<f4' and C order.
void write_matrix(std::ostream& out, const EmbeddingMatrix& m);
void write_matrix(const std::filesystem::path& path, const EmbeddingMatrix& m);

}  // namespace embedgeo
