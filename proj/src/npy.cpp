#include "embedgeo/npy.hpp"

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "embedgeo/error.hpp"

namespace embedgeo {

static_assert(std::endian::native == std::endian::little, "npy reader assumes a little-endian host");

namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;

// Cursor over the header dict. Only the literal forms numpy emits are
// accepted: quoted strings, True/False, and tuples of non-negative ints.
class DictParser {
 public:
  explicit DictParser(std::string_view s) : s_(s) {}

  NpyHeader parse() {
    NpyHeader h;
    bool have_descr = false, have_order = false, have_shape = false;
    expect('{');
    while (true) {
      skip_ws();
      if (peek() == '}') {
        ++pos_;
        break;
      }
      std::string key = string_literal();
      expect(':');
      skip_ws();
      if (key == "descr") {
        h.descr = string_literal();
        have_descr = true;
      } else if (key == "fortran_order") {
        h.fortran_order = boolean();
        have_order = true;
      } else if (key == "shape") {
        h.shape = tuple();
        have_shape = true;
      } else {
        fail("unexpected key '" + key + "'");
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != '}') {
        fail("expected ',' or '}'");
      }
    }
    if (!have_descr || !have_order || !have_shape) fail("header missing descr, fortran_order or shape");
    return h;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::FormatError, "npy header: " + what + " at offset " + std::to_string(pos_));
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  std::string string_literal() {
    skip_ws();
    const char quote = peek();
    if (quote != '\'' && quote != '"') fail("expected string");
    const std::size_t start = ++pos_;
    while (pos_ < s_.size() && s_[pos_] != quote) ++pos_;
    if (pos_ >= s_.size()) fail("unterminated string");
    return std::string(s_.substr(start, pos_++ - start));
  }
  bool boolean() {
    if (s_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (s_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    fail("expected True or False");
  }
  std::vector<std::size_t> tuple() {
    std::vector<std::size_t> out;
    expect('(');
    while (true) {
      skip_ws();
      if (peek() == ')') {
        ++pos_;
        return out;
      }
      if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected dimension");
      std::size_t v = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) v = v * 10 + static_cast<std::size_t>(s_[pos_++] - '0');
      out.push_back(v);
      skip_ws();
      if (peek() == ',') ++pos_;
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

void read_exact(std::istream& in, char* dst, std::size_t n, const char* what) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) {
    throw Error(ErrorCode::FormatError, std::string("npy: truncated ") + what);
  }
}

}  // namespace

NpyHeader parse_npy_dict(std::string_view dict) { return DictParser(dict).parse(); }

EmbeddingMatrix read_matrix(std::istream& in, NpyHeader* header_out) {
  char magic[kMagicLen];
  in.read(magic, kMagicLen);
  if (static_cast<std::size_t>(in.gcount()) != kMagicLen || std::memcmp(magic, kMagic, kMagicLen) != 0) {
    throw Error(ErrorCode::FormatError, "npy: bad magic bytes (expected \\x93NUMPY)");
  }
  unsigned char version[2];
  read_exact(in, reinterpret_cast<char*>(version), 2, "version");
  std::size_t header_len = 0;
  std::size_t prefix = kMagicLen + 2;
  if (version[0] == 1) {
    unsigned char len[2];
    read_exact(in, reinterpret_cast<char*>(len), 2, "header length");
    header_len = len[0] | (std::size_t{len[1]} << 8);
    prefix += 2;
  } else if (version[0] == 2) {
    unsigned char len[4];
    read_exact(in, reinterpret_cast<char*>(len), 4, "header length");
    header_len = len[0] | (std::size_t{len[1]} << 8) | (std::size_t{len[2]} << 16) | (std::size_t{len[3]} << 24);
    prefix += 4;
  } else {
    throw Error(ErrorCode::FormatError, "npy: unsupported format version " + std::to_string(version[0]) + "." +
                                            std::to_string(version[1]));
  }
  std::string dict(header_len, '\0');
  read_exact(in, dict.data(), header_len, "header");

  NpyHeader h = parse_npy_dict(dict);
  h.major = version[0];
  h.minor = version[1];
  h.data_offset = prefix + header_len;

  if (h.fortran_order) throw Error(ErrorCode::UnsupportedLayout, "npy: fortran_order=True is not supported");
  if (h.descr.size() != 3 || (h.descr[1] != 'f')) {
    throw Error(ErrorCode::FormatError, "npy: unsupported dtype '" + h.descr + "' (need float32 or float64)");
  }
  if (h.descr[0] == '>') throw Error(ErrorCode::UnsupportedLayout, "npy: big-endian data is not supported");
  if (h.descr[0] != '<' && h.descr[0] != '=' && h.descr[0] != '|') {
    throw Error(ErrorCode::FormatError, "npy: bad byte-order mark in '" + h.descr + "'");
  }
  const std::size_t item = h.descr[2] == '4' ? 4 : h.descr[2] == '8' ? 8 : 0;
  if (item == 0) throw Error(ErrorCode::FormatError, "npy: unsupported dtype '" + h.descr + "'");
  if (h.shape.size() != 2) {
    throw Error(ErrorCode::ShapeError, "npy: expected a rank-2 array, got rank " + std::to_string(h.shape.size()));
  }
  const std::size_t rows = h.shape[0], cols = h.shape[1];
  if (rows == 0 || cols == 0) throw Error(ErrorCode::ShapeError, "npy: empty axis in shape");

  std::vector<float> data(rows * cols);
  if (item == 4) {
    read_exact(in, reinterpret_cast<char*>(data.data()), data.size() * 4, "data");
  } else {
    std::vector<double> wide(rows * cols);
    read_exact(in, reinterpret_cast<char*>(wide.data()), wide.size() * 8, "data");
    for (std::size_t i = 0; i < wide.size(); ++i) data[i] = static_cast<float>(wide[i]);
  }
  EmbeddingMatrix m(rows, cols, std::move(data));
  if (auto bad = first_non_finite_row(m); bad >= 0) {
    throw DataErrorAtRow(static_cast<std::size_t>(bad), "npy: NaN or Inf in row " + std::to_string(bad));
  }
  if (header_out) *header_out = std::move(h);
  return m;
}

EmbeddingMatrix load_matrix(const std::filesystem::path& path, NpyHeader* header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  try {
    return read_matrix(in, header);
  } catch (const DataErrorAtRow& e) {
    throw DataErrorAtRow(e.row(), path.string() + ": " + e.detail());
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

void write_matrix(std::ostream& out, const EmbeddingMatrix& m) {
  std::ostringstream dict;
  dict << "{'descr': '<f4', 'fortran_order': False, 'shape': (" << m.rows() << ", " << m.cols() << "), }";
  std::string header = dict.str();
  const std::size_t unpadded = kMagicLen + 2 + 2 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');
  if (header.size() > 0xFFFF) throw Error(ErrorCode::InternalError, "npy header too long");

  out.write(kMagic, kMagicLen);
  const char version[2] = {1, 0};
  out.write(version, 2);
  const char len[2] = {static_cast<char>(header.size() & 0xFF), static_cast<char>(header.size() >> 8)};
  out.write(len, 2);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  auto values = m.values();
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  if (!out) throw Error(ErrorCode::IoError, "npy: write failed");
}

void write_matrix(const std::filesystem::path& path, const EmbeddingMatrix& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  write_matrix(out, m);
}

}  // namespace embedgeo
