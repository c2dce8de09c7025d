#include "embedgeo/matrix.hpp"

#include <cmath>
#include <string>

#include "embedgeo/error.hpp"

namespace embedgeo {

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t cols)
    : EmbeddingMatrix(rows, cols, std::vector<float>(rows * cols, 0.0f)) {}

EmbeddingMatrix::EmbeddingMatrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows == 0 || cols == 0) {
    throw Error(ErrorCode::ShapeError,
                "embedding matrix must be at least 1x1, got " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (data_.size() != rows * cols) {
    throw Error(ErrorCode::ShapeError, "data size " + std::to_string(data_.size()) + " does not match " +
                                           std::to_string(rows) + "x" + std::to_string(cols));
  }
}

EmbeddingMatrix submatrix(const EmbeddingMatrix& m, std::span<const RowId> rows) {
  if (rows.empty()) throw Error(ErrorCode::ShapeError, "submatrix: empty row selection");
  std::vector<float> data;
  data.reserve(rows.size() * m.cols());
  for (RowId r : rows) {
    if (r >= m.rows()) {
      throw Error(ErrorCode::IndexError,
                  "submatrix: row " + std::to_string(r) + " out of range for " + std::to_string(m.rows()) + " rows");
    }
    auto src = m.row(r);
    data.insert(data.end(), src.begin(), src.end());
  }
  return EmbeddingMatrix(rows.size(), m.cols(), std::move(data));
}

std::ptrdiff_t first_non_finite_row(const EmbeddingMatrix& m) noexcept {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (float v : m.row(i)) {
      if (!std::isfinite(v)) return static_cast<std::ptrdiff_t>(i);
    }
  }
  return -1;
}

MatrixD MatrixD::from(const EmbeddingMatrix& m) {
  MatrixD out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = r[j];
  }
  return out;
}

}  // namespace embedgeo
