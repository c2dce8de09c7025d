#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace embedgeo {

using RowId = std::uint32_t;

/// V×d row-major float32 matrix; row i is the vector of vocabulary token i.
class EmbeddingMatrix {
 public:
  /// Zero-filled. Throws ShapeError unless rows ≥ 1 and cols ≥ 1.
  EmbeddingMatrix(std::size_t rows, std::size_t cols);
  EmbeddingMatrix(std::size_t rows, std::size_t cols, std::vector<float> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<const float> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<float> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }

  float operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
  float& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

  std::span<const float> values() const noexcept { return data_; }
  std::span<float> values() noexcept { return data_; }

  friend bool operator==(const EmbeddingMatrix&, const EmbeddingMatrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<float> data_;
};

/// Row-gathered copy: result row i is m.row(rows[i]). Throws IndexError for
/// ids ≥ V and ShapeError for an empty selection.
EmbeddingMatrix submatrix(const EmbeddingMatrix& m, std::span<const RowId> rows);

/// Index of the first row holding NaN or Inf, if any.
std::ptrdiff_t first_non_finite_row(const EmbeddingMatrix& m) noexcept;

/// Column-major double matrix used by the numerical kernels.
struct MatrixD {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  MatrixD() = default;
  MatrixD(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) noexcept { return data[j * rows + i]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data[j * rows + i]; }
  std::span<double> col(std::size_t j) noexcept { return {data.data() + j * rows, rows}; }
  std::span<const double> col(std::size_t j) const noexcept { return {data.data() + j * rows, rows}; }

  static MatrixD from(const EmbeddingMatrix& m);
};

}  // namespace embedgeo
