#pragma once

#include <cstdint>
#include <vector>

#include "embedgeo/matrix.hpp"

namespace embedgeo {

/// Cosines of the principal angles between the column spaces of two
/// row-aligned matrices, largest first.
struct AngleSpectrum {
  std::vector<double> sigma;
  std::size_t n_rows = 0;
  std::size_t d_a = 0;
  std::size_t d_b = 0;

  double first() const { return sigma.front(); }
};

/// Thin Householder QR of an n×d matrix (n ≥ d): A = Q R with Q n×d
/// orthonormal and R d×d upper triangular. `rank` counts diagonal entries
/// of R above max(n, d)·ε·max|R_jj|.
struct ThinQr {
  MatrixD q;
  MatrixD r;
  std::size_t rank = 0;
};

ThinQr thin_qr(MatrixD a, unsigned threads = 1);

/// Singular values of a small dense matrix by one-sided Jacobi, descending.
std::vector<double> singular_values(MatrixD m);

/// σ(Q_Aᵀ Q_B). Errors: ShapeError (row counts differ), RankDeficient
/// (n < d, or either matrix not of full column rank), InternalError (a
/// singular value above 1 + 1e-6).
AngleSpectrum canonical_angles(const EmbeddingMatrix& a, const EmbeddingMatrix& b, unsigned threads = 1);

/// n×d i.i.d. standard-normal matrix. ArgumentError when n < d.
EmbeddingMatrix random_baseline(std::size_t n, std::size_t d, std::uint64_t seed);

}  // namespace embedgeo
