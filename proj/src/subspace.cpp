#include "embedgeo/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "embedgeo/error.hpp"
#include "embedgeo/parallel.hpp"
#include "embedgeo/rng.hpp"

namespace embedgeo {
namespace {

constexpr double kSigmaTolerance = 1e-6;

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

// y[offset:] -= beta * v * (v · y[offset:])
void reflect(std::span<const double> v, double beta, std::span<double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * y[i];
  s *= beta;
  if (s == 0.0) return;
  for (std::size_t i = 0; i < v.size(); ++i) y[i] -= s * v[i];
}

}  // namespace

ThinQr thin_qr(MatrixD a, unsigned threads) {
  const std::size_t n = a.rows, d = a.cols;
  if (n < d) throw RankDeficient(n, "QR needs at least as many rows as columns");
  ThinQr out;
  out.r = MatrixD(d, d);
  std::vector<double> beta(d, 0.0);

  for (std::size_t j = 0; j < d; ++j) {
    auto x = a.col(j).subspan(j);
    const double norm = std::sqrt(dot(x, x));
    if (norm == 0.0) {
      out.r(j, j) = 0.0;
      beta[j] = 0.0;
      std::fill(x.begin(), x.end(), 0.0);
    } else {
      const double alpha = x[0] > 0 ? -norm : norm;
      x[0] -= alpha;
      const double vv = dot(x, x);
      beta[j] = vv == 0.0 ? 0.0 : 2.0 / vv;
      out.r(j, j) = alpha;
    }
    // Reduce the trailing columns; each column is independent.
    const std::size_t rest = d - j - 1;
    parallel_for_chunks(rest, threads, [&](std::size_t c0, std::size_t c1, unsigned) {
      for (std::size_t c = j + 1 + c0; c < j + 1 + c1; ++c) {
        if (beta[j] != 0.0) reflect(x, beta[j], a.col(c).subspan(j));
      }
    });
    for (std::size_t c = j + 1; c < d; ++c) out.r(j, c) = a(j, c);
  }

  double rmax = 0.0;
  for (std::size_t j = 0; j < d; ++j) rmax = std::max(rmax, std::abs(out.r(j, j)));
  const double tol = static_cast<double>(std::max(n, d)) * std::numeric_limits<double>::epsilon() * rmax;
  out.rank = 0;
  for (std::size_t j = 0; j < d; ++j) out.rank += std::abs(out.r(j, j)) > tol;

  // Q = H_0 ... H_{d-1} [I; 0], accumulated backwards. At step j only
  // columns ≥ j have support in rows ≥ j.
  out.q = MatrixD(n, d);
  for (std::size_t j = 0; j < d; ++j) out.q(j, j) = 1.0;
  for (std::size_t jj = d; jj-- > 0;) {
    if (beta[jj] == 0.0) continue;
    auto v = a.col(jj).subspan(jj);
    const std::size_t cols = d - jj;
    parallel_for_chunks(cols, threads, [&](std::size_t c0, std::size_t c1, unsigned) {
      for (std::size_t c = jj + c0; c < jj + c1; ++c) reflect(v, beta[jj], out.q.col(c).subspan(jj));
    });
  }
  // Non-negative diag(R).
  for (std::size_t j = 0; j < d; ++j) {
    if (out.r(j, j) < 0.0) {
      for (std::size_t c = j; c < d; ++c) out.r(j, c) = -out.r(j, c);
      for (double& v : out.q.col(j)) v = -v;
    }
  }
  return out;
}

std::vector<double> singular_values(MatrixD m) {
  if (m.rows < m.cols) {
    MatrixD t(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i)
      for (std::size_t j = 0; j < m.cols; ++j) t(j, i) = m(i, j);
    m = std::move(t);
  }
  const std::size_t p = m.cols;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr int kMaxSweeps = 80;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t i = 0; i + 1 < p; ++i) {
      for (std::size_t j = i + 1; j < p; ++j) {
        auto ci = m.col(i), cj = m.col(j);
        const double alpha = dot(ci, ci), beta = dot(cj, cj), gamma = dot(ci, cj);
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t r = 0; r < m.rows; ++r) {
          const double xi = ci[r], xj = cj[r];
          ci[r] = c * xi - s * xj;
          cj[r] = s * xi + c * xj;
        }
      }
    }
    if (!rotated) break;
  }
  std::vector<double> sigma(p);
  for (std::size_t j = 0; j < p; ++j) sigma[j] = std::sqrt(dot(m.col(j), m.col(j)));
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  return sigma;
}

AngleSpectrum canonical_angles(const EmbeddingMatrix& a, const EmbeddingMatrix& b, unsigned threads) {
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::ShapeError, "canonical angles need equal row counts, got " + std::to_string(a.rows()) +
                                           " and " + std::to_string(b.rows()));
  }
  const std::size_t n = a.rows();
  if (n < std::max(a.cols(), b.cols())) {
    throw RankDeficient(n, "canonical angles need n >= d, got n=" + std::to_string(n) +
                               " for d=" + std::to_string(std::max(a.cols(), b.cols())));
  }
  const ThinQr qa = thin_qr(MatrixD::from(a), threads);
  if (qa.rank < a.cols()) {
    throw RankDeficient(qa.rank, "first matrix is rank deficient: rank " + std::to_string(qa.rank) + " < " +
                                     std::to_string(a.cols()));
  }
  const ThinQr qb = thin_qr(MatrixD::from(b), threads);
  if (qb.rank < b.cols()) {
    throw RankDeficient(qb.rank, "second matrix is rank deficient: rank " + std::to_string(qb.rank) + " < " +
                                     std::to_string(b.cols()));
  }

  MatrixD product(a.cols(), b.cols());
  parallel_for(b.cols(), threads, [&](std::size_t j) {
    for (std::size_t i = 0; i < a.cols(); ++i) product(i, j) = dot(qa.q.col(i), qb.q.col(j));
  });

  AngleSpectrum spectrum;
  spectrum.n_rows = n;
  spectrum.d_a = a.cols();
  spectrum.d_b = b.cols();
  spectrum.sigma = singular_values(std::move(product));
  for (double& s : spectrum.sigma) {
    if (s > 1.0 + kSigmaTolerance) {
      throw Error(ErrorCode::InternalError, "singular value " + std::to_string(s) + " exceeds 1 beyond tolerance");
    }
    s = std::clamp(s, 0.0, 1.0);
  }
  return spectrum;
}

EmbeddingMatrix random_baseline(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n < d) {
    throw Error(ErrorCode::ArgumentError,
                "random baseline needs n >= d, got n=" + std::to_string(n) + ", d=" + std::to_string(d));
  }
  EmbeddingMatrix m(n, d);
  Rng rng = Rng::stream(seed, "subspace/random_baseline");
  for (float& v : m.values()) v = static_cast<float>(rng.normal());
  return m;
}

}  // namespace embedgeo
