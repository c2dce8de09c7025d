#pragma once

// Shared fixtures and independent oracles for the unit and acceptance tests.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "embedgeo/matrix.hpp"
#include "embedgeo/neighbors.hpp"
#include "embedgeo/unicode_catalog.hpp"
#include "embedgeo/utf8.hpp"
#include "embedgeo/vocab.hpp"

namespace testing {

using embedgeo::EmbeddingMatrix;
using embedgeo::RowId;

inline EmbeddingMatrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  EmbeddingMatrix m(rows, cols);
  for (float& v : m.values()) v = static_cast<float>(nd(gen));
  return m;
}

inline Eigen::MatrixXd to_eigen(const EmbeddingMatrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

inline EmbeddingMatrix from_eigen(const Eigen::MatrixXd& e) {
  EmbeddingMatrix m(e.rows(), e.cols());
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j) m(i, j) = static_cast<float>(e(i, j));
  return m;
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian with sign fix).
inline Eigen::MatrixXd random_orthogonal(std::size_t d, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = nd(gen);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (std::size_t j = 0; j < d; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;
  return q;
}

/// Rows of m times Q, rounded to float.
inline EmbeddingMatrix rotate(const EmbeddingMatrix& m, const Eigen::MatrixXd& q) {
  return from_eigen(to_eigen(m) * q);
}

/// Naive double-loop cosine k-NN: plain double accumulation, full sort.
inline std::vector<embedgeo::NeighborSet> naive_knn(const EmbeddingMatrix& m, const std::vector<RowId>& queries,
                                                    std::size_t k) {
  const std::size_t v = m.rows(), d = m.cols();
  std::vector<double> norms(v);
  for (std::size_t i = 0; i < v; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < d; ++j) s += double(m(i, j)) * double(m(i, j));
    norms[i] = std::sqrt(s);
  }
  std::vector<embedgeo::NeighborSet> out;
  for (RowId q : queries) {
    std::vector<embedgeo::Neighbor> all;
    for (std::size_t i = 0; i < v; ++i) {
      if (i == q || norms[i] == 0.0) continue;
      double dot = 0;
      for (std::size_t j = 0; j < d; ++j) dot += double(m(q, j)) * double(m(i, j));
      double dist = 1.0 - dot / (norms[q] * norms[i]);
      dist = std::clamp(dist, 0.0, 2.0);
      all.push_back({static_cast<RowId>(i), dist});
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
    });
    all.resize(k);
    out.push_back({q, all});
  }
  return out;
}

/// Radix-10 token spelled with ten consecutive letters starting at `base`.
inline std::string letters_token(char32_t base, std::size_t idx, std::size_t width = 3) {
  std::string s;
  std::vector<char32_t> digits;
  for (std::size_t i = 0; i < width; ++i, idx /= 10) digits.push_back(base + static_cast<char32_t>(idx % 10));
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) embedgeo::utf8::append(s, *it);
  return s;
}

struct ScriptBase {
  const char* name;
  char32_t base;
};

/// Scripts whose ten consecutive code points from `base` are all letters.
inline const std::vector<ScriptBase>& script_bases() {
  static const std::vector<ScriptBase> v{
      {"LATIN", U'a'},       {"CYRILLIC", U'а'}, {"GREEK", U'α'},    {"ARABIC", U'ب'},
      {"HEBREW", U'א'}, {"DEVANAGARI", U'क'}, {"HIRAGANA", U'あ'}, {"HANGUL", U'가'},
      {"THAI", U'ก'},   {"GEORGIAN", U'ა'}, {"ARMENIAN", U'ա'},
  };
  return v;
}

struct Labeled {
  EmbeddingMatrix m;
  embedgeo::Vocabulary v;
};

/// Vocabulary whose row i is a token of script_bases()[script_of_row[i]].
inline embedgeo::Vocabulary script_vocab(const std::vector<std::size_t>& script_of_row) {
  std::vector<std::string> tokens;
  std::vector<std::size_t> seen(script_bases().size(), 0);
  for (std::size_t s : script_of_row) tokens.push_back(letters_token(script_bases()[s].base, seen[s]++));
  return embedgeo::Vocabulary::from_tokens(tokens, embedgeo::TokenScheme::sentencepiece, "synthetic");
}

/// c categories of `per` tokens; category i lives on its own 4 dimensions,
/// so cosine across categories is exactly 0.
inline Labeled pure_clusters(std::size_t c, std::size_t per, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  EmbeddingMatrix m(c * per, 4 * c);
  std::vector<std::size_t> script;
  for (std::size_t i = 0; i < c * per; ++i) {
    const std::size_t k = i % c;
    for (std::size_t j = 0; j < 4; ++j) m(i, 4 * k + j) = static_cast<float>(u(gen));
    script.push_back(k);
  }
  return {std::move(m), script_vocab(script)};
}

/// n points evenly spaced on the unit circle, category i mod c: any run of
/// c consecutive neighbours covers every category.
inline Labeled round_robin_circle(std::size_t n, std::size_t c) {
  EmbeddingMatrix m(n, 2);
  std::vector<std::size_t> script;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * double(i) / double(n);
    m(i, 0) = static_cast<float>(std::cos(t));
    m(i, 1) = static_cast<float>(std::sin(t));
    script.push_back(i % c);
  }
  return {std::move(m), script_vocab(script)};
}

}  // namespace testing
