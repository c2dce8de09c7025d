#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "embedgeo/matrix.hpp"
#include "embedgeo/unicode_catalog.hpp"
#include "embedgeo/vocab.hpp"

namespace embedgeo {

struct Neighbor {
  RowId id;
  double distance;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Ranked neighbors of one query: ascending (distance, id), query excluded.
struct NeighborSet {
  RowId query;
  std::vector<Neighbor> neighbors;

  friend bool operator==(const NeighborSet&, const NeighborSet&) = default;
};

struct KnnOptions {
  unsigned threads = 1;
  /// Queries scored together against each row tile.
  std::size_t query_block = 32;
  /// Rows per tile; 0 picks a tile that fits in L2.
  std::size_t row_block = 0;
};

/// Exact cosine k-NN. Dot products accumulate float inputs in double with a
/// fixed summation order, so results do not depend on blocking or threads.
class CosineIndex {
 public:
  explicit CosineIndex(const EmbeddingMatrix& m);

  const EmbeddingMatrix& matrix() const noexcept { return *m_; }
  double norm(RowId row) const { return std::sqrt(norms_.at(row)); }
  bool is_degenerate(RowId row) const { return norms_.at(row) == 0.0; }
  std::size_t degenerate_count() const noexcept { return degenerate_; }
  std::vector<RowId> usable_rows() const;

  /// Errors: ArgumentError (k = 0, k ≥ V, k larger than the usable rows),
  /// IndexError (query ≥ V), DegenerateQuery (all-zero query row).
  std::vector<NeighborSet> search(std::span<const RowId> queries, std::size_t k, const KnnOptions& opts = {}) const;

 private:
  const EmbeddingMatrix* m_;
  std::vector<double> norms_;  // squared
  std::size_t degenerate_ = 0;
};

std::vector<NeighborSet> knn(const EmbeddingMatrix& m, std::span<const RowId> queries, std::size_t k,
                             const KnnOptions& opts = {});

/// The per-pair cosine distance used by the index, clamped to [0, 2].
double cosine_distance(std::span<const float> x, std::span<const float> y);

/// Sorted ids of a seeded uniform sample of ceil(fraction·V) rows.
std::vector<RowId> sample_rows(std::size_t rows, double fraction, std::uint64_t seed);

struct DiversityStat {
  RowId query;
  std::size_t distinct;
  /// Neighbor-category counts in category order; counts sum to k.
  std::vector<std::pair<TokenCategory, std::size_t>> histogram;
};

struct DiversityReport {
  std::size_t k = 0;
  std::vector<DiversityStat> stats;
  double mean = 0.0;
  /// All-zero rows that were not queried.
  std::vector<RowId> skipped;
};

/// Distinct neighbor categories per query. An empty `queries` span means
/// every usable row; the query's own category is not counted.
DiversityReport neighbor_diversity(const EmbeddingMatrix& m, const Vocabulary& vocab, std::size_t k,
                                   std::span<const RowId> queries = {}, const KnnOptions& opts = {});

struct BreakdownRow {
  TokenCategory category;
  std::size_t tokens = 0;
  /// Share of neighbor slots per column; sums to 1.
  std::vector<double> distribution;
};

struct BreakdownReport {
  std::size_t k = 0;
  std::vector<TokenCategory> columns;
  std::vector<BreakdownRow> rows;
};

/// For each requested category, the distribution of its tokens' neighbors
/// over categories. ArgumentError if a category has no usable token.
BreakdownReport neighbor_breakdown(const EmbeddingMatrix& m, const Vocabulary& vocab, std::size_t k,
                                   std::span<const TokenCategory> for_categories, const KnnOptions& opts = {});

struct OverlapStat {
  RowId row;
  std::size_t common;
};

struct NeighborOverlapReport {
  std::size_t k = 0;
  std::vector<OverlapStat> stats;
  double mean = 0.0;
  std::vector<RowId> skipped;
};

/// |N_a(t) ∩ N_b(t)| for every shared token t. Row i of both matrices must
/// be alignment entry i (see submatrix); ShapeError otherwise.
NeighborOverlapReport neighbor_overlap(const EmbeddingMatrix& a, const EmbeddingMatrix& b,
                                       const SharedAlignment& alignment, std::size_t k, const KnnOptions& opts = {});

/// CSV edge list "src,dst,distance", sorted by src then rank.
void export_neighbor_graph(std::span<const NeighborSet> sets, std::ostream& out);
void export_neighbor_graph(std::span<const NeighborSet> sets, const std::filesystem::path& path);

}  // namespace embedgeo
