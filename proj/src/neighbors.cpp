#include "embedgeo/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <string>

#include "embedgeo/error.hpp"
#include "embedgeo/format.hpp"
#include "embedgeo/parallel.hpp"
#include "embedgeo/rng.hpp"

namespace embedgeo {
namespace {

// Fixed four-lane order; every caller goes through here so each pair is
// scored bit-identically regardless of how the loops around it are tiled.
inline double dot(const float* x, const float* y, std::size_t d) noexcept {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= d; i += 4) {
    a0 += static_cast<double>(x[i]) * static_cast<double>(y[i]);
    a1 += static_cast<double>(x[i + 1]) * static_cast<double>(y[i + 1]);
    a2 += static_cast<double>(x[i + 2]) * static_cast<double>(y[i + 2]);
    a3 += static_cast<double>(x[i + 3]) * static_cast<double>(y[i + 3]);
  }
  double s = (a0 + a1) + (a2 + a3);
  for (; i < d; ++i) s += static_cast<double>(x[i]) * static_cast<double>(y[i]);
  return s;
}

// Squared norms: sqrt(n*n) == n exactly, so identical rows land at 0.
inline double distance_from(double dot_xy, double sq_x, double sq_y) noexcept {
  const double d = 1.0 - dot_xy / std::sqrt(sq_x * sq_y);
  return std::clamp(d, 0.0, 2.0);
}

inline bool closer(const Neighbor& a, const Neighbor& b) noexcept {
  return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
}

// Bounded max-heap keeping the k best candidates under (distance, id).
class TopK {
 public:
  explicit TopK(std::size_t k) : k_(k) { heap_.reserve(k); }

  void reset() { heap_.clear(); }

  void offer(RowId id, double distance) {
    const Neighbor cand{id, distance};
    if (heap_.size() < k_) {
      heap_.push_back(cand);
      std::push_heap(heap_.begin(), heap_.end(), closer);
    } else if (closer(cand, heap_.front())) {
      std::pop_heap(heap_.begin(), heap_.end(), closer);
      heap_.back() = cand;
      std::push_heap(heap_.begin(), heap_.end(), closer);
    }
  }

  std::vector<Neighbor> take() {
    std::sort_heap(heap_.begin(), heap_.end(), closer);
    return std::move(heap_);
  }

 private:
  std::size_t k_;
  std::vector<Neighbor> heap_;
};

constexpr std::size_t kChunkQueries = 8192;

}  // namespace

double cosine_distance(std::span<const float> x, std::span<const float> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::ShapeError, "cosine_distance: dimension mismatch");
  const double nx = dot(x.data(), x.data(), x.size());
  const double ny = dot(y.data(), y.data(), y.size());
  if (nx == 0.0 || ny == 0.0) throw Error(ErrorCode::DegenerateQuery, "cosine_distance: zero vector");
  return distance_from(dot(x.data(), y.data(), x.size()), nx, ny);
}

CosineIndex::CosineIndex(const EmbeddingMatrix& m) : m_(&m), norms_(m.rows()) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const float* r = m.row(i).data();
    norms_[i] = dot(r, r, m.cols());
    if (norms_[i] == 0.0) ++degenerate_;
  }
}

std::vector<RowId> CosineIndex::usable_rows() const {
  std::vector<RowId> out;
  out.reserve(norms_.size() - degenerate_);
  for (std::size_t i = 0; i < norms_.size(); ++i) {
    if (norms_[i] != 0.0) out.push_back(static_cast<RowId>(i));
  }
  return out;
}

std::vector<NeighborSet> CosineIndex::search(std::span<const RowId> queries, std::size_t k,
                                             const KnnOptions& opts) const {
  const std::size_t rows = m_->rows();
  const std::size_t d = m_->cols();
  if (k == 0) throw Error(ErrorCode::ArgumentError, "knn: k must be positive");
  if (k >= rows) {
    throw Error(ErrorCode::ArgumentError,
                "knn: k=" + std::to_string(k) + " must be smaller than V=" + std::to_string(rows));
  }
  if (k > rows - degenerate_ - 1) {
    throw Error(ErrorCode::ArgumentError, "knn: k=" + std::to_string(k) + " exceeds the " +
                                              std::to_string(rows - degenerate_ - 1) + " usable neighbor rows");
  }
  for (RowId q : queries) {
    if (q >= rows) throw Error(ErrorCode::IndexError, "knn: query row " + std::to_string(q) + " out of range");
    if (norms_[q] == 0.0) throw Error(ErrorCode::DegenerateQuery, "knn: query row " + std::to_string(q) + " is all zeros");
  }

  const std::size_t qblock = std::max<std::size_t>(1, opts.query_block);
  const std::size_t rblock =
      opts.row_block > 0 ? opts.row_block : std::max<std::size_t>(16, (256 * 1024) / (sizeof(float) * d));
  const std::size_t nblocks = (queries.size() + qblock - 1) / qblock;

  std::vector<NeighborSet> out(queries.size());
  parallel_for_chunks(nblocks, opts.threads, [&](std::size_t b0, std::size_t b1, unsigned) {
    std::vector<TopK> heaps(qblock, TopK(k));
    for (std::size_t b = b0; b < b1; ++b) {
      const std::size_t q0 = b * qblock;
      const std::size_t q1 = std::min(queries.size(), q0 + qblock);
      for (std::size_t qi = q0; qi < q1; ++qi) heaps[qi - q0].reset();
      for (std::size_t r0 = 0; r0 < rows; r0 += rblock) {
        const std::size_t r1 = std::min(rows, r0 + rblock);
        for (std::size_t qi = q0; qi < q1; ++qi) {
          const RowId q = queries[qi];
          const float* qv = m_->row(q).data();
          const double qn = norms_[q];
          TopK& heap = heaps[qi - q0];
          for (std::size_t r = r0; r < r1; ++r) {
            if (r == q || norms_[r] == 0.0) continue;
            heap.offer(static_cast<RowId>(r), distance_from(dot(qv, m_->row(r).data(), d), qn, norms_[r]));
          }
        }
      }
      for (std::size_t qi = q0; qi < q1; ++qi) out[qi] = NeighborSet{queries[qi], heaps[qi - q0].take()};
    }
  });
  return out;
}

std::vector<NeighborSet> knn(const EmbeddingMatrix& m, std::span<const RowId> queries, std::size_t k,
                             const KnnOptions& opts) {
  return CosineIndex(m).search(queries, k, opts);
}

std::vector<RowId> sample_rows(std::size_t rows, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorCode::ArgumentError, "sample fraction must be in (0, 1]");
  const auto n = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(rows)));
  Rng rng = Rng::stream(seed, "neighbors/sample");
  std::vector<RowId> out;
  for (std::size_t i : rng.sample(rows, n)) out.push_back(static_cast<RowId>(i));
  std::sort(out.begin(), out.end());
  return out;
}

DiversityReport neighbor_diversity(const EmbeddingMatrix& m, const Vocabulary& vocab, std::size_t k,
                                   std::span<const RowId> queries, const KnnOptions& opts) {
  if (vocab.size() != m.rows()) {
    throw Error(ErrorCode::ShapeError, "diversity: vocabulary has " + std::to_string(vocab.size()) +
                                           " tokens but matrix has " + std::to_string(m.rows()) + " rows");
  }
  const CosineIndex index(m);
  DiversityReport report;
  report.k = k;
  std::vector<RowId> all;
  if (queries.empty()) {
    all = index.usable_rows();
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (index.is_degenerate(static_cast<RowId>(i))) report.skipped.push_back(static_cast<RowId>(i));
    }
    queries = all;
  }
  report.stats.reserve(queries.size());
  double sum = 0.0;
  for (std::size_t c0 = 0; c0 < queries.size(); c0 += kChunkQueries) {
    const auto chunk = queries.subspan(c0, std::min(kChunkQueries, queries.size() - c0));
    for (const NeighborSet& set : index.search(chunk, k, opts)) {
      std::map<TokenCategory, std::size_t> hist;
      for (const Neighbor& n : set.neighbors) ++hist[vocab[n.id].category];
      DiversityStat stat{set.query, hist.size(), {hist.begin(), hist.end()}};
      sum += static_cast<double>(stat.distinct);
      report.stats.push_back(std::move(stat));
    }
  }
  report.mean = report.stats.empty() ? 0.0 : sum / static_cast<double>(report.stats.size());
  return report;
}

BreakdownReport neighbor_breakdown(const EmbeddingMatrix& m, const Vocabulary& vocab, std::size_t k,
                                   std::span<const TokenCategory> for_categories, const KnnOptions& opts) {
  if (vocab.size() != m.rows()) throw Error(ErrorCode::ShapeError, "breakdown: vocabulary and matrix row counts differ");
  if (for_categories.empty()) throw Error(ErrorCode::ArgumentError, "breakdown: no categories requested");
  const CosineIndex index(m);
  BreakdownReport report;
  report.k = k;

  std::vector<std::map<TokenCategory, std::size_t>> counts;
  std::vector<std::size_t> tokens;
  std::map<TokenCategory, bool> seen_columns;
  for (TokenCategory cat : for_categories) {
    std::vector<RowId> rows;
    for (RowId r : vocab.rows_of(cat)) {
      if (!index.is_degenerate(r)) rows.push_back(r);
    }
    if (rows.empty()) {
      throw Error(ErrorCode::ArgumentError, "breakdown: category " + default_catalog().name(cat) +
                                                " has no usable tokens in '" + vocab.model_name() + "'");
    }
    std::map<TokenCategory, std::size_t> hist;
    for (std::size_t c0 = 0; c0 < rows.size(); c0 += kChunkQueries) {
      const std::span<const RowId> chunk(rows.data() + c0, std::min(kChunkQueries, rows.size() - c0));
      for (const NeighborSet& set : index.search(chunk, k, opts)) {
        for (const Neighbor& n : set.neighbors) ++hist[vocab[n.id].category];
      }
    }
    for (const auto& [c, n] : hist) seen_columns[c] = true;
    counts.push_back(std::move(hist));
    tokens.push_back(rows.size());
  }
  for (const auto& [c, unused] : seen_columns) report.columns.push_back(c);

  for (std::size_t i = 0; i < for_categories.size(); ++i) {
    BreakdownRow row;
    row.category = for_categories[i];
    row.tokens = tokens[i];
    const double slots = static_cast<double>(tokens[i] * k);
    for (TokenCategory c : report.columns) {
      auto it = counts[i].find(c);
      row.distribution.push_back(it == counts[i].end() ? 0.0 : static_cast<double>(it->second) / slots);
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

NeighborOverlapReport neighbor_overlap(const EmbeddingMatrix& a, const EmbeddingMatrix& b,
                                       const SharedAlignment& alignment, std::size_t k, const KnnOptions& opts) {
  if (a.rows() != alignment.size() || b.rows() != alignment.size()) {
    throw Error(ErrorCode::ShapeError, "overlap-nn: matrices have " + std::to_string(a.rows()) + " and " +
                                           std::to_string(b.rows()) + " rows but the alignment has " +
                                           std::to_string(alignment.size()) + " entries");
  }
  const CosineIndex ia(a), ib(b);
  NeighborOverlapReport report;
  report.k = k;
  std::vector<RowId> queries;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto r = static_cast<RowId>(i);
    if (ia.is_degenerate(r) || ib.is_degenerate(r)) {
      report.skipped.push_back(r);
    } else {
      queries.push_back(r);
    }
  }
  double sum = 0.0;
  std::vector<RowId> na, nb;
  for (std::size_t c0 = 0; c0 < queries.size(); c0 += kChunkQueries) {
    const std::span<const RowId> chunk(queries.data() + c0, std::min(kChunkQueries, queries.size() - c0));
    const auto sa = ia.search(chunk, k, opts);
    const auto sb = ib.search(chunk, k, opts);
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      na.clear();
      nb.clear();
      for (const auto& n : sa[i].neighbors) na.push_back(n.id);
      for (const auto& n : sb[i].neighbors) nb.push_back(n.id);
      std::sort(na.begin(), na.end());
      std::sort(nb.begin(), nb.end());
      std::size_t common = 0;
      for (std::size_t x = 0, y = 0; x < na.size() && y < nb.size();) {
        if (na[x] < nb[y]) {
          ++x;
        } else if (nb[y] < na[x]) {
          ++y;
        } else {
          ++common, ++x, ++y;
        }
      }
      report.stats.push_back({chunk[i], common});
      sum += static_cast<double>(common);
    }
  }
  report.mean = report.stats.empty() ? 0.0 : sum / static_cast<double>(report.stats.size());
  return report;
}

void export_neighbor_graph(std::span<const NeighborSet> sets, std::ostream& out) {
  std::vector<const NeighborSet*> order;
  order.reserve(sets.size());
  for (const auto& s : sets) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(), [](const NeighborSet* x, const NeighborSet* y) { return x->query < y->query; });
  out << "src,dst,distance\n";
  for (const NeighborSet* s : order) {
    for (const Neighbor& n : s->neighbors) {
      if (n.id == s->query) continue;
      out << s->query << ',' << n.id << ',' << format_double(n.distance) << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "export-graph: write failed");
}

void export_neighbor_graph(std::span<const NeighborSet> sets, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  export_neighbor_graph(sets, out);
}

}  // namespace embedgeo
