#include "embedgeo/corpus_stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <unordered_set>

#include "embedgeo/error.hpp"
#include "embedgeo/parallel.hpp"
#include "embedgeo/rng.hpp"
#include "embedgeo/utf8.hpp"

namespace embedgeo {
namespace {

constexpr std::string_view kMarker = "\xE2\x96\x81";
constexpr std::size_t kBatchLines = 4096;

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f'; }

inline bool is_boundary(const std::string& s, std::size_t pos) {
  return pos >= s.size() || (static_cast<unsigned char>(s[pos]) & 0xC0) != 0x80;
}

}  // namespace

LongestMatchSegmenter::LongestMatchSegmenter(const Vocabulary& vocab) {
  lookup_.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const std::string& t = vocab[static_cast<RowId>(i)].normalized;
    lookup_.emplace(t, static_cast<RowId>(i));
    max_bytes_ = std::max(max_bytes_, t.size());
  }
}

void LongestMatchSegmenter::segment_line(std::string_view line, const std::function<void(std::int64_t)>& emit) const {
  std::string word;
  std::string probe;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    word.assign(kMarker);
    word.append(line.substr(i, j - i));
    i = j;

    std::size_t pos = 0;
    while (pos < word.size()) {
      bool matched = false;
      for (std::size_t len = std::min(max_bytes_, word.size() - pos); len > 0; --len) {
        if (!is_boundary(word, pos + len)) continue;
        probe.assign(word, pos, len);
        if (auto it = lookup_.find(probe); it != lookup_.end()) {
          emit(it->second);
          pos += len;
          matched = true;
          break;
        }
      }
      if (!matched) {
        emit(kUnk);
        (void)utf8::decode_next(word, pos);
      }
    }
  }
}

FrequencyTable count_frequencies(std::istream& corpus, const Vocabulary& vocab, unsigned threads,
                                 std::string descriptor) {
  const LongestMatchSegmenter segmenter(vocab);
  const unsigned workers = std::max(1u, threads);
  std::vector<std::vector<std::uint64_t>> counts(workers, std::vector<std::uint64_t>(vocab.size(), 0));
  std::vector<std::uint64_t> unk(workers, 0);

  FrequencyTable table;
  table.corpus = std::move(descriptor);
  std::vector<std::string> batch;
  batch.reserve(kBatchLines);
  std::string line;
  bool more = true;
  while (more) {
    batch.clear();
    while (batch.size() < kBatchLines && (more = static_cast<bool>(std::getline(corpus, line)))) {
      batch.push_back(line);
    }
    if (corpus.bad()) throw Error(ErrorCode::IoError, "error while reading corpus");
    table.lines += batch.size();
    parallel_for_chunks(batch.size(), workers, [&](std::size_t b0, std::size_t b1, unsigned w) {
      auto& mine = counts[w];
      std::uint64_t& my_unk = unk[w];
      for (std::size_t b = b0; b < b1; ++b) {
        segmenter.segment_line(batch[b], [&](std::int64_t row) {
          if (row == LongestMatchSegmenter::kUnk) {
            ++my_unk;
          } else {
            ++mine[static_cast<std::size_t>(row)];
          }
        });
      }
    });
  }

  table.counts.assign(vocab.size(), 0);
  for (unsigned w = 0; w < workers; ++w) {
    for (std::size_t r = 0; r < vocab.size(); ++r) table.counts[r] += counts[w][r];
    table.unk += unk[w];
  }
  table.total = std::accumulate(table.counts.begin(), table.counts.end(), std::uint64_t{0}) + table.unk;
  if (table.total == 0) throw Error(ErrorCode::EmptyCorpus, "corpus contains no text");
  return table;
}

FrequencyTable count_frequencies(const std::filesystem::path& corpus, const Vocabulary& vocab, unsigned threads) {
  std::ifstream in(corpus, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + corpus.string());
  try {
    return count_frequencies(in, vocab, threads, corpus.filename().string());
  } catch (const Error& e) {
    throw Error(e.code(), corpus.string() + ": " + e.detail());
  }
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::ShapeError, "spearman: length mismatch");
  if (x.size() < 2) return 0.0;
  const auto rx = average_ranks(x), ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

BandedSample frequency_diversity(const FrequencyTable& freq, std::span<const DiversityPoint> diversity,
                                 std::size_t bands, std::size_t per_band_sample, std::uint64_t seed) {
  if (bands == 0) throw Error(ErrorCode::ArgumentError, "freq-div: bands must be positive");
  struct Point {
    RowId row;
    std::uint64_t count;
    std::size_t distinct;
  };
  std::vector<Point> nonzero, zero;
  std::unordered_set<RowId> seen;
  for (const DiversityPoint& p : diversity) {
    if (p.row >= freq.counts.size()) {
      throw Error(ErrorCode::IndexError, "freq-div: diversity row " + std::to_string(p.row) + " not in frequency table");
    }
    if (!seen.insert(p.row).second) {
      throw Error(ErrorCode::ArgumentError, "freq-div: duplicate diversity row " + std::to_string(p.row));
    }
    const std::uint64_t c = freq.counts[p.row];
    (c == 0 ? zero : nonzero).push_back({p.row, c, p.distinct});
  }
  if (nonzero.size() < bands) {
    throw Error(ErrorCode::ArgumentError, "freq-div: " + std::to_string(nonzero.size()) +
                                              " tokens with nonzero count, fewer than " + std::to_string(bands) +
                                              " bands");
  }
  std::sort(nonzero.begin(), nonzero.end(),
            [](const Point& a, const Point& b) { return a.count < b.count || (a.count == b.count && a.row < b.row); });

  BandedSample out;
  out.per_band_sample = per_band_sample;
  out.seed = seed;
  std::vector<double> xs, ys;
  auto fill = [&](FrequencyBand& band, std::span<const Point> members, std::string_view stream, bool correlate) {
    band.population = members.size();
    if (!members.empty()) {
      band.min_count = members.front().count;
      band.max_count = members.back().count;
    }
    Rng rng = Rng::stream(seed, stream);
    std::vector<std::size_t> picks = rng.sample(members.size(), std::min(per_band_sample, members.size()));
    std::sort(picks.begin(), picks.end());
    double sum = 0.0;
    for (std::size_t i : picks) {
      const Point& p = members[i];
      band.sampled.push_back(p.row);
      sum += static_cast<double>(p.distinct);
      if (correlate) {
        xs.push_back(std::log1p(static_cast<double>(p.count)));
        ys.push_back(static_cast<double>(p.distinct));
      }
    }
    band.mean_distinct = picks.empty() ? 0.0 : sum / static_cast<double>(picks.size());
  };

  const std::size_t n = nonzero.size();
  for (std::size_t b = 0; b < bands; ++b) {
    FrequencyBand band;
    band.index = b;
    const std::size_t lo = n * b / bands, hi = n * (b + 1) / bands;
    fill(band, std::span<const Point>(nonzero).subspan(lo, hi - lo), "freq-div/band/" + std::to_string(b), true);
    out.sampled += band.sampled.size();
    out.bands.push_back(std::move(band));
  }
  std::sort(zero.begin(), zero.end(), [](const Point& a, const Point& b) { return a.row < b.row; });
  out.zero_band.index = bands;
  fill(out.zero_band, zero, "freq-div/band/zero", false);
  out.spearman = spearman(xs, ys);
  return out;
}

}  // namespace embedgeo
