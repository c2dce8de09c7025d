#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "embedgeo/matrix.hpp"
#include "embedgeo/vocab.hpp"

namespace embedgeo {

/// Per-token occurrence counts, row-aligned with the vocabulary.
struct FrequencyTable {
  std::string corpus;
  std::vector<std::uint64_t> counts;
  /// Characters no vocabulary entry could cover.
  std::uint64_t unk = 0;
  /// Sum of counts plus unk.
  std::uint64_t total = 0;
  std::uint64_t lines = 0;
};

/// Greedy longest-prefix segmentation against a vocabulary. Each
/// whitespace-separated word is prefixed with U+2581 before matching; a
/// position with no match emits one UNK for a single code point.
class LongestMatchSegmenter {
 public:
  static constexpr std::int64_t kUnk = -1;

  explicit LongestMatchSegmenter(const Vocabulary& vocab);

  /// Calls emit(row) per piece, or emit(kUnk) for an uncovered code point.
  void segment_line(std::string_view line, const std::function<void(std::int64_t)>& emit) const;

 private:
  std::unordered_map<std::string, RowId> lookup_;
  std::size_t max_bytes_ = 0;
};

/// Streams a line-delimited UTF-8 corpus. Lines are processed in batches
/// spread over `threads` workers; per-worker tables are summed.
/// Errors: EmptyCorpus (no non-whitespace text), IoError.
FrequencyTable count_frequencies(std::istream& corpus, const Vocabulary& vocab, unsigned threads = 1,
                                 std::string descriptor = {});
FrequencyTable count_frequencies(const std::filesystem::path& corpus, const Vocabulary& vocab, unsigned threads = 1);

/// Spearman rank correlation with average ranks for ties; 0 when either
/// side is constant.
double spearman(std::span<const double> x, std::span<const double> y);

struct DiversityPoint {
  RowId row;
  std::size_t distinct;
};

struct FrequencyBand {
  std::size_t index = 0;
  std::uint64_t min_count = 0;
  std::uint64_t max_count = 0;
  std::size_t population = 0;
  std::vector<RowId> sampled;
  double mean_distinct = 0.0;
};

struct BandedSample {
  std::vector<FrequencyBand> bands;
  /// Tokens with zero count, reported outside the deciles.
  FrequencyBand zero_band;
  double spearman = 0.0;
  std::size_t sampled = 0;
  std::size_t per_band_sample = 0;
  std::uint64_t seed = 0;
};

/// Splits tokens that have a diversity value and a nonzero count into
/// equal-population bands by count, samples up to per_band_sample tokens
/// per band, and correlates log(1+count) with distinct-category count over
/// the sample. ArgumentError when there are fewer such tokens than bands.
BandedSample frequency_diversity(const FrequencyTable& freq, std::span<const DiversityPoint> diversity,
                                 std::size_t bands = 10, std::size_t per_band_sample = 100, std::uint64_t seed = 0);

}  // namespace embedgeo
