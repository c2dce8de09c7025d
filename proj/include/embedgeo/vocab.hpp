#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "embedgeo/matrix.hpp"
#include "embedgeo/unicode_catalog.hpp"

namespace embedgeo {

enum class TokenScheme { sentencepiece, byte_bpe };

std::string_view to_string(TokenScheme scheme) noexcept;
std::optional<TokenScheme> parse_scheme(std::string_view name) noexcept;

/// Rewrites a raw vocabulary entry into the SentencePiece convention.
/// byte_bpe: the byte-level alphabet is mapped back to bytes, spaces become
/// U+2581, and well-formed UTF-8 is decoded; stray bytes are kept as
/// "<0xHH>" literals and reported through `undecodable`.
/// sentencepiece: identity.
std::string normalize_token(std::string_view raw, TokenScheme scheme, bool* undecodable = nullptr);

/// byte_bpe when some entry carries the 'Ġ' space prefix and none carries
/// U+2581; sentencepiece otherwise.
TokenScheme detect_scheme(const std::vector<std::string>& raw_tokens);

struct TokenRecord {
  std::string raw;
  std::string normalized;
  /// Unique lookup key: `normalized`, plus "#dupN" when an earlier row
  /// already normalized to the same string.
  std::string key;
  TokenCategory category;
  bool undecodable = false;
};

struct Collision {
  RowId row;
  RowId first_row;
  std::string key;
};

class Vocabulary {
 public:
  /// Normalizes, disambiguates and categorizes raw tokens; row order is kept.
  static Vocabulary from_tokens(std::vector<std::string> raw, TokenScheme scheme, std::string model_name,
                                const UnicodeCatalog& catalog = default_catalog());

  std::size_t size() const noexcept { return records_.size(); }
  const std::string& model_name() const noexcept { return model_name_; }
  TokenScheme scheme() const noexcept { return scheme_; }
  const TokenRecord& operator[](RowId id) const { return records_.at(id); }
  const std::vector<TokenRecord>& records() const noexcept { return records_; }
  std::optional<RowId> find(const std::string& key) const;

  const std::vector<Collision>& collisions() const noexcept { return collisions_; }
  std::size_t undecodable_count() const noexcept;
  std::map<TokenCategory, std::size_t> category_counts() const;
  std::vector<RowId> rows_of(TokenCategory category) const;

 private:
  std::string model_name_;
  TokenScheme scheme_ = TokenScheme::sentencepiece;
  std::vector<TokenRecord> records_;
  std::unordered_map<std::string, RowId> index_;
  std::vector<Collision> collisions_;
};

/// Loads a JSON vocabulary: either {token: id} with ids exactly 0..V-1 or an
/// ordered [token, ...] array. Without an explicit scheme it is detected.
/// Errors: ParseError (malformed JSON), SchemaError (wrong shape, non-dense
/// ids, empty tokens), IoError.
Vocabulary load_vocab(const std::filesystem::path& path, std::optional<TokenScheme> scheme = std::nullopt,
                      const UnicodeCatalog& catalog = default_catalog());
Vocabulary parse_vocab(std::string_view json_text, std::string model_name,
                       std::optional<TokenScheme> scheme = std::nullopt,
                       const UnicodeCatalog& catalog = default_catalog());

struct AlignedToken {
  std::string token;
  RowId row_a;
  RowId row_b;
  TokenCategory category;
};

/// Tokens present in both vocabularies, sorted by token bytes.
struct SharedAlignment {
  std::vector<AlignedToken> entries;
  std::map<TokenCategory, std::size_t> counts;

  std::vector<RowId> rows_a() const;
  std::vector<RowId> rows_b() const;
  std::size_t size() const noexcept { return entries.size(); }
};

/// Exact key intersection. Throws EmptyAlignment when nothing is shared.
SharedAlignment align(const Vocabulary& a, const Vocabulary& b);

/// Keeps only entries whose token also occurs in `other` (used for
/// three-way shared vocabularies). Throws EmptyAlignment if none survive.
SharedAlignment restrict_to(const SharedAlignment& alignment, const Vocabulary& other);

struct OverlapRow {
  std::string label;
  std::size_t size_a = 0;
  std::size_t size_b = 0;
  std::size_t shared = 0;
  /// Percentages; nullopt when the denominator is zero.
  std::optional<double> pct_min;
  std::optional<double> pct_a;
  std::optional<double> pct_b;
};

struct OverlapReport {
  std::string model_a;
  std::string model_b;
  OverlapRow total;
  OverlapRow latin;
  OverlapRow non_latin;
  std::vector<OverlapRow> by_category;
};

/// Shared-token counts with three denominators: min(|A|,|B|), |A| and |B|.
OverlapReport overlap_stats(const Vocabulary& a, const Vocabulary& b,
                            const UnicodeCatalog& catalog = default_catalog());

}  // namespace embedgeo
