#include "embedgeo/vocab.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <iterator>
#include "json.hpp"
#include <set>
#include <sstream>

#include "embedgeo/error.hpp"
#include "embedgeo/utf8.hpp"

namespace embedgeo {
namespace {

// Inverse of the GPT-2 bytes_to_unicode table: printable Latin-1 bytes stand
// for themselves, the remaining 68 bytes are shifted to U+0100.. in order.
struct ByteAlphabet {
  std::array<int, 512> to_byte{};
  ByteAlphabet() {
    to_byte.fill(-1);
    int shifted = 0;
    for (int b = 0; b < 256; ++b) {
      const bool printable = (b >= 0x21 && b <= 0x7E) || (b >= 0xA1 && b <= 0xAC) || (b >= 0xAE && b <= 0xFF);
      if (printable) {
        to_byte[b] = b;
      } else {
        to_byte[256 + shifted++] = b;
      }
    }
  }
};

const ByteAlphabet& byte_alphabet() {
  static const ByteAlphabet alphabet;
  return alphabet;
}

constexpr std::string_view kMarkerUtf8 = "\xE2\x96\x81";
constexpr std::string_view kGpt2Space = "\xC4\xA0";  // U+0120

}  // namespace

std::string_view to_string(TokenScheme scheme) noexcept {
  return scheme == TokenScheme::byte_bpe ? "byte_bpe" : "sentencepiece";
}

std::optional<TokenScheme> parse_scheme(std::string_view name) noexcept {
  if (name == "byte_bpe") return TokenScheme::byte_bpe;
  if (name == "sentencepiece") return TokenScheme::sentencepiece;
  return std::nullopt;
}

std::string normalize_token(std::string_view raw, TokenScheme scheme, bool* undecodable) {
  if (undecodable) *undecodable = false;
  if (scheme == TokenScheme::sentencepiece) return std::string(raw);

  const auto& alphabet = byte_alphabet();
  std::string bytes;
  bytes.reserve(raw.size());
  std::size_t pos = 0;
  while (pos < raw.size()) {
    const std::size_t start = pos;
    const char32_t c = utf8::decode_next(raw, pos);
    if (c < alphabet.to_byte.size() && alphabet.to_byte[c] >= 0 && c != utf8::kReplacement) {
      bytes.push_back(static_cast<char>(alphabet.to_byte[c]));
    } else {
      // Outside the byte alphabet (e.g. added special tokens): keep as is.
      bytes.append(raw.substr(start, pos - start));
    }
  }

  std::string out;
  out.reserve(bytes.size() + 4);
  pos = 0;
  while (pos < bytes.size()) {
    if (bytes[pos] == ' ') {
      out.append(kMarkerUtf8);
      ++pos;
      continue;
    }
    const std::size_t len = utf8::sequence_length(bytes, pos);
    if (len == 0) {
      char buf[8];
      std::snprintf(buf, sizeof buf, "<0x%02X>", static_cast<unsigned char>(bytes[pos]));
      out.append(buf);
      if (undecodable) *undecodable = true;
      ++pos;
    } else {
      out.append(bytes, pos, len);
      pos += len;
    }
  }
  return out;
}

TokenScheme detect_scheme(const std::vector<std::string>& raw_tokens) {
  bool gpt2_prefix = false;
  for (const auto& t : raw_tokens) {
    if (t.find(kMarkerUtf8) != std::string::npos) return TokenScheme::sentencepiece;
    if (t.starts_with(kGpt2Space)) gpt2_prefix = true;
  }
  return gpt2_prefix ? TokenScheme::byte_bpe : TokenScheme::sentencepiece;
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> raw, TokenScheme scheme, std::string model_name,
                                   const UnicodeCatalog& catalog) {
  if (raw.empty()) throw Error(ErrorCode::SchemaError, "vocabulary is empty");
  Vocabulary v;
  v.model_name_ = std::move(model_name);
  v.scheme_ = scheme;
  v.records_.reserve(raw.size());
  v.index_.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i].empty()) throw Error(ErrorCode::SchemaError, "empty token at row " + std::to_string(i));
    TokenRecord rec;
    rec.raw = std::move(raw[i]);
    rec.normalized = normalize_token(rec.raw, scheme, &rec.undecodable);
    rec.category = catalog.categorize_token(rec.normalized);
    rec.key = rec.normalized;
    const auto row = static_cast<RowId>(i);
    if (auto it = v.index_.find(rec.key); it != v.index_.end()) {
      const RowId first = it->second;
      for (std::size_t n = 1;; ++n) {
        std::string candidate = rec.normalized + "#dup" + std::to_string(n);
        if (!v.index_.contains(candidate)) {
          rec.key = std::move(candidate);
          break;
        }
      }
      v.collisions_.push_back({row, first, rec.key});
    }
    v.index_.emplace(rec.key, row);
    v.records_.push_back(std::move(rec));
  }
  return v;
}

std::optional<RowId> Vocabulary::find(const std::string& key) const {
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  return std::nullopt;
}

std::size_t Vocabulary::undecodable_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(records_.begin(), records_.end(), [](const TokenRecord& r) { return r.undecodable; }));
}

std::map<TokenCategory, std::size_t> Vocabulary::category_counts() const {
  std::map<TokenCategory, std::size_t> out;
  for (const auto& r : records_) ++out[r.category];
  return out;
}

std::vector<RowId> Vocabulary::rows_of(TokenCategory category) const {
  std::vector<RowId> out;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (records_[i].category == category) out.push_back(static_cast<RowId>(i));
  }
  return out;
}

Vocabulary parse_vocab(std::string_view json_text, std::string model_name, std::optional<TokenScheme> scheme,
                       const UnicodeCatalog& catalog) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::ParseError, std::string("vocab JSON: ") + e.what());
  }

  std::vector<std::string> tokens;
  if (doc.is_array()) {
    tokens.reserve(doc.size());
    for (std::size_t i = 0; i < doc.size(); ++i) {
      if (!doc[i].is_string()) throw Error(ErrorCode::SchemaError, "vocab array entry " + std::to_string(i) + " is not a string");
      tokens.push_back(doc[i].get<std::string>());
    }
  } else if (doc.is_object()) {
    const std::size_t n = doc.size();
    tokens.assign(n, std::string());
    std::vector<bool> seen(n, false);
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      if (!it.value().is_number_integer()) {
        throw Error(ErrorCode::SchemaError, "vocab id for '" + it.key() + "' is not an integer");
      }
      const auto id = it.value().get<std::int64_t>();
      if (id < 0 || static_cast<std::size_t>(id) >= n || seen[static_cast<std::size_t>(id)]) {
        throw Error(ErrorCode::SchemaError,
                    "vocab ids are not dense 0.." + std::to_string(n - 1) + " (offending id " + std::to_string(id) + ")");
      }
      seen[static_cast<std::size_t>(id)] = true;
      tokens[static_cast<std::size_t>(id)] = it.key();
    }
  } else {
    throw Error(ErrorCode::SchemaError, "vocab JSON must be an object {token: id} or an array of tokens");
  }
  const TokenScheme resolved = scheme ? *scheme : detect_scheme(tokens);
  return Vocabulary::from_tokens(std::move(tokens), resolved, std::move(model_name), catalog);
}

Vocabulary load_vocab(const std::filesystem::path& path, std::optional<TokenScheme> scheme,
                      const UnicodeCatalog& catalog) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_vocab(text, path.stem().string(), scheme, catalog);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.detail());
  }
}

std::vector<RowId> SharedAlignment::rows_a() const {
  std::vector<RowId> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.row_a);
  return out;
}

std::vector<RowId> SharedAlignment::rows_b() const {
  std::vector<RowId> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.row_b);
  return out;
}

SharedAlignment align(const Vocabulary& a, const Vocabulary& b) {
  SharedAlignment out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& rec = a[static_cast<RowId>(i)];
    if (auto j = b.find(rec.key)) out.entries.push_back({rec.key, static_cast<RowId>(i), *j, rec.category});
  }
  if (out.entries.empty()) {
    throw Error(ErrorCode::EmptyAlignment, "vocabularies '" + a.model_name() + "' and '" + b.model_name() +
                                               "' share no tokens");
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const AlignedToken& x, const AlignedToken& y) { return x.token < y.token; });
  for (const auto& e : out.entries) ++out.counts[e.category];
  return out;
}

SharedAlignment restrict_to(const SharedAlignment& alignment, const Vocabulary& other) {
  SharedAlignment out;
  for (const auto& e : alignment.entries) {
    if (other.find(e.token)) {
      out.entries.push_back(e);
      ++out.counts[e.category];
    }
  }
  if (out.entries.empty()) {
    throw Error(ErrorCode::EmptyAlignment, "no shared token also occurs in '" + other.model_name() + "'");
  }
  return out;
}

namespace {

OverlapRow make_row(std::string label, std::size_t size_a, std::size_t size_b, std::size_t shared) {
  OverlapRow row;
  row.label = std::move(label);
  row.size_a = size_a;
  row.size_b = size_b;
  row.shared = shared;
  auto pct = [&](std::size_t denom) -> std::optional<double> {
    if (denom == 0) return std::nullopt;
    return 100.0 * static_cast<double>(shared) / static_cast<double>(denom);
  };
  row.pct_min = pct(std::min(size_a, size_b));
  row.pct_a = pct(size_a);
  row.pct_b = pct(size_b);
  return row;
}

}  // namespace

OverlapReport overlap_stats(const Vocabulary& a, const Vocabulary& b, const UnicodeCatalog& catalog) {
  OverlapReport report;
  report.model_a = a.model_name();
  report.model_b = b.model_name();

  const auto counts_a = a.category_counts();
  const auto counts_b = b.category_counts();
  std::map<TokenCategory, std::size_t> shared;
  std::size_t shared_total = 0;
  for (const auto& rec : a.records()) {
    if (b.find(rec.key)) {
      ++shared[rec.category];
      ++shared_total;
    }
  }

  const auto latin = catalog.parse("LATIN");
  auto lookup = [](const std::map<TokenCategory, std::size_t>& m, TokenCategory c) -> std::size_t {
    auto it = m.find(c);
    return it == m.end() ? 0 : it->second;
  };
  const std::size_t latin_a = latin ? lookup(counts_a, *latin) : 0;
  const std::size_t latin_b = latin ? lookup(counts_b, *latin) : 0;
  const std::size_t latin_shared = latin ? lookup(shared, *latin) : 0;

  report.total = make_row("ALL", a.size(), b.size(), shared_total);
  report.latin = make_row("LATIN", latin_a, latin_b, latin_shared);
  report.non_latin = make_row("NON_LATIN", a.size() - latin_a, b.size() - latin_b, shared_total - latin_shared);

  std::set<TokenCategory> labels;
  for (const auto& [c, n] : counts_a) labels.insert(c);
  for (const auto& [c, n] : counts_b) labels.insert(c);
  for (TokenCategory c : labels) {
    report.by_category.push_back(make_row(catalog.name(c), lookup(counts_a, c), lookup(counts_b, c), lookup(shared, c)));
  }
  return report;
}

}  // namespace embedgeo
