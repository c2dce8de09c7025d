#include "embedgeo/unicode_catalog.hpp"

#include <algorithm>
#include <array>
#include <vector>

#include "embedgeo/error.hpp"
#include "embedgeo/utf8.hpp"

namespace embedgeo {
namespace {

#include "unicode_table.inc"

constexpr std::uint16_t kNoScript = 0xFFFF;

// Latin-1 fast path, filled from the range table on first use.
struct AsciiCache {
  std::array<CharCategory, 256> table;
  AsciiCache() {
    std::size_t r = 0;
    for (char32_t c = 0; c < 256; ++c) {
      while (kCatalogRanges[r].hi < c) ++r;
      const auto& range = kCatalogRanges[r];
      table[c].cls = static_cast<GeneralClass>(range.cls);
      if (range.script != kNoScript) table[c].script = range.script;
    }
  }
};

const AsciiCache& ascii_cache() {
  static const AsciiCache cache;
  return cache;
}

constexpr std::array<GeneralClass, 6> kNonLetterClasses = {
    GeneralClass::M, GeneralClass::N, GeneralClass::P,
    GeneralClass::S, GeneralClass::Z, GeneralClass::C};

}  // namespace

std::string_view to_string(GeneralClass cls) noexcept {
  static constexpr std::array<std::string_view, kGeneralClassCount> names = {"L", "M", "N", "P", "S", "Z", "C"};
  return names[static_cast<std::size_t>(cls)];
}

UnicodeCatalog::UnicodeCatalog() { (void)ascii_cache(); }

std::string_view UnicodeCatalog::unicode_version() const noexcept { return kUnicodeVersion; }

std::span<const CatalogRange> UnicodeCatalog::ranges() const noexcept { return kCatalogRanges; }

std::size_t UnicodeCatalog::script_count() const noexcept { return kScriptNames.size(); }

CharCategory UnicodeCatalog::char_category(char32_t c) const noexcept {
  if (c < 256) return ascii_cache().table[c];
  if (c > 0x10FFFF) return {};
  auto it = std::upper_bound(kCatalogRanges.begin(), kCatalogRanges.end(), static_cast<std::uint32_t>(c),
                             [](std::uint32_t cp, const CatalogRange& r) { return cp < r.lo; });
  const CatalogRange& range = *(it - 1);
  CharCategory out;
  out.cls = static_cast<GeneralClass>(range.cls);
  if (range.script != kNoScript) out.script = range.script;
  return out;
}

TokenCategory UnicodeCatalog::categorize_token(std::string_view token) const {
  if (token.empty()) throw Error(ErrorCode::EmptyToken, "cannot categorize an empty token");

  struct Tally {
    TokenCategory category;
    std::size_t count;
    std::size_t first;
  };
  std::vector<Tally> tallies;
  std::size_t position = 0;

  utf8::for_each_scalar(token, [&](char32_t c) {
    const std::size_t here = position++;
    if (c == kWordBoundaryMarker) {
      return;
    }
    const CharCategory cc = char_category(c);
    const TokenCategory label = cc.script ? TokenCategory::of_script(*cc.script) : TokenCategory::of_class(cc.cls);
    for (auto& t : tallies) {
      if (t.category == label) {
        ++t.count;
        return;
      }
    }
    tallies.push_back({label, 1, here});
  });

  if (tallies.empty()) {
    // Marker-only token: fall back to the marker's own class.
    const CharCategory cc = char_category(kWordBoundaryMarker);
    return TokenCategory::of_class(cc.cls);
  }

  const Tally* best = &tallies.front();
  for (const auto& t : tallies) {
    if (t.count > best->count) {
      best = &t;
    } else if (t.count == best->count && t.category.is_script() && !best->category.is_script()) {
      best = &t;
    }
    // Equal count and equal kind: the earlier entry (first occurrence) stays.
  }
  return best->category;
}

std::string_view UnicodeCatalog::script_name(ScriptId id) const {
  if (id >= kScriptNames.size()) throw Error(ErrorCode::ArgumentError, "script id out of range");
  return kScriptNames[id];
}

std::string UnicodeCatalog::name(TokenCategory category) const {
  if (category.is_script()) return std::string(script_name(category.script()));
  return std::string(to_string(category.general_class()));
}

std::optional<TokenCategory> UnicodeCatalog::parse(std::string_view name) const {
  for (GeneralClass cls : kNonLetterClasses) {
    if (name == to_string(cls)) return TokenCategory::of_class(cls);
  }
  auto it = std::find(kScriptNames.begin(), kScriptNames.end(), name);
  if (it == kScriptNames.end()) return std::nullopt;
  return TokenCategory::of_script(static_cast<ScriptId>(it - kScriptNames.begin()));
}

std::size_t UnicodeCatalog::inventory_size() const noexcept { return kScriptNames.size() + kNonLetterClasses.size(); }

std::size_t UnicodeCatalog::dense_index(TokenCategory category) const noexcept {
  if (category.is_script()) return category.script();
  // M N P S Z C occupy consecutive slots after the scripts.
  return kScriptNames.size() + static_cast<std::size_t>(category.general_class()) - 1;
}

TokenCategory UnicodeCatalog::from_dense_index(std::size_t index) const {
  if (index < kScriptNames.size()) return TokenCategory::of_script(static_cast<ScriptId>(index));
  index -= kScriptNames.size();
  if (index >= kNonLetterClasses.size()) throw Error(ErrorCode::ArgumentError, "category index out of range");
  return TokenCategory::of_class(kNonLetterClasses[index]);
}

const UnicodeCatalog& default_catalog() {
  static const UnicodeCatalog catalog;
  return catalog;
}

}  // namespace embedgeo
