#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace embedgeo {

/// Unicode general-category major class.
enum class GeneralClass : std::uint8_t { L, M, N, P, S, Z, C };

inline constexpr std::size_t kGeneralClassCount = 7;

std::string_view to_string(GeneralClass cls) noexcept;

using ScriptId = std::uint16_t;

/// Class of one code point; script is set iff cls == L.
struct CharCategory {
  GeneralClass cls = GeneralClass::C;
  std::optional<ScriptId> script;

  friend bool operator==(const CharCategory&, const CharCategory&) = default;
};

/// Majority category of a token: a letter script or a non-letter class.
class TokenCategory {
 public:
  constexpr TokenCategory() = default;

  static constexpr TokenCategory of_script(ScriptId id) { return TokenCategory(true, id); }
  static constexpr TokenCategory of_class(GeneralClass cls) {
    return TokenCategory(false, static_cast<std::uint16_t>(cls));
  }

  constexpr bool is_script() const { return is_script_; }
  constexpr ScriptId script() const { return id_; }
  constexpr GeneralClass general_class() const {
    return is_script_ ? GeneralClass::L : static_cast<GeneralClass>(id_);
  }
  /// Stable hash key; scripts map to their id, classes to 0x8000 | class.
  constexpr std::uint32_t key() const { return is_script_ ? id_ : (0x8000u | id_); }

  friend constexpr bool operator==(const TokenCategory&, const TokenCategory&) = default;
  friend constexpr auto operator<=>(const TokenCategory& a, const TokenCategory& b) {
    if (a.is_script_ != b.is_script_) return b.is_script_ <=> a.is_script_;
    return a.id_ <=> b.id_;
  }

 private:
  constexpr TokenCategory(bool is_script, std::uint16_t id) : is_script_(is_script), id_(id) {}

  bool is_script_ = false;
  std::uint16_t id_ = static_cast<std::uint16_t>(GeneralClass::C);
};

/// One row of the generated code-point table.
struct CatalogRange {
  std::uint32_t lo;
  std::uint32_t hi;
  std::uint8_t cls;
  std::uint16_t script;
};

inline constexpr char32_t kWordBoundaryMarker = U'▁';

/// Code-point → category lookup over a table generated from the Unicode
/// Character Database at build time. Immutable; safe for concurrent reads.
class UnicodeCatalog {
 public:
  UnicodeCatalog();

  std::string_view unicode_version() const noexcept;
  std::span<const CatalogRange> ranges() const noexcept;
  std::size_t script_count() const noexcept;

  CharCategory char_category(char32_t c) const noexcept;

  /// Majority vote over the characters of a UTF-8 token. Word-boundary
  /// markers (U+2581) abstain unless the token contains nothing else.
  /// Ties go to letter scripts, then to the label that occurs first.
  /// Invalid UTF-8 bytes count as U+FFFD.
  TokenCategory categorize_token(std::string_view token) const;

  std::string name(TokenCategory category) const;
  std::string_view script_name(ScriptId id) const;
  /// Inverse of name(); nullopt for labels outside the inventory.
  std::optional<TokenCategory> parse(std::string_view name) const;
  /// Every label the catalog can produce: scripts, then M N P S Z C.
  std::size_t inventory_size() const noexcept;
  std::size_t dense_index(TokenCategory category) const noexcept;
  TokenCategory from_dense_index(std::size_t index) const;
};

const UnicodeCatalog& default_catalog();

}  // namespace embedgeo

template <>
struct std::hash<embedgeo::TokenCategory> {
  std::size_t operator()(const embedgeo::TokenCategory& c) const noexcept { return c.key(); }
};
