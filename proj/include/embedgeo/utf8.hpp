#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace embedgeo::utf8 {

inline constexpr char32_t kReplacement = U'�';

/// Decodes one scalar starting at s[pos] and advances pos. Malformed,
/// overlong, surrogate and out-of-range sequences consume one byte and
/// yield U+FFFD.
char32_t decode_next(std::string_view s, std::size_t& pos) noexcept;

/// True iff s is well-formed UTF-8.
bool is_valid(std::string_view s) noexcept;

void append(std::string& out, char32_t c);

/// Length in bytes of the well-formed sequence at s[pos], or 0.
std::size_t sequence_length(std::string_view s, std::size_t pos) noexcept;

template <typename Fn>
void for_each_scalar(std::string_view s, Fn&& fn) {
  std::size_t pos = 0;
  while (pos < s.size()) fn(decode_next(s, pos));
}

}  // namespace embedgeo::utf8
