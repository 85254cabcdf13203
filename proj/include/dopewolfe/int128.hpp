#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "dopewolfe/errors.hpp"

namespace dopewolfe {

/// Subset indices and collection cardinalities. 64 bits is not enough:
/// C(100,10) ~ 1.7e13 still fits, but moderately larger configurations do not.
using uint128 = unsigned __int128;

inline std::string to_string(uint128 value) {
  if (value == 0) return "0";
  char buf[40];
  int pos = 40;
  while (value > 0) {
    buf[--pos] = static_cast<char>('0' + static_cast<int>(value % 10));
    value /= 10;
  }
  return std::string(buf + pos, 40 - pos);
}

inline uint128 parse_uint128(std::string_view text) {
  if (text.empty()) throw validation_error("empty integer literal");
  uint128 value = 0;
  for (char c : text) {
    if (c < '0' || c > '9') throw validation_error("invalid integer literal: '" + std::string(text) + "'");
    uint128 next;
    if (__builtin_mul_overflow(value, uint128(10), &next) ||
        __builtin_add_overflow(next, uint128(c - '0'), &next))
      throw capacity_error("integer literal exceeds 128-bit range: '" + std::string(text) + "'");
    value = next;
  }
  return value;
}

}  // namespace dopewolfe
