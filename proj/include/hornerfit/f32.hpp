#pragma once

#include <bit>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace hornerfit {

/// A binary32 value identified with its bit pattern.
///
/// Equality is bitwise (so -0.0 != +0.0); use value_less / same_value for
/// numeric comparison.
struct F32 {
  std::uint32_t bits = 0;

  static constexpr F32 from_bits(std::uint32_t b) { return F32{b}; }
  static constexpr F32 from_float(float x) { return F32{std::bit_cast<std::uint32_t>(x)}; }
  constexpr float value() const { return std::bit_cast<float>(bits); }

  constexpr bool sign() const { return (bits >> 31) != 0; }
  constexpr std::uint32_t magnitude_bits() const { return bits & 0x7fffffffu; }
  constexpr bool is_finite() const { return magnitude_bits() < 0x7f800000u; }
  constexpr bool is_zero() const { return magnitude_bits() == 0; }
  constexpr bool is_subnormal() const {
    return magnitude_bits() != 0 && magnitude_bits() < 0x00800000u;
  }
  constexpr F32 negated() const { return F32{bits ^ 0x80000000u}; }
  constexpr F32 abs() const { return F32{magnitude_bits()}; }

  friend constexpr bool operator==(F32, F32) = default;
};

constexpr F32 kMaxFinite = F32::from_bits(0x7f7fffffu);
constexpr F32 kMinFinite = F32::from_bits(0xff7fffffu);
constexpr F32 kSmallestSubnormal = F32::from_bits(0x00000001u);

// Ordinals: +0 -> 0, -0 -> -1, positive x -> its bit pattern, negative x ->
// -(magnitude bits) - 1. Strictly increasing along the value order, with the
// two zeros at adjacent ordinals.
using Ordinal = std::int64_t;

constexpr Ordinal ordinal(F32 x) {
  return x.sign() ? -static_cast<Ordinal>(x.magnitude_bits()) - 1
                  : static_cast<Ordinal>(x.bits);
}

constexpr F32 from_ordinal(Ordinal n) {
  return n >= 0 ? F32{static_cast<std::uint32_t>(n)}
                : F32{static_cast<std::uint32_t>(-(n + 1)) | 0x80000000u};
}

constexpr Ordinal kMaxOrdinal = ordinal(kMaxFinite);
constexpr Ordinal kMinOrdinal = ordinal(kMinFinite);

/// Next finite value up in the ordinal order (-0 -> +0). Requires x < max.
constexpr F32 next_up(F32 x) { return from_ordinal(ordinal(x) + 1); }
constexpr F32 next_down(F32 x) { return from_ordinal(ordinal(x) - 1); }

inline bool value_less(F32 a, F32 b) { return a.value() < b.value(); }
inline bool same_value(F32 a, F32 b) { return a.value() == b.value(); }

/// Inclusive interval of binary32 values; membership is by value, so both
/// zeros belong whenever either does.
struct F32Interval {
  F32 lo;
  F32 hi;

  bool contains(F32 x) const { return lo.value() <= x.value() && x.value() <= hi.value(); }
  bool is_point() const { return same_value(lo, hi); }
  friend bool operator==(const F32Interval&, const F32Interval&) = default;
};

constexpr F32Interval kAllFinite{kMinFinite, kMaxFinite};

/// C99 hexfloat text, e.g. "0x1.eaee86p-2". Bit-exact with parse_hexfloat.
std::string to_hex(F32 x);
/// to_hex with the C "f" suffix, as used in emitted sources.
std::string to_hex_literal(F32 x);
/// Parses a hexfloat ("[-]0x1.8p+1", optional trailing 'f'). Throws
/// std::invalid_argument unless the text denotes a finite binary32 exactly.
F32 parse_hexfloat(std::string_view text);
std::string to_string(const F32Interval& iv);

}  // namespace hornerfit
