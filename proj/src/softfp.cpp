#include "hornerfit/softfp.hpp"

#include <cstdio>
#include <cstdlib>
#include <string>

namespace hornerfit {

namespace {

F32 checked(float r, const char* what) {
  if (!std::isfinite(r)) throw EvaluationError(std::string(what) + " overflowed");
  return F32::from_float(r);
}

void require_finite(F32 x, const char* what) {
  if (!x.is_finite()) throw EvaluationError(std::string(what) + ": non-finite operand");
}

// Value of fma with operand `varying` replaced by v.
float apply(FmaOperand varying, float v, float x, float y) {
  switch (varying) {
    case FmaOperand::first: return raw_fma(v, x, y);
    case FmaOperand::second: return raw_fma(x, v, y);
    case FmaOperand::addend: return raw_fma(x, y, v);
  }
  return 0.0f;
}

}  // namespace

std::string to_hex(F32 x) {
  if (!x.is_finite()) return x.magnitude_bits() == 0x7f800000u ? (x.sign() ? "-inf" : "inf") : "nan";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%a", static_cast<double>(x.value()));
  return buf;
}

std::string to_hex_literal(F32 x) { return to_hex(x) + "f"; }

F32 parse_hexfloat(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(0, 1);
  if (!s.empty() && (s.back() == 'f' || s.back() == 'F')) s.pop_back();
  auto fail = [&](const char* why) {
    return std::invalid_argument(std::string(why) + ": '" + std::string(text) + "'");
  };
  std::size_t i = 0;
  const bool neg = !s.empty() && s[0] == '-';
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) ++i;
  if (s.size() < i + 2 || s[i] != '0' || (s[i + 1] != 'x' && s[i + 1] != 'X')) {
    throw fail("expected a hexfloat literal");
  }
  i += 2;
  std::string digits;
  long frac_digits = 0;
  bool seen_dot = false;
  for (; i < s.size() && s[i] != 'p' && s[i] != 'P'; ++i) {
    if (s[i] == '.' && !seen_dot) {
      seen_dot = true;
    } else if (std::isxdigit(static_cast<unsigned char>(s[i]))) {
      digits += s[i];
      if (seen_dot) ++frac_digits;
    } else {
      throw fail("malformed hexfloat");
    }
  }
  if (digits.empty() || i >= s.size()) throw fail("malformed hexfloat");
  const std::string exp_text = s.substr(i + 1);
  char* end = nullptr;
  const long exp = std::strtol(exp_text.c_str(), &end, 10);
  if (exp_text.empty() || *end != '\0' || std::labs(exp) > 100000) throw fail("malformed hexfloat exponent");

  mpz_class mant;
  mant.set_str(digits, 16);
  BigRational q(mant);
  q *= pow2(exp - 4 * frac_digits);
  if (neg) q = -q;
  F32 r;
  try {
    r = round_to_f32(q);
  } catch (const std::out_of_range&) {
    throw fail("hexfloat outside the binary32 range");
  }
  if (rational_of_f32(r) != q) throw fail("hexfloat is not exactly representable in binary32");
  if (neg && r.is_zero()) r = r.negated();
  return r;
}

std::string to_string(const F32Interval& iv) { return "[" + to_hex(iv.lo) + ", " + to_hex(iv.hi) + "]"; }

F32 f32_mul(F32 a, F32 b) {
  require_finite(a, "f32_mul");
  require_finite(b, "f32_mul");
  return checked(raw_mul(a.value(), b.value()), "f32_mul");
}

F32 f32_fma(F32 a, F32 b, F32 c) {
  require_finite(a, "f32_fma");
  require_finite(b, "f32_fma");
  require_finite(c, "f32_fma");
  return checked(raw_fma(a.value(), b.value(), c.value()), "f32_fma");
}

BigRational ulp_of_real(const BigRational& x) {
  const F32 below = floor_f32(x);
  if (below == kMaxFinite) throw std::out_of_range("ulp_of_real: beyond the finite range");
  return rational_of_f32(next_up(below)) - rational_of_f32(below);
}

BigRational ulp_of(F32 x) { return ulp_of_real(rational_of_f32(x)); }

std::optional<F32Interval> invert_fma_monotone(FmaOperand varying, F32 fixed_x, F32 fixed_y,
                                               const F32Interval& target) {
  const float x = fixed_x.value();
  const float y = fixed_y.value();
  const float lo = target.lo.value();
  const float hi = target.hi.value();
  if (lo > hi) return std::nullopt;

  int direction = 1;
  if (varying != FmaOperand::addend) {
    if (x == 0.0f) {
      // Constant map: everything or nothing.
      const float out = apply(varying, 1.0f, x, y);
      if (lo <= out && out <= hi) return kAllFinite;
      return std::nullopt;
    }
    direction = x > 0.0f ? 1 : -1;
  }

  // g(n) = fma evaluated at from_ordinal(n), made nondecreasing in n.
  auto g = [&](Ordinal n) {
    const float v = apply(varying, from_ordinal(n).value(), x, y);
    return direction > 0 ? v : -v;
  };
  const float want_lo = direction > 0 ? lo : -hi;
  const float want_hi = direction > 0 ? hi : -lo;

  // First ordinal with g >= want_lo.
  Ordinal a = kMinOrdinal, b = kMaxOrdinal + 1;
  while (a < b) {
    const Ordinal mid = a + (b - a) / 2;
    if (g(mid) >= want_lo) b = mid; else a = mid + 1;
  }
  const Ordinal first = a;
  // Last ordinal with g <= want_hi.
  a = kMinOrdinal - 1;
  b = kMaxOrdinal;
  while (a < b) {
    const Ordinal mid = a + (b - a + 1) / 2;
    if (g(mid) <= want_hi) a = mid; else b = mid - 1;
  }
  const Ordinal last = a;
  if (first > kMaxOrdinal || last < kMinOrdinal || first > last) return std::nullopt;
  return F32Interval{from_ordinal(first), from_ordinal(last)};
}

}  // namespace hornerfit
