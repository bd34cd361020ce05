#pragma once

#include <gmpxx.h>

#include <string>
#include <string_view>

#include "hornerfit/f32.hpp"

namespace hornerfit {

/// Exact rational in lowest terms (GMP keeps mpq results canonical).
using BigRational = mpq_class;

BigRational make_rational(long num, long den = 1);
/// Parses "p/q", an integer, an exact decimal ("0.95") or a hexfloat.
BigRational parse_rational(std::string_view text);

BigRational rational_of_f32(F32 x);
BigRational pow2(long e);

/// Nearest binary32, ties to even. Throws std::out_of_range on overflow.
F32 round_to_f32(const BigRational& q);
/// Largest binary32 <= q. Throws std::out_of_range if q < -max.
F32 floor_f32(const BigRational& q);
/// Smallest binary32 >= q. Throws std::out_of_range if q > max.
F32 ceil_f32(const BigRational& q);

bool is_dyadic(const BigRational& q);
/// "num/den" (or "num" for integers).
std::string exact_string(const BigRational& q);
/// Exact decimal expansion for dyadic values, "num/den" otherwise.
std::string decimal_string(const BigRational& q);
/// Short approximate decimal for log lines.
std::string approx_string(const BigRational& q, int digits = 10);
double to_double(const BigRational& q);

}  // namespace hornerfit
