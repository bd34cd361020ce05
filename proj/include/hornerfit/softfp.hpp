#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "hornerfit/f32.hpp"
#include "hornerfit/rational.hpp"

namespace hornerfit {

/// Raised when a binary32 operation overflows or sees a non-finite operand;
/// the abscissa that produced it is unusable.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raw round-to-nearest-even kernels. std::fma on float is the IEEE fused
// operation (hardware vfmadd with -mfma, glibc fmaf otherwise); the test
// suite checks both against the bignum oracle. No overflow checking.
inline float raw_mul(float a, float b) { return a * b; }
inline float raw_fma(float a, float b, float c) { return std::fma(a, b, c); }

F32 f32_mul(F32 a, F32 b);
F32 f32_fma(F32 a, F32 b, F32 c);

/// ulp x = succ(floor(x)) - floor(x): the gap between the largest binary32
/// <= x and the smallest binary32 > x. Requires |x| <= max finite.
BigRational ulp_of_real(const BigRational& x);
/// Same definition for a representable x.
BigRational ulp_of(F32 x);

/// Which fma operand varies: 1 and 2 are the multiplicands, 3 the addend.
enum class FmaOperand { first = 1, second = 2, addend = 3 };

/// The exact set {v : target.lo <= fma(..v..) <= target.hi} over finite v,
/// which is an interval because fma is monotone in each operand. `fixed_x`
/// and `fixed_y` fill the remaining operand slots in order. Returns nullopt
/// when no v hits the target.
std::optional<F32Interval> invert_fma_monotone(FmaOperand varying, F32 fixed_x, F32 fixed_y,
                                               const F32Interval& target);

/// Number of finite binary32 values in [lo, hi] by ordinal (both zeros count).
inline std::int64_t ordinal_count(F32 lo, F32 hi) { return ordinal(hi) - ordinal(lo) + 1; }

}  // namespace hornerfit
