#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "hornerfit/rational.hpp"
#include "hornerfit/softfp.hpp"

namespace hornerfit {

/// Interval [lo, hi] guaranteed to contain f(a).
struct CertifiedReal {
  BigRational lo;
  BigRational hi;
  long precision = 0;

  bool exact() const { return lo == hi; }
};

/// The enclosure could not be narrowed enough at the precision ceiling.
class PrecisionCeiling : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

constexpr long kStartPrecision = 96;
constexpr long kMaxPrecision = 1024;

enum class RefFunction { identity, sin, atan };

std::string to_string(RefFunction f);
RefFunction parse_ref_function(const std::string& text);

/// Directed-rounding enclosures at `precision` bits.
CertifiedReal ref_sin(F32 a, long precision);
CertifiedReal ref_atan(F32 a, long precision);
CertifiedReal ref_value(RefFunction f, F32 a, long precision);

using RealFunction = std::function<CertifiedReal(F32 a, long precision)>;
RealFunction certified(RefFunction f);

/// All binary32 x with |x - f(a)| < k ulp(f(a)), escalating precision from
/// kStartPrecision until the answer is decided. nullopt when no binary32
/// qualifies. Throws PrecisionCeiling.
std::optional<F32Interval> ulp_bracket(const RealFunction& f, const BigRational& k, F32 a);
std::optional<F32Interval> ulp_bracket(RefFunction f, const BigRational& k, F32 a);

/// Certified |y - f(a)| / ulp(f(a)) at a fixed precision.
struct ErrorEnclosure {
  BigRational lo;
  BigRational hi;
};
/// nullopt if the precision is too low to pin down ulp(f(a)).
std::optional<ErrorEnclosure> ulp_error_at(RefFunction f, F32 a, F32 y, long precision);
/// Escalating version. Throws PrecisionCeiling.
ErrorEnclosure ulp_error(RefFunction f, F32 a, F32 y, long precision = kStartPrecision);
/// Exact decision of |y - f(a)| < k ulp(f(a)).
bool within_ulps(RefFunction f, F32 a, F32 y, const BigRational& k);

// Reconstruction constants of the arctan skeleton: pi/2 ~ hi * lo.
constexpr float kHalfPiHi = 0x1.ddcb02p-1f;
constexpr float kHalfPiLo = 0x1.aee9d6p+0f;

/// Binary32 y > 1 with 1.0f / y rounding to x, for x in (0, 1]. nullopt when
/// rounding skips x.
std::optional<F32Interval> reciprocal_preimage(F32 x);
/// Same set found by walking outward from 1/x; used by the scan kernels.
std::optional<F32Interval> reciprocal_preimage_local(F32 x);

/// Acceptable atan_poly(x) outputs for x in [0, 1] in the arctan skeleton:
/// within k ulp of atan(x), and for every y > 1 with 1/y -> x the
/// reconstruction fma(hi, lo, -r) within k ulp of atan(y).
std::optional<F32Interval> juffa_oracle(F32 x, const BigRational& k);

/// The full reduced-argument arctan program around `poly`.
template <class Poly>
float juffa_atanf(const Poly& poly, float a) {
  const float t = std::fabs(a);
  float r = t;
  if (t > 1.0f) r = 1.0f / r;
  r = poly(r);
  if (t > 1.0f) r = raw_fma(kHalfPiHi, kHalfPiLo, -r);
  return std::copysign(r, a);
}

// Cheap double-precision screen. libm's double sin/atan are accurate to a
// few units in 2^-52 relative, far inside kScreenMargin float ulps; any
// estimate within the margin of a threshold goes to the certified path.
constexpr double kScreenMargin = 0x1p-20;

inline double ref_double(RefFunction f, double a) {
  switch (f) {
    case RefFunction::identity: return a;
    case RefFunction::sin: return std::sin(a);
    case RefFunction::atan: return std::atan(a);
  }
  return a;
}

/// |y - fd| / ulp(fd) in double, or -1 when fd is too close to a binade
/// boundary (or zero) for the ulp to be trusted.
inline double screened_error(double fd, float y) {
  std::uint64_t bits;
  std::memcpy(&bits, &fd, sizeof bits);
  const int biased = static_cast<int>((bits >> 52) & 0x7ff);
  const std::uint64_t mant = bits & ((std::uint64_t{1} << 52) - 1);
  if (biased == 0) return -1.0;
  constexpr std::uint64_t edge = std::uint64_t{1} << 24;
  if (mant < edge || mant > (std::uint64_t{1} << 52) - edge) return -1.0;
  const int e = biased - 1023;
  const int q = (e < -126 ? -126 : e) - 23;
  const std::uint64_t inv_bits = static_cast<std::uint64_t>(1023 - q) << 52;
  double inv_ulp;
  std::memcpy(&inv_ulp, &inv_bits, sizeof inv_ulp);
  return std::fabs(static_cast<double>(y) - fd) * inv_ulp;
}

/// Interface for "which outputs are acceptable at a".
class AcceptanceOracle {
 public:
  virtual ~AcceptanceOracle() = default;
  virtual F32Interval domain() const = 0;
  /// Exact acceptable outputs at a; nullopt if none.
  virtual std::optional<F32Interval> bracket(F32 a) const = 0;
  /// Must agree exactly with bracket(a)->contains(y).
  virtual bool accepts(F32 a, F32 y) const {
    const auto b = bracket(a);
    return b && b->contains(y);
  }
  virtual std::string describe() const = 0;
};

/// Within k ulp of a reference function.
class UlpOracle final : public AcceptanceOracle {
 public:
  UlpOracle(RefFunction f, BigRational k, F32Interval domain);
  F32Interval domain() const override { return domain_; }
  std::optional<F32Interval> bracket(F32 a) const override;
  bool accepts(F32 a, F32 y) const override;
  std::string describe() const override;

 private:
  RefFunction f_;
  BigRational k_;
  double k_double_;
  F32Interval domain_;
};

/// juffa_oracle on [0, 1].
class JuffaOracle final : public AcceptanceOracle {
 public:
  explicit JuffaOracle(BigRational k);
  F32Interval domain() const override;
  std::optional<F32Interval> bracket(F32 a) const override;
  bool accepts(F32 a, F32 y) const override;
  std::string describe() const override;

 private:
  bool reconstruction_ok(F32 y, float r) const;
  BigRational k_;
  double k_double_;
};

/// Every finite output is acceptable.
class UnrestrictedOracle final : public AcceptanceOracle {
 public:
  explicit UnrestrictedOracle(F32Interval domain) : domain_(domain) {}
  F32Interval domain() const override { return domain_; }
  std::optional<F32Interval> bracket(F32) const override { return kAllFinite; }
  std::string describe() const override { return "unrestricted"; }

 private:
  F32Interval domain_;
};

/// Bracket given by a callback.
class CallbackOracle final : public AcceptanceOracle {
 public:
  using Fn = std::function<std::optional<F32Interval>(F32)>;
  CallbackOracle(F32Interval domain, Fn fn) : domain_(domain), fn_(std::move(fn)) {}
  F32Interval domain() const override { return domain_; }
  std::optional<F32Interval> bracket(F32 a) const override { return fn_(a); }
  std::string describe() const override { return "callback"; }

 private:
  F32Interval domain_;
  Fn fn_;
};

std::optional<F32Interval> intersect(const std::optional<F32Interval>& a, const std::optional<F32Interval>& b);

}  // namespace hornerfit
