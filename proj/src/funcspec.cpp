#include "hornerfit/funcspec.hpp"

#include <mpfr.h>

#include <algorithm>

namespace hornerfit {

namespace {

class Mpfr {
 public:
  explicit Mpfr(long precision) { mpfr_init2(v_, static_cast<mpfr_prec_t>(precision)); }
  ~Mpfr() { mpfr_clear(v_); }
  Mpfr(const Mpfr&) = delete;
  Mpfr& operator=(const Mpfr&) = delete;
  mpfr_ptr get() { return v_; }

 private:
  mpfr_t v_;
};

BigRational to_rational(mpfr_srcptr x) {
  if (mpfr_zero_p(x)) return 0;
  mpz_class z;
  const mpfr_exp_t e = mpfr_get_z_2exp(z.get_mpz_t(), x);
  BigRational q(z);
  q *= pow2(static_cast<long>(e));
  return q;
}

using MpfrFn = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t);

CertifiedReal enclose(MpfrFn fn, F32 a, long precision) {
  if (!a.is_finite()) throw std::invalid_argument("reference function: non-finite argument");
  Mpfr x(24), lo(precision), hi(precision);
  mpfr_set_flt(x.get(), a.value(), MPFR_RNDN);
  fn(lo.get(), x.get(), MPFR_RNDD);
  fn(hi.get(), x.get(), MPFR_RNDU);
  return {to_rational(lo.get()), to_rational(hi.get()), precision};
}

long next_precision(long p) { return std::min(p * 2, kMaxPrecision); }

// Both ends of the enclosure must give the same answer for the bracket to be
// decided; the bracket endpoints are monotone functions of f(a).
std::optional<std::optional<F32Interval>> decide_bracket(const CertifiedReal& c, const BigRational& k) {
  const F32 floor_lo = floor_f32(c.lo);
  const F32 floor_hi = floor_f32(c.hi);
  if (floor_lo != floor_hi) return std::nullopt;
  const BigRational u = rational_of_f32(next_up(floor_lo)) - rational_of_f32(floor_lo);
  const BigRational w = k * u;
  auto lowest = [&](const BigRational& t) { return next_up(floor_f32(t - w)); };
  auto highest = [&](const BigRational& t) { return next_down(ceil_f32(t + w)); };
  const F32 lo = lowest(c.lo);
  const F32 hi = highest(c.lo);
  if (!c.exact() && (lowest(c.hi) != lo || highest(c.hi) != hi)) return std::nullopt;
  if (lo.value() > hi.value()) return std::optional<F32Interval>{};
  return std::optional<F32Interval>{F32Interval{lo, hi}};
}

bool screened_within(RefFunction f, F32 a, F32 y, const BigRational& k, double k_double) {
  if (!y.is_finite()) return false;
  const double est = screened_error(ref_double(f, static_cast<double>(a.value())), y.value());
  if (est >= 0.0) {
    if (est < k_double - kScreenMargin) return true;
    if (est > k_double + kScreenMargin) return false;
  }
  return within_ulps(f, a, y, k);
}

}  // namespace

std::string to_string(RefFunction f) {
  switch (f) {
    case RefFunction::identity: return "identity";
    case RefFunction::sin: return "sin";
    case RefFunction::atan: return "atan";
  }
  return "?";
}

RefFunction parse_ref_function(const std::string& text) {
  if (text == "identity") return RefFunction::identity;
  if (text == "sin") return RefFunction::sin;
  if (text == "atan") return RefFunction::atan;
  throw std::invalid_argument("unknown reference function: " + text);
}

CertifiedReal ref_sin(F32 a, long precision) { return enclose(&mpfr_sin, a, precision); }
CertifiedReal ref_atan(F32 a, long precision) { return enclose(&mpfr_atan, a, precision); }

CertifiedReal ref_value(RefFunction f, F32 a, long precision) {
  switch (f) {
    case RefFunction::identity: {
      const BigRational q = rational_of_f32(a);
      return {q, q, precision};
    }
    case RefFunction::sin: return ref_sin(a, precision);
    case RefFunction::atan: return ref_atan(a, precision);
  }
  throw std::invalid_argument("bad reference function");
}

RealFunction certified(RefFunction f) {
  return [f](F32 a, long precision) { return ref_value(f, a, precision); };
}

std::optional<F32Interval> ulp_bracket(const RealFunction& f, const BigRational& k, F32 a) {
  if (k <= 0) throw std::invalid_argument("ulp_bracket: tolerance must be positive");
  for (long p = kStartPrecision;; p = next_precision(p)) {
    if (auto decided = decide_bracket(f(a, p), k)) return *decided;
    if (p >= kMaxPrecision) throw PrecisionCeiling("ulp_bracket undecided at " + to_hex(a));
  }
}

std::optional<F32Interval> ulp_bracket(RefFunction f, const BigRational& k, F32 a) {
  return ulp_bracket(certified(f), k, a);
}

std::optional<ErrorEnclosure> ulp_error_at(RefFunction f, F32 a, F32 y, long precision) {
  const CertifiedReal c = ref_value(f, a, precision);
  const F32 floor_lo = floor_f32(c.lo);
  if (floor_f32(c.hi) != floor_lo) return std::nullopt;
  const BigRational u = rational_of_f32(next_up(floor_lo)) - rational_of_f32(floor_lo);
  const BigRational yr = rational_of_f32(y);
  ErrorEnclosure e;
  if (yr <= c.lo) {
    e = {c.lo - yr, c.hi - yr};
  } else if (yr >= c.hi) {
    e = {yr - c.hi, yr - c.lo};
  } else {
    const BigRational d1 = yr - c.lo, d2 = c.hi - yr;
    e = {0, d1 < d2 ? d2 : d1};
  }
  e.lo /= u;
  e.hi /= u;
  return e;
}

ErrorEnclosure ulp_error(RefFunction f, F32 a, F32 y, long precision) {
  for (long p = precision;; p = next_precision(p)) {
    if (auto e = ulp_error_at(f, a, y, p)) return *e;
    if (p >= kMaxPrecision) throw PrecisionCeiling("ulp undecidable at " + to_hex(a));
  }
}

bool within_ulps(RefFunction f, F32 a, F32 y, const BigRational& k) {
  for (long p = kStartPrecision;; p = next_precision(p)) {
    if (auto e = ulp_error_at(f, a, y, p)) {
      if (e->hi < k) return true;
      if (e->lo >= k) return false;
    }
    if (p >= kMaxPrecision) throw PrecisionCeiling("k-ulp test undecidable at " + to_hex(a));
  }
}

std::optional<F32Interval> reciprocal_preimage(F32 x) {
  if (!(x.value() > 0.0f && x.value() <= 1.0f)) throw std::invalid_argument("reciprocal_preimage: x must lie in (0, 1]");
  const float xv = x.value();
  auto g = [](Ordinal n) { return 1.0f / from_ordinal(n).value(); };
  const Ordinal lo_ord = ordinal(next_up(F32::from_float(1.0f)));
  // First y with 1/y <= x.
  Ordinal a = lo_ord, b = kMaxOrdinal + 1;
  while (a < b) {
    const Ordinal mid = a + (b - a) / 2;
    if (g(mid) <= xv) b = mid; else a = mid + 1;
  }
  const Ordinal first = a;
  // Last y with 1/y >= x.
  a = lo_ord - 1;
  b = kMaxOrdinal;
  while (a < b) {
    const Ordinal mid = a + (b - a + 1) / 2;
    if (g(mid) >= xv) a = mid; else b = mid - 1;
  }
  const Ordinal last = a;
  if (first > last || first > kMaxOrdinal || last < lo_ord) return std::nullopt;
  return F32Interval{from_ordinal(first), from_ordinal(last)};
}

std::optional<F32Interval> reciprocal_preimage_local(F32 x) {
  const float xv = x.value();
  const F32 floor_y = next_up(F32::from_float(1.0f));
  auto g = [](F32 y) { return 1.0f / y.value(); };
  const double guess = 1.0 / static_cast<double>(xv);
  F32 y = guess >= static_cast<double>(kMaxFinite.value()) ? kMaxFinite : F32::from_float(static_cast<float>(guess));
  if (value_less(y, floor_y)) y = floor_y;
  if (g(y) > xv) {
    while (y != kMaxFinite && g(y) > xv) y = next_up(y);
  } else if (g(y) < xv) {
    while (y != floor_y && g(y) < xv) y = next_down(y);
  }
  if (g(y) != xv) return std::nullopt;
  F32 lo = y, hi = y;
  while (lo != floor_y && g(next_down(lo)) == xv) lo = next_down(lo);
  while (hi != kMaxFinite && g(next_up(hi)) == xv) hi = next_up(hi);
  return F32Interval{lo, hi};
}

std::optional<F32Interval> intersect(const std::optional<F32Interval>& a, const std::optional<F32Interval>& b) {
  if (!a || !b) return std::nullopt;
  const F32 lo = value_less(a->lo, b->lo) ? b->lo : a->lo;
  const F32 hi = value_less(b->hi, a->hi) ? b->hi : a->hi;
  if (value_less(hi, lo)) return std::nullopt;
  return F32Interval{lo, hi};
}

std::optional<F32Interval> juffa_oracle(F32 x, const BigRational& k) {
  if (!(x.value() >= 0.0f && x.value() <= 1.0f)) throw std::invalid_argument("juffa_oracle: x must lie in [0, 1]");
  std::optional<F32Interval> result = ulp_bracket(RefFunction::atan, k, x);
  if (!result || x.value() == 0.0f) return result;
  const auto pre = reciprocal_preimage(x);
  if (!pre) return result;
  for (Ordinal n = ordinal(pre->lo); n <= ordinal(pre->hi); ++n) {
    const auto target = ulp_bracket(RefFunction::atan, k, from_ordinal(n));
    if (!target) return std::nullopt;
    const auto addends = invert_fma_monotone(FmaOperand::addend, F32::from_float(kHalfPiHi),
                                             F32::from_float(kHalfPiLo), *target);
    if (!addends) return std::nullopt;
    result = intersect(result, F32Interval{addends->hi.negated(), addends->lo.negated()});
    if (!result) return std::nullopt;
  }
  return result;
}

UlpOracle::UlpOracle(RefFunction f, BigRational k, F32Interval domain)
    : f_(f), k_(std::move(k)), k_double_(k_.get_d()), domain_(domain) {
  if (k_ <= 0) throw std::invalid_argument("ulp tolerance must be positive");
}

std::optional<F32Interval> UlpOracle::bracket(F32 a) const { return ulp_bracket(f_, k_, a); }

bool UlpOracle::accepts(F32 a, F32 y) const { return screened_within(f_, a, y, k_, k_double_); }

std::string UlpOracle::describe() const {
  return to_string(f_) + " within " + exact_string(k_) + " ulp on " + to_string(domain_);
}

JuffaOracle::JuffaOracle(BigRational k) : k_(std::move(k)), k_double_(k_.get_d()) {
  if (k_ <= 0) throw std::invalid_argument("ulp tolerance must be positive");
}

F32Interval JuffaOracle::domain() const { return {F32::from_float(0.0f), F32::from_float(1.0f)}; }

std::optional<F32Interval> JuffaOracle::bracket(F32 a) const { return juffa_oracle(a, k_); }

bool JuffaOracle::reconstruction_ok(F32 y, float r) const {
  const F32 out = F32::from_float(raw_fma(kHalfPiHi, kHalfPiLo, -r));
  return screened_within(RefFunction::atan, y, out, k_, k_double_);
}

bool JuffaOracle::accepts(F32 a, F32 y) const {
  if (!screened_within(RefFunction::atan, a, y, k_, k_double_)) return false;
  if (a.value() == 0.0f) return true;
  const auto pre = reciprocal_preimage_local(a);
  if (!pre) return true;
  for (Ordinal n = ordinal(pre->lo); n <= ordinal(pre->hi); ++n) {
    if (!reconstruction_ok(from_ordinal(n), y.value())) return false;
  }
  return true;
}

std::string JuffaOracle::describe() const { return "atan (reduced-argument skeleton) within " + exact_string(k_) + " ulp"; }

}  // namespace hornerfit
