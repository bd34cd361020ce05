#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hornerfit/config.hpp"
#include "hornerfit/funcspec.hpp"
#include "oracles.hpp"

using namespace hornerfit;

namespace {

F32 hx(const char* s) { return parse_hexfloat(s); }
F32 f(float x) { return F32::from_float(x); }

F32 random_unit(std::mt19937_64& rng) {
  // Uniform over the bit patterns of (0, 1].
  return F32::from_bits(1 + static_cast<std::uint32_t>(rng() % 0x3f800000u));
}

}  // namespace

TEST_CASE("reference enclosures") {
  const CertifiedReal z = ref_sin(f(0.0f), kStartPrecision);
  CHECK(z.lo == 0);
  CHECK(z.hi == 0);
  const CertifiedReal h = ref_sin(f(0.5f), kStartPrecision);
  CHECK(h.lo > rational_of_f32(hx("0x1.eaee86p-2")));
  CHECK(h.hi < rational_of_f32(hx("0x1.eaee88p-2")));
  CHECK(abs(h.lo - BigRational(0x1.eaee8744b0p-2)) < pow2(-40));
  CHECK(h.hi - h.lo < pow2(-80));

  const auto [qlo, qhi] = oracle::quarter_pi(200);
  const CertifiedReal q = ref_atan(f(1.0f), 200);
  CHECK(q.lo <= qhi);
  CHECK(qlo <= q.hi);
  CHECK(q.hi - q.lo < pow2(-190));
  CHECK(ref_value(RefFunction::identity, f(0.3f), 96).lo == BigRational(0.3f));
  CHECK(parse_ref_function(to_string(RefFunction::atan)) == RefFunction::atan);
  CHECK_THROWS(parse_ref_function("cos"));
}

TEST_CASE("ulp brackets") {
  const BigRational k = make_rational(13, 20);
  const auto half = ulp_bracket(RefFunction::sin, k, f(0.5f));
  REQUIRE(half);
  CHECK(half->lo == hx("0x1.eaee86p-2"));
  CHECK(half->hi == hx("0x1.eaee88p-2"));
  CHECK(next_up(half->lo) == half->hi);
  const auto single = ulp_bracket(RefFunction::sin, k, f(0.625f));
  REQUIRE(single);
  CHECK(single->is_point());
  const auto exact = ulp_bracket(RefFunction::identity, make_rational(1, 2), f(0.3f));
  REQUIRE(exact);
  CHECK(exact->lo == f(0.3f));
  CHECK(exact->hi == f(0.3f));
  // Wider k takes in more neighbours.
  const auto wide = ulp_bracket(RefFunction::sin, 3, f(0.5f));
  REQUIRE(wide);
  CHECK(ordinal_count(wide->lo, wide->hi) == 6);
}

TEST_CASE("ulp brackets agree with the membership decision") {
  std::mt19937_64 rng(1);
  const BigRational k = make_rational(95, 100);
  const UlpOracle oracle(RefFunction::atan, k, {f(-1.0f), f(1.0f)});
  for (int i = 0; i < 2000; ++i) {
    const F32 a = rng() & 1 ? random_unit(rng) : random_unit(rng).negated();
    const auto b = oracle.bracket(a);
    REQUIRE(b);
    for (Ordinal d = -2; d <= 2; ++d) {
      for (const F32 edge : {b->lo, b->hi}) {
        const F32 y = from_ordinal(ordinal(edge) + d);
        const bool in = b->contains(y);
        REQUIRE(within_ulps(RefFunction::atan, a, y, k) == in);
        REQUIRE(oracle.accepts(a, y) == in);
        const ErrorEnclosure e = ulp_error(RefFunction::atan, a, y);
        REQUIRE(e.lo <= e.hi);
        if (in) REQUIRE(e.lo < k);
        else REQUIRE(e.hi >= k);
      }
    }
  }
}

TEST_CASE("double screen tracks the certified error") {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 5000; ++i) {
    const F32 a = random_unit(rng);
    const F32 y = f(static_cast<float>(std::sin(static_cast<double>(a.value()))));
    const double screened = screened_error(std::sin(static_cast<double>(a.value())), y.value());
    if (screened < 0) continue;
    const ErrorEnclosure e = ulp_error(RefFunction::sin, a, y);
    REQUIRE(std::fabs(screened - to_double(e.hi)) < kScreenMargin);
  }
}

TEST_CASE("reciprocal preimages") {
  const auto two = reciprocal_preimage(f(0.5f));
  REQUIRE(two);
  CHECK(two->contains(f(2.0f)));
  for (Ordinal n = ordinal(f(2.0f)) - 64; n <= ordinal(f(2.0f)) + 64; ++n) {
    const F32 y = from_ordinal(n);
    CHECK((1.0f / y.value() == 0.5f) == two->contains(y));
  }
  // 1/y < 1 rounds below 1 for every y > 1.
  CHECK_FALSE(reciprocal_preimage(f(1.0f)));
  CHECK_FALSE(reciprocal_preimage_local(f(1.0f)));
}

TEST_CASE("reciprocal preimages partition (1, max]") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20000; ++i) {
    const F32 y = F32::from_bits(0x3f800001u + static_cast<std::uint32_t>(rng() % (0x7f7fffffu - 0x3f800000u)));
    const F32 x = f(1.0f / y.value());
    const auto pre = reciprocal_preimage(x);
    REQUIRE(pre);
    REQUIRE(pre->contains(y));
    REQUIRE(reciprocal_preimage_local(x) == pre);
    if (pre->lo != f(1.0f) && next_down(pre->lo).value() > 1.0f) REQUIRE(1.0f / next_down(pre->lo).value() != x.value());
    if (pre->hi != kMaxFinite) REQUIRE(1.0f / next_up(pre->hi).value() != x.value());
  }
}

TEST_CASE("juffa oracle") {
  const BigRational k = make_rational(6, 5);
  // No y > 1 maps to 1, so only the direct condition applies there.
  CHECK(juffa_oracle(f(1.0f), k) == ulp_bracket(RefFunction::atan, k, f(1.0f)));

  const HornerSkeleton skel(SkeletonForm::odd, {"c17", "c15", "c13", "c11", "c9", "c7", "c5", "c3"});
  const auto c = load_coefficients(HORNERFIT_TEST_DATA "/juffa.coeffs", skel);
  const CompiledProgram prog(skel, c);
  const JuffaOracle oracle(k);
  std::mt19937_64 rng(4);
  for (int i = 0; i < 3000; ++i) {
    const F32 x = i < 500 ? from_ordinal(ordinal(f(1.0f)) - i) : random_unit(rng);
    const F32 r = f(prog(x.value()));
    const auto b = juffa_oracle(x, k);
    REQUIRE(b);
    REQUIRE(b->contains(r));
    REQUIRE(oracle.accepts(x, r));
    REQUIRE(oracle.bracket(x) == b);
  }
}

TEST_CASE("juffa oracle against an exhaustive preimage check") {
  const BigRational k = make_rational(6, 5);
  const F32 hi_c = f(kHalfPiHi), lo_c = f(kHalfPiLo);
  int checked = 0;
  for (Ordinal n = ordinal(f(1.0f)) - 1; checked < 40; --n) {
    const F32 x = from_ordinal(n);
    const auto pre = reciprocal_preimage(x);
    const auto b = juffa_oracle(x, k);
    auto acceptable = [&](F32 r) {
      if (!within_ulps(RefFunction::atan, x, r, k)) return false;
      if (!pre) return true;
      for (Ordinal m = ordinal(pre->lo); m <= ordinal(pre->hi); ++m) {
        const F32 y = from_ordinal(m);
        const F32 out = f(std::fma(hi_c.value(), lo_c.value(), -r.value()));
        if (!within_ulps(RefFunction::atan, y, out, k)) return false;
      }
      return true;
    };
    const F32 centre = f(static_cast<float>(std::atan(static_cast<double>(x.value()))));
    for (Ordinal d = -6; d <= 6; ++d) {
      const F32 r = from_ordinal(ordinal(centre) + d);
      REQUIRE((b && b->contains(r)) == acceptable(r));
    }
    ++checked;
    if (n < ordinal(f(1.0f)) - 20) n -= 100000;  // then spread out towards 1/2
  }
}

TEST_CASE("interval intersection") {
  const F32Interval a{f(0.0f), f(2.0f)}, b{f(1.0f), f(3.0f)}, c{f(2.5f), f(4.0f)};
  CHECK(intersect(a, b) == F32Interval{f(1.0f), f(2.0f)});
  CHECK_FALSE(intersect(a, c));
  CHECK_FALSE(intersect(std::nullopt, b));
}
