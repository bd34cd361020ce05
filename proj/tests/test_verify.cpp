#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hornerfit/config.hpp"
#include "hornerfit/verify.hpp"
#include "oracles.hpp"

using namespace hornerfit;

namespace {

F32 hx(const char* s) { return parse_hexfloat(s); }
F32 f(float x) { return F32::from_float(x); }

const HornerSkeleton kAtan(SkeletonForm::odd, {"c17", "c15", "c13", "c11", "c9", "c7", "c5", "c3"});

std::vector<F32> coeffs(const char* file) { return load_coefficients(std::string(HORNERFIT_TEST_DATA "/") + file, kAtan); }

ScanOptions serial() {
  ScanOptions o;
  o.parallel = false;
  return o;
}

ScanOptions small_chunks() {
  ScanOptions o;
  o.chunk = 1 << 14;
  return o;
}

}  // namespace

TEST_CASE("identity program has zero error, argmax at the smallest ordinal") {
  const HornerSkeleton sin_shape(SkeletonForm::odd, {"c9", "c7", "c5", "c3"});
  const std::vector<F32> zeros(4, f(0.0f));
  for (const F32Interval dom : {F32Interval{f(0.5f), f(0.5f + 0x1p-7f)}, F32Interval{hx("-0x1p-140"), hx("0x1p-140")}}) {
    for (const ScanOptions& o : {serial(), small_chunks()}) {
      const VerifyReport r = max_ulp_error(sin_shape, zeros, RefFunction::identity, dom, o);
      CHECK(r.max_error_ulps == 0);
      CHECK(r.argmax == dom.lo);
      CHECK(r.scanned == static_cast<std::uint64_t>(ordinal_count(dom.lo, dom.hi)));
      CHECK(r.clean());
    }
  }
}

TEST_CASE("golden anchors near the published maxima") {
  const VerifyReport fig = max_ulp_error(kAtan, coeffs("atan_fig.coeffs"), RefFunction::atan,
                                         {hx("0x1.c3p-1"), hx("0x1.c4p-1")});
  CHECK(fig.argmax == hx("0x1.c3344cp-1"));
  CHECK(approx_string(fig.max_error_ulps, 6) == "0.949042");
  const VerifyReport sollya = max_ulp_error(kAtan, coeffs("atan_sollya.coeffs"), RefFunction::atan,
                                            {hx("0x1.fap-1"), hx("0x1.fbp-1")});
  CHECK(sollya.argmax == hx("0x1.fa4bbp-1"));
  CHECK(approx_string(sollya.max_error_ulps, 6) == "1.06693");
  const VerifyReport juffa = full_range_error(kAtan, coeffs("juffa.coeffs"), {hx("0x1.bcp-1"), hx("0x1.bdp-1")});
  CHECK(juffa.argmax == hx("0x1.bc9aacp-1"));
  CHECK(approx_string(juffa.max_error_ulps, 6) == "1.19773");
}

TEST_CASE("serial and parallel scans give identical reports") {
  const auto c = coeffs("atan_sollya.coeffs");
  ScanOptions s = serial(), p = small_chunks();
  s.threshold = p.threshold = make_rational(95, 100);
  const F32Interval dom{f(0.875f), f(1.0f)};
  const VerifyReport rs = max_ulp_error(kAtan, c, RefFunction::atan, dom, s);
  const VerifyReport rp = max_ulp_error(kAtan, c, RefFunction::atan, dom, p);
  CHECK(format_report(rs) == format_report(rp));
  CHECK(rs.violations_found > 0);
  // The report's maximum is reproduced exactly at the argmax.
  const F32 y = eval_f32(kAtan, c, rs.argmax).result;
  CHECK(y == rs.argmax_output);
  CHECK(ulp_error(RefFunction::atan, rs.argmax, y, kReportPrecision).hi == rs.max_error_ulps);
  CHECK(rs.max_error_lower <= rs.max_error_ulps);
  CHECK(rs.max_error_ulps - rs.max_error_lower < pow2(-80));
}

TEST_CASE("first violation is the smallest rejected ordinal, serial or parallel") {
  const auto c = coeffs("atan_sollya.coeffs");
  const UlpOracle oracle(RefFunction::atan, make_rational(95, 100), {f(-1.0f), f(1.0f)});
  const CompiledProgram prog(kAtan, c);
  const F32Interval dom{f(0.75f), f(1.0f)};
  for (const Ordinal start : {ordinal(dom.lo), ordinal(f(0.99f)), ordinal(dom.hi)}) {
    const auto s = first_violation(kAtan, c, oracle, dom, start, serial());
    const auto p = first_violation(kAtan, c, oracle, dom, start, small_chunks());
    REQUIRE(s);
    CHECK(s == p);
    // Brute force: nothing rejected between start and the hit (with wrap-around).
    Ordinal n = start;
    while (from_ordinal(n) != *s) {
      CHECK(oracle.accepts(from_ordinal(n), f(prog(from_ordinal(n).value()))));
      n = n == ordinal(dom.hi) ? ordinal(dom.lo) : n + 1;
    }
    CHECK_FALSE(oracle.accepts(*s, f(prog(s->value()))));
  }
  const UnrestrictedOracle all(dom);
  CHECK_FALSE(first_violation(kAtan, c, all, dom, ordinal(dom.lo)));
}

TEST_CASE("reference atan with c3 one ulp up has a violation") {
  auto c = coeffs("atan_fig.coeffs");
  c.back() = next_up(c.back());
  const UlpOracle oracle(RefFunction::atan, make_rational(95, 100), {f(-1.0f), f(1.0f)});
  const auto v = first_violation(kAtan, c, oracle, oracle.domain(), ordinal(f(-1.0f)));
  REQUIRE(v);
  MESSAGE("first violation " << to_hex(*v));
  CHECK(*v == hx("-0x1.ffffe8p-1"));  // regression anchor from the first run
}

TEST_CASE("reduced-argument arctan is odd") {
  const CompiledProgram poly(kAtan, coeffs("juffa.coeffs"));
  std::mt19937_64 rng(1);
  for (int i = 0; i < 1000000; ++i) {
    const F32 a = F32::from_bits(static_cast<std::uint32_t>(rng()) & 0x7f7fffffu);
    REQUIRE(f(juffa_atanf(poly, a.value())) == f(juffa_atanf(poly, a.negated().value())).negated());
  }
  const VerifyReport pos = full_range_error(kAtan, coeffs("juffa.coeffs"), {f(1.5f), f(1.75f)});
  const VerifyReport neg = full_range_error(kAtan, coeffs("juffa.coeffs"), {f(-1.75f), f(-1.5f)});
  CHECK(pos.max_error_ulps == neg.max_error_ulps);
  CHECK(pos.argmax == neg.argmax.negated());
}

TEST_CASE("report text") {
  const VerifyReport r = max_ulp_error(kAtan, coeffs("atan_fig.coeffs"), RefFunction::atan, {f(0.5f), f(0.5f)});
  const std::string text = format_report(r);
  CHECK(text.find("argmax = 0x1p-1\n") != std::string::npos);
  CHECK(text.find("scanned = 1\n") != std::string::npos);
  CHECK(text.find("wall_seconds") == std::string::npos);
}
