#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hornerfit/config.hpp"
#include "hornerfit/program.hpp"
#include "oracles.hpp"

using namespace hornerfit;

namespace {

F32 hx(const char* s) { return parse_hexfloat(s); }
F32 f(float x) { return F32::from_float(x); }

const HornerSkeleton kSin(SkeletonForm::odd, {"c9", "c7", "c5", "c3"});
const HornerSkeleton kAtan(SkeletonForm::odd, {"c17", "c15", "c13", "c11", "c9", "c7", "c5", "c3"});

std::vector<F32> sollya_coeffs() {
  return load_coefficients(HORNERFIT_TEST_DATA "/atan_sollya.coeffs", kAtan);
}

float random_in(std::mt19937_64& rng, float lo, float hi) {
  return lo + (hi - lo) * std::uniform_real_distribution<float>(0.0f, 1.0f)(rng);
}

}  // namespace

TEST_CASE("skeleton shapes") {
  CHECK(kSin.stages().size() == 5);
  CHECK(kSin.stage_name(0) == "r5");
  CHECK(kSin.stage_name(4) == "r1");
  CHECK(HornerSkeleton(SkeletonForm::even_plus_one, {"c4", "c2"}).stages().size() == 2);
  CHECK(HornerSkeleton(SkeletonForm::plain, {"c0"}).stages().empty());
  CHECK_THROWS(HornerSkeleton(SkeletonForm::odd, {}));
  CHECK_THROWS(HornerSkeleton(SkeletonForm::odd, {"c3", "c3"}));
  CHECK(kSin.index_of("c5") == 2);
  CHECK_THROWS(kSin.index_of("c4"));
  CHECK(parse_form(to_string(SkeletonForm::even_plus_one)) == SkeletonForm::even_plus_one);
}

TEST_CASE("zero coefficients give the identity") {
  std::mt19937_64 rng(1);
  const std::vector<F32> zeros(4, f(0.0f));
  for (int i = 0; i < 10000; ++i) {
    const F32 a = f(random_in(rng, -1.0f, 1.0f));
    CHECK(eval_f32(kSin, zeros, a).result == a);
    CHECK(eval_exact(kSin, std::vector<BigRational>(4, 0), a) == rational_of_f32(a));
  }
}

TEST_CASE("reference atan coefficients at 1 are within 0.95 ulp of pi/4") {
  const auto c = load_coefficients(HORNERFIT_TEST_DATA "/atan_fig.coeffs", kAtan);
  const BigRational y = rational_of_f32(eval_f32(kAtan, c, f(1.0f)).result);
  const auto [lo, hi] = oracle::quarter_pi(200);
  const BigRational err = std::max(abs(y - lo), abs(y - hi));
  CHECK(err < make_rational(95, 100) * pow2(-24));
}

TEST_CASE("traces match a step-by-step re-evaluation") {
  const auto c = sollya_coeffs();
  std::mt19937_64 rng(2);
  for (int i = 0; i < 20000; ++i) {
    const float a = random_in(rng, -1.0f, 1.0f);
    std::vector<float> expect;
    const float s = a * a;
    expect.push_back(s);
    float r = c[0].value();
    for (std::size_t k = 1; k < c.size(); ++k) {
      r = std::fma(r, s, c[k].value());
      expect.push_back(r);
    }
    r = r * s;
    expect.push_back(r);
    expect.push_back(std::fma(r, a, a));
    const auto got = eval_f32(kAtan, c, f(a));
    REQUIRE(got.trace.size() == expect.size());
    for (std::size_t k = 0; k < expect.size(); ++k) REQUIRE(got.trace[k].value.value() == expect[k]);
    REQUIRE(got.result.value() == expect.back());
  }
  const auto t = eval_f32(kSin, std::vector<F32>(4, f(0.0f)), f(0.5f));
  CHECK(format_trace(t.trace).rfind("s = 0x1p-2\n", 0) == 0);
}

TEST_CASE("overflow is an evaluation error") {
  const std::vector<F32> big(4, hx("0x1p+100"));
  CHECK_THROWS_AS(eval_f32(kSin, big, f(0x1p60f)), EvaluationError);
  CHECK_THROWS_AS(eval_f32(kSin, big, F32::from_bits(0x7f800000u)), EvaluationError);
}

TEST_CASE("compiled program agrees with eval_f32") {
  const auto c = sollya_coeffs();
  const CompiledProgram prog(kAtan, c);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200000; ++i) {
    // Mix ordinary arguments with the tiny and subnormal range.
    const F32 a = i % 2 ? f(random_in(rng, -1.0f, 1.0f))
                        : F32::from_bits(static_cast<std::uint32_t>(rng() % 0x2e000000u) | (rng() & 0x80000000u));
    REQUIRE(F32::from_float(prog(a.value())) == eval_f32(kAtan, c, a).result);
  }
  for (const float a : {0.0f, -0.0f, 0x1p-149f, -0x1p-149f, 0x1p-60f, 0x1.fffffep-61f, 1.0f}) {
    CHECK(F32::from_float(prog(a)) == eval_f32(kAtan, c, f(a)).result);
  }
  const HornerSkeleton even(SkeletonForm::even_plus_one, {"c4", "c2"});
  const std::vector<F32> ec{hx("0x1.5p-5"), hx("-0x1p-1")};
  const CompiledProgram eprog(even, ec);
  for (int i = 0; i < 100000; ++i) {
    const F32 a = F32::from_bits(static_cast<std::uint32_t>(rng() % 0x3f800000u) | (rng() & 0x80000000u));
    REQUIRE(F32::from_float(eprog(a.value())) == eval_f32(even, ec, a).result);
  }
}

TEST_CASE("exact evaluation matches the expanded polynomial") {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 2000; ++i) {
    const F32 a = f(random_in(rng, -2.0f, 2.0f));
    std::vector<BigRational> c;
    for (int k = 0; k < 4; ++k) c.push_back(make_rational(static_cast<long>(rng() % 2001) - 1000, 1 + static_cast<long>(rng() % 97)));
    const BigRational ar = rational_of_f32(a);
    const BigRational s = rational_of_f32(f(a.value() * a.value()));
    // c = (c9, c7, c5, c3): a + c3 a s + c5 a s^2 + c7 a s^3 + c9 a s^4.
    const BigRational want = ar + c[3] * ar * s + c[2] * ar * s * s + c[1] * ar * s * s * s + c[0] * ar * s * s * s * s;
    REQUIRE(eval_exact(kSin, c, a) == want);
    const AffineRow row = coefficient_row(kSin, a);
    REQUIRE(row.evaluate(c) == want);
    REQUIRE(row.constant == ar);
    REQUIRE(row.gradient[3] == ar * s);
    REQUIRE(row.gradient[0] == ar * s * s * s * s);
  }
}

TEST_CASE("coefficient rows") {
  const AffineRow half = coefficient_row(kSin, f(0.5f));
  CHECK(half.constant == make_rational(1, 2));
  CHECK(half.gradient == std::vector<BigRational>{make_rational(1, 512), make_rational(1, 128), make_rational(1, 32),
                                                  make_rational(1, 8)});
  const AffineRow c0 = coefficient_row(HornerSkeleton(SkeletonForm::plain, {"c0"}), f(0.3f));
  CHECK(c0.gradient == std::vector<BigRational>{1});
  CHECK(c0.constant == 0);
  // Exact finite differences on random skeletons and stage prefixes.
  std::mt19937_64 rng(5);
  for (int i = 0; i < 500; ++i) {
    const auto form = static_cast<SkeletonForm>(rng() % 3);
    std::vector<std::string> labels;
    for (std::size_t k = 0; k < 1 + rng() % 6; ++k) labels.push_back("c" + std::to_string(k));
    const HornerSkeleton sk(form, labels);
    const F32 a = f(random_in(rng, -3.0f, 3.0f));
    const std::size_t cut = rng() % (sk.stages().size() + 1);
    const AffineRow row = coefficient_row(sk, a, cut);
    std::vector<BigRational> c(labels.size());
    for (auto& v : c) v = make_rational(static_cast<long>(rng() % 41) - 20, 7);
    const BigRational base = row.evaluate(c);
    for (std::size_t k = 0; k < c.size(); ++k) {
      auto bumped = c;
      bumped[k] += 1;
      REQUIRE(row.evaluate(bumped) - base == row.gradient[k]);
    }
    if (cut == sk.stages().size()) REQUIRE(base == eval_exact(sk, c, a));
  }
}

TEST_CASE("forward error bounds at a = 1/2") {
  const CoefficientAssignment boxes(4, -1, 1);
  const ErrorBudget b = forward_error_bounds(kSin, boxes, f(0.5f));
  REQUIRE(b.magnitude.size() == 6);
  CHECK(b.magnitude[0] == 1);
  CHECK(b.deviation[0] == 0);
  CHECK(b.magnitude[1] == make_rational(5, 4));
  CHECK(b.deviation[1] == pow2(-24));
  for (std::size_t i = 1; i < 4; ++i) {
    CHECK(b.deviation[i + 1] == ulp_of_real(b.magnitude[i + 1]) / 2 + b.deviation[i] / 4);
  }
  CHECK(b.deviation[5] == ulp_of_real(b.magnitude[5]) / 2 + b.deviation[4] / 2);
  CHECK(b.delta_hi == b.deviation[5]);
  CHECK(b.delta_lo == -b.delta_hi);

  const ErrorBudget z = forward_error_bounds(HornerSkeleton(SkeletonForm::plain, {"c0"}), CoefficientAssignment(1, -1, 1), f(0.5f));
  CHECK(z.delta_hi == 0);
}

TEST_CASE("forward error bounds contain the binary32 error") {
  std::mt19937_64 rng(6);
  const HornerSkeleton even(SkeletonForm::even_plus_one, {"c6", "c4", "c2"});
  const HornerSkeleton plain(SkeletonForm::plain, {"c3", "c2", "c1", "c0"});
  const HornerSkeleton* skeletons[] = {&kSin, &kAtan, &even, &plain};
  int draws = 0;
  for (int i = 0; draws < 1000000; ++i) {
    const HornerSkeleton& sk = *skeletons[i % 4];
    const std::size_t n = sk.coefficient_count();
    const F32 a = f(random_in(rng, -1.0f, 1.0f));
    CoefficientAssignment boxes(n, -1, 1);
    std::vector<float> lo(n), hi(n);
    for (std::size_t k = 0; k < n; ++k) {
      lo[k] = random_in(rng, -1.0f, 0.5f);
      hi[k] = random_in(rng, lo[k], 1.0f);
      boxes.set_box(k, BigRational(lo[k]), BigRational(hi[k]));
    }
    const ErrorBudget b = forward_error_bounds(sk, boxes, a);
    for (int d = 0; d < 5000; ++d, ++draws) {
      std::vector<F32> c(n);
      std::vector<BigRational> cr(n);
      for (std::size_t k = 0; k < n; ++k) {
        c[k] = f(random_in(rng, lo[k], hi[k]));
        cr[k] = rational_of_f32(c[k]);
      }
      const BigRational err = BigRational(CompiledProgram(sk, c)(a.value())) - eval_exact(sk, cr, a);
      REQUIRE(err <= b.delta_hi);
      REQUIRE(err >= b.delta_lo);
    }
  }
}

TEST_CASE("backward propagation: the a = 1/2 example") {
  const CoefficientAssignment free(4, -1, 1);
  const F32Interval acceptable{hx("0x1.eaee86p-2"), hx("0x1.eaee88p-2")};
  CHECK(propagation_cut(kSin, free) == 3);
  const auto r3 = backward_propagate(kSin, free, f(0.5f), acceptable);
  REQUIRE(r3);
  CHECK(r3->lo == hx("-0x1.5117aep-3"));
  CHECK(r3->hi == hx("-0x1.51177p-3"));
  const auto r2 = invert_fma_monotone(FmaOperand::first, f(0.5f), f(0.5f), acceptable);
  REQUIRE(r2);
  CHECK(r2->lo == hx("-0x1.5117aep-5"));
  CHECK(r2->hi == hx("-0x1.51177p-5"));
}

TEST_CASE("backward propagation: identity tail") {
  const HornerSkeleton plain(SkeletonForm::plain, {"c2", "c1", "c0"});
  const CoefficientAssignment free(3, -1, 1);
  const F32Interval t{hx("0x1.2p-3"), hx("0x1.4p-1")};
  CHECK(propagation_cut(plain, free) == 2);
  CHECK(backward_propagate(plain, free, f(0.7f), t) == t);
}

TEST_CASE("backward propagation: brute force over fixed tails") {
  const HornerSkeleton plain(SkeletonForm::plain, {"c3", "c2", "c1", "c0"});
  std::mt19937_64 rng(8);
  constexpr Ordinal kWindow = 1 << 12;
  for (int i = 0; i < 200; ++i) {
    const float a = random_in(rng, -2.0f, 2.0f);
    const std::size_t fixed_count = 1 + rng() % 3;  // c0, then c1, then c2
    CoefficientAssignment coeffs(4, -1, 1);
    std::vector<float> tail;
    for (std::size_t k = 0; k < fixed_count; ++k) {
      const float v = random_in(rng, -1.0f, 1.0f);
      coeffs.fix(3 - k, f(v));
      tail.insert(tail.begin(), v);
    }
    auto run = [&](float v) {
      for (const float c : tail) v = std::fma(v, a, c);
      return v;
    };
    const float mid = run(random_in(rng, -1.0f, 1.0f));
    const F32Interval acceptable{from_ordinal(ordinal(f(mid)) - static_cast<Ordinal>(rng() % 8)),
                                 from_ordinal(ordinal(f(mid)) + static_cast<Ordinal>(rng() % 8))};
    const auto got = backward_propagate(plain, coeffs, f(a), acceptable);
    REQUIRE(propagation_cut(plain, coeffs) == 3 - fixed_count);
    REQUIRE(got);
    const Ordinal lo = ordinal(got->lo), hi = ordinal(got->hi);
    for (const Ordinal edge : {lo, hi}) {
      for (Ordinal n = edge - kWindow; n <= edge + kWindow; ++n) {
        const bool in = acceptable.contains(f(run(from_ordinal(n).value())));
        if (in != (n >= lo && n <= hi)) FAIL("mismatch at ordinal " << n);
      }
    }
  }
}
