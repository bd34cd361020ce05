#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "hornerfit/exactlp.hpp"
#include "oracles.hpp"

using namespace hornerfit;

namespace {

constexpr std::size_t kPivotCeiling = 500;

LinearSystem random_system(std::mt19937_64& rng, std::size_t vars, std::size_t max_rows) {
  LinearSystem sys;
  auto small = [&](long span) { return static_cast<long>(rng() % (2 * span + 1)) - span; };
  std::vector<BigRational> x0;
  for (std::size_t j = 0; j < vars; ++j) {
    const BigRational lo = make_rational(small(6), 1 + static_cast<long>(rng() % 4));
    const BigRational hi = lo + make_rational(1 + static_cast<long>(rng() % 8), 1 + static_cast<long>(rng() % 4));
    sys.add_variable("x" + std::to_string(j), lo, hi);
    x0.push_back(lo + (hi - lo) * make_rational(static_cast<long>(rng() % 101), 100));
  }
  const std::size_t rows = rng() % (max_rows + 1);
  for (std::size_t i = 0; i < rows; ++i) {
    LinearRow row;
    BigRational at = 0;
    for (std::size_t j = 0; j < vars; ++j) {
      row.coeffs.push_back(make_rational(small(5), 1 + static_cast<long>(rng() % 3)));
      at += row.coeffs.back() * x0[j];
    }
    // Mostly bands around a common point; some shifted to create infeasible systems.
    const BigRational shift = rng() % 5 == 0 ? make_rational(small(4), 1) : BigRational(0);
    const BigRational width = make_rational(static_cast<long>(rng() % 5), 1 + static_cast<long>(rng() % 3));
    const int kind = static_cast<int>(rng() % 4);
    if (kind != 1) row.lo = at + shift - width;
    if (kind != 2) row.hi = at + shift + width;
    sys.rows.push_back(std::move(row));
  }
  return sys;
}

void check_against_fm(const LinearSystem& sys) {
  for (std::size_t v = 0; v < sys.variables.size(); ++v) {
    const oracle::Range want = oracle::variable_range(sys, v);
    const LPOutcome lo = minimize(sys, v), hi = maximize(sys, v);
    REQUIRE(lo.feasible() == want.feasible);
    REQUIRE(hi.feasible() == want.feasible);
    REQUIRE(lo.pivots < kPivotCeiling);
    REQUIRE(hi.pivots < kPivotCeiling);
    if (!want.feasible) continue;
    REQUIRE(lo.value == want.lo);
    REQUIRE(hi.value == want.hi);
    REQUIRE(sys.satisfied_by(lo.witness));
    REQUIRE(sys.satisfied_by(hi.witness));
    REQUIRE(lo.witness[v] == lo.value);
  }
}

}  // namespace

TEST_CASE("boxes only") {
  LinearSystem sys;
  sys.add_variable("x", 0, 1);
  CHECK(minimize(sys, 0).value == 0);
  CHECK(maximize(sys, 0).value == 1);
  CHECK(check_feasible(sys).feasible());
}

TEST_CASE("row against box is infeasible") {
  LinearSystem sys;
  sys.add_variable("x", 0, make_rational(1, 2));
  sys.rows.push_back({{1}, BigRational(1), std::nullopt});
  CHECK_FALSE(check_feasible(sys).feasible());
  CHECK_FALSE(minimize(sys, 0).feasible());
}

TEST_CASE("parallel rows with disjoint bands") {
  LinearSystem sys;
  sys.add_variable("x", -10, 10);
  sys.add_variable("y", -10, 10);
  sys.rows.push_back({{1, 2}, BigRational(0), BigRational(1)});
  sys.rows.push_back({{2, 4}, BigRational(3), BigRational(4)});
  CHECK_FALSE(check_feasible(sys).feasible());
}

TEST_CASE("validation") {
  LinearSystem sys;
  sys.add_variable("x", 0, 1);
  sys.rows.push_back({{1, 2}, std::nullopt, BigRational(1)});
  CHECK_THROWS_AS(sys.validate(), std::invalid_argument);
  sys.rows.clear();
  sys.add_variable("y", 1, 0);
  CHECK_THROWS_AS(sys.validate(), std::invalid_argument);
}

TEST_CASE("random systems match Fourier-Motzkin") {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 300; ++i) check_against_fm(random_system(rng, 1 + rng() % 3, 6));
}

TEST_CASE("Hilbert and Vandermonde stress systems with narrow bands") {
  const BigRational eps = make_rational(1, 1000000000000L);
  const std::vector<BigRational> x = {make_rational(1, 3), make_rational(-2, 7), make_rational(5, 11)};
  LinearSystem hilbert, vander;
  for (std::size_t j = 0; j < 3; ++j) {
    hilbert.add_variable("h" + std::to_string(j), -1, 1);
    vander.add_variable("v" + std::to_string(j), -1, 1);
  }
  for (long i = 0; i < 6; ++i) {
    LinearRow h, v;
    BigRational hv = 0, vv = 0, t = make_rational(i + 1, 7), tp = 1;
    for (long j = 0; j < 3; ++j) {
      h.coeffs.push_back(make_rational(1, i + j + 1));
      hv += h.coeffs.back() * x[j];
      v.coeffs.push_back(tp);
      vv += tp * x[j];
      tp *= t;
    }
    h.lo = hv - eps, h.hi = hv + eps;
    v.lo = vv - eps, v.hi = vv + eps;
    hilbert.rows.push_back(h);
    vander.rows.push_back(v);
  }
  check_against_fm(hilbert);
  check_against_fm(vander);
  // Squeezing one band past the others makes it infeasible.
  hilbert.rows[0].lo = *hilbert.rows[0].hi + eps;
  hilbert.rows[0].hi = *hilbert.rows[0].lo + eps;
  check_against_fm(hilbert);
}

TEST_CASE("solver reuse: warm start, fix_variable") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 100; ++i) {
    const LinearSystem sys = random_system(rng, 3, 6);
    std::vector<BigRational> start;
    for (const auto& b : sys.boxes) start.push_back((b.lo + b.hi) / 2);
    SimplexSolver solver(sys, start);
    const LPOutcome lo = solver.minimize(0);
    const LPOutcome hi = solver.maximize(0);
    const oracle::Range want = oracle::variable_range(sys, 0);
    REQUIRE(lo.feasible() == want.feasible);
    if (!want.feasible) continue;
    REQUIRE(lo.value == want.lo);
    REQUIRE(hi.value == want.hi);
    const BigRational mid = (want.lo + want.hi) / 2;
    solver.fix_variable(0, mid);
    LinearSystem fixed = sys;
    fixed.boxes[0] = {mid, mid};
    const oracle::Range want1 = oracle::variable_range(fixed, 1);
    const LPOutcome lo1 = solver.minimize(1);
    REQUIRE(lo1.feasible() == want1.feasible);
    if (want1.feasible) REQUIRE(lo1.value == want1.lo);
  }
}

TEST_CASE("no rows and no variables") {
  LinearSystem sys;
  CHECK(check_feasible(sys).feasible());
  sys.add_variable("x", make_rational(1, 3), make_rational(1, 3));
  CHECK(minimize(sys, 0).value == make_rational(1, 3));
}

TEST_CASE("text dump round-trips") {
  std::mt19937_64 rng(1);
  const LinearSystem sys = random_system(rng, 3, 6);
  std::stringstream ss;
  write_system(ss, sys);
  const LinearSystem back = read_system(ss);
  REQUIRE(back.variables == sys.variables);
  REQUIRE(back.rows.size() == sys.rows.size());
  for (std::size_t i = 0; i < sys.rows.size(); ++i) {
    CHECK(back.rows[i].coeffs == sys.rows[i].coeffs);
    CHECK(back.rows[i].lo == sys.rows[i].lo);
    CHECK(back.rows[i].hi == sys.rows[i].hi);
  }
  for (std::size_t j = 0; j < sys.boxes.size(); ++j) {
    CHECK(back.boxes[j].lo == sys.boxes[j].lo);
    CHECK(back.boxes[j].hi == sys.boxes[j].hi);
  }
}
