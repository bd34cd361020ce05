#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hornerfit/exactlp.hpp"
#include "hornerfit/funcspec.hpp"
#include "hornerfit/program.hpp"
#include "hornerfit/verify.hpp"

namespace hornerfit {

enum class SampleRule { uniform, two_uniform_average };

std::string to_string(SampleRule rule);
SampleRule parse_sample_rule(const std::string& text);

struct SynthConfig {
  /// Coefficient labels in fixing order; empty means lowest degree first.
  std::vector<std::string> fixing_order;
  int branching = 4;
  SampleRule sample_rule = SampleRule::two_uniform_average;
  int outer_iteration_limit = 1000;
  /// Restarts of the recursive fixing search per outer iteration.
  int inner_restart_limit = 64;
  /// LP solves allowed in one restart before it gives up.
  int node_limit = 256;
  /// Rounds of box tightening (min/max of every free coefficient, then the
  /// forward bounds are recomputed over the smaller boxes) before each search.
  int tighten_rounds = 8;
  std::uint64_t rng_seed = 1;
  /// Empty means the default rule (endpoints, zero, Chebyshev points).
  std::vector<F32> initial_test_points;
  ScanOptions scan;
};

struct SynthState {
  std::vector<F32> test_points;
  std::optional<std::vector<F32>> last_success;
  std::map<std::uint32_t, std::optional<F32Interval>> brackets;
  std::mt19937_64 rng{1};
  /// Coefficient boxes tightened by LP bounds; they only shrink as test
  /// points are added. Empty until the first fixing pass.
  std::optional<CoefficientAssignment> boxes;

  const std::optional<F32Interval>& bracket(const AcceptanceOracle& oracle, F32 a);
  bool add_point(F32 a);
};

struct SynthStats {
  int outer_iterations = 0;
  std::uint64_t lp_solves = 0;
  std::uint64_t lp_pivots = 0;
  std::uint64_t restarts = 0;
};

struct SynthResult {
  bool success = false;
  std::vector<F32> coefficients;
  std::string failure;
  std::vector<F32> test_points;
  SynthStats stats;
};

using ProgressLog = std::function<void(const std::string&)>;

/// Default initial test points: domain endpoints, zero when inside, and
/// 2 * count Chebyshev nodes rounded to binary32.
std::vector<F32> default_test_points(const F32Interval& domain, std::size_t coefficient_count);

/// One banded row per point over all coefficients (fixed ones sit in
/// collapsed boxes): the accumulator at the propagation cut must land in
/// the backward-propagated target widened by the forward error bound.
/// Points with no acceptable output yield a contradictory row.
LinearSystem build_constraints(const HornerSkeleton& skeleton, const CoefficientAssignment& coeffs,
                               const AcceptanceOracle& oracle, std::span<const F32> points,
                               SynthState* cache = nullptr);

/// The randomized fixing search over the current test points. On success the
/// returned values are accepted at every test point in binary32 evaluation.
std::optional<std::vector<F32>> fix_coefficients(const HornerSkeleton& skeleton,
                                                 const CoefficientAssignment& boxes,
                                                 const AcceptanceOracle& oracle, SynthState& state,
                                                 const SynthConfig& config, SynthStats* stats = nullptr,
                                                 const ProgressLog& log = {});

/// Cutting-plane loop: fix coefficients, scan the domain for a violation,
/// add it as a test point, repeat.
SynthResult synthesize(const HornerSkeleton& skeleton, const CoefficientAssignment& boxes,
                       const AcceptanceOracle& oracle, const SynthConfig& config, const ProgressLog& log = {});

/// Per-coefficient exact LP bounds over the given points; nullopt if infeasible.
struct CoefficientBounds {
  std::string label;
  BigRational lo;
  BigRational hi;
};
std::optional<std::vector<CoefficientBounds>> coefficient_bounds(const HornerSkeleton& skeleton,
                                                                 const CoefficientAssignment& coeffs,
                                                                 const AcceptanceOracle& oracle,
                                                                 std::span<const F32> points);

}  // namespace hornerfit
