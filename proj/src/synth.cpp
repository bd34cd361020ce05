#include "hornerfit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

namespace hornerfit {

std::string to_string(SampleRule rule) {
  return rule == SampleRule::uniform ? "uniform" : "two-uniform-average";
}

SampleRule parse_sample_rule(const std::string& text) {
  if (text == "uniform") return SampleRule::uniform;
  if (text == "two-uniform-average") return SampleRule::two_uniform_average;
  throw std::invalid_argument("unknown sample rule: " + text);
}

const std::optional<F32Interval>& SynthState::bracket(const AcceptanceOracle& oracle, F32 a) {
  auto it = brackets.find(a.bits);
  if (it == brackets.end()) it = brackets.emplace(a.bits, oracle.bracket(a)).first;
  return it->second;
}

bool SynthState::add_point(F32 a) {
  for (F32 p : test_points) {
    if (p == a) return false;
  }
  test_points.push_back(a);
  return true;
}

std::vector<F32> default_test_points(const F32Interval& domain, std::size_t coefficient_count) {
  std::vector<F32> pts{domain.lo, domain.hi};
  if (domain.contains(F32::from_float(0.0f))) pts.push_back(F32::from_float(0.0f));
  const double lo = domain.lo.value();
  const double hi = domain.hi.value();
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const std::size_t n = 2 * coefficient_count;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = mid + half * std::cos((2.0 * static_cast<double>(i) + 1.0) * std::numbers::pi / (2.0 * static_cast<double>(n)));
    F32 f = F32::from_float(static_cast<float>(x));
    if (value_less(f, domain.lo)) f = domain.lo;
    if (value_less(domain.hi, f)) f = domain.hi;
    pts.push_back(f);
  }
  std::vector<F32> out;
  for (F32 p : pts) {
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  return out;
}

namespace {

LinearRow contradiction(std::size_t width) {
  return {std::vector<BigRational>(width, BigRational(0)), BigRational(1), BigRational(0)};
}

}  // namespace

LinearSystem build_constraints(const HornerSkeleton& skeleton, const CoefficientAssignment& coeffs,
                               const AcceptanceOracle& oracle, std::span<const F32> points, SynthState* cache) {
  LinearSystem sys;
  const std::size_t n = skeleton.coefficient_count();
  for (std::size_t i = 0; i < n; ++i) sys.add_variable(skeleton.labels()[i], coeffs[i].lower(), coeffs[i].upper());
  const std::size_t cut = propagation_cut(skeleton, coeffs);
  for (F32 a : points) {
    const std::optional<F32Interval> acceptable = cache ? cache->bracket(oracle, a) : oracle.bracket(a);
    if (!acceptable) {
      sys.rows.push_back(contradiction(n));
      continue;
    }
    const auto target = backward_propagate(skeleton, coeffs, a, *acceptable);
    if (!target) {
      sys.rows.push_back(contradiction(n));
      continue;
    }
    ErrorBudget budget;
    try {
      budget = forward_error_bounds(skeleton, coeffs, a, cut);
    } catch (const EvaluationError&) {
      continue;  // no usable bound; dropping the row keeps the system a relaxation
    }
    AffineRow row = coefficient_row(skeleton, a, cut);
    LinearRow lr;
    lr.lo = rational_of_f32(target->lo) - row.constant + budget.delta_lo;
    lr.hi = rational_of_f32(target->hi) - row.constant + budget.delta_hi;
    lr.coeffs = std::move(row.gradient);
    sys.rows.push_back(std::move(lr));
  }
  return sys;
}

namespace {

std::vector<std::size_t> resolve_order(const HornerSkeleton& skeleton, const SynthConfig& config) {
  std::vector<std::size_t> order;
  if (config.fixing_order.empty()) {
    for (std::size_t i = skeleton.coefficient_count(); i-- > 0;) order.push_back(i);
  } else {
    for (const auto& label : config.fixing_order) order.push_back(skeleton.index_of(label));
  }
  std::vector<std::size_t> sorted = order;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted.size() != skeleton.coefficient_count() || sorted[i] != i) {
      throw std::invalid_argument("fixing order must be a permutation of the coefficients");
    }
  }
  return order;
}

class FixingSearch {
 public:
  FixingSearch(const HornerSkeleton& skeleton, const CoefficientAssignment& boxes, const AcceptanceOracle& oracle,
               SynthState& state, const SynthConfig& config, SynthStats& stats, std::mt19937_64& rng)
      : skeleton_(skeleton),
        boxes_(boxes),
        oracle_(oracle),
        state_(state),
        config_(config),
        stats_(stats),
        rng_(rng),
        order_(resolve_order(skeleton, config)) {}

  std::optional<std::vector<F32>> run() {
    for (int restart = 0; restart < config_.inner_restart_limit; ++restart) {
      ++stats_.restarts;
      assignment_ = boxes_;
      nodes_left_ = config_.node_limit;
      if (descend(0, {})) return assignment_.fixed_values();
    }
    return std::nullopt;
  }

 private:
  BigRational uniform(const BigRational& lo, const BigRational& hi) {
    BigRational u(mpz_class(std::to_string(rng_())));
    u *= pow2(-64);
    return lo + (hi - lo) * u;
  }

  F32 sample(const BigRational& lo, const BigRational& hi, F32 flo, F32 fhi) {
    BigRational q = config_.sample_rule == SampleRule::uniform ? uniform(lo, hi)
                                                               : (uniform(lo, hi) + uniform(lo, hi)) / 2;
    F32 f = round_to_f32(q);
    if (value_less(f, flo)) f = flo;
    if (value_less(fhi, f)) f = fhi;
    return f;
  }

  bool accepted_everywhere() {
    const auto values = assignment_.fixed_values();
    for (F32 a : state_.test_points) {
      const auto& b = state_.bracket(oracle_, a);
      if (!b) return false;
      try {
        if (!b->contains(eval_f32(skeleton_, values, a).result)) return false;
      } catch (const EvaluationError&) {
        return false;
      }
    }
    return true;
  }

  bool descend(std::size_t level, const std::vector<BigRational>& hint) {
    if (level == order_.size()) return accepted_everywhere();
    if (nodes_left_-- <= 0) return false;
    const std::size_t var = order_[level];

    const LinearSystem sys = build_constraints(skeleton_, assignment_, oracle_, state_.test_points, &state_);
    SimplexSolver solver(sys, hint);
    const LPOutcome lo = solver.minimize(var);
    stats_.lp_solves++;
    if (!lo.feasible()) {
      stats_.lp_pivots += solver.pivot_count();
      return false;
    }
    const LPOutcome hi = solver.maximize(var);
    stats_.lp_solves++;
    stats_.lp_pivots += solver.pivot_count();
    const F32 flo = ceil_f32(lo.value);
    const F32 fhi = floor_f32(hi.value);
    if (value_less(fhi, flo)) return false;

    // Centre of the two extreme witnesses: a feasible start for the child LP.
    std::vector<BigRational> child_hint(lo.witness.size());
    for (std::size_t i = 0; i < child_hint.size(); ++i) child_hint[i] = (lo.witness[i] + hi.witness[i]) / 2;

    std::set<std::uint32_t> tried;
    for (int t = 0; t < config_.branching; ++t) {
      F32 cand;
      if (t == 0 && state_.last_success && !value_less((*state_.last_success)[var], flo) &&
          !value_less(fhi, (*state_.last_success)[var])) {
        cand = (*state_.last_success)[var];
      } else {
        cand = sample(lo.value, hi.value, flo, fhi);
      }
      if (!tried.insert(cand.bits).second) continue;
      assignment_.fix(var, cand);
      child_hint[var] = rational_of_f32(cand);
      if (descend(level + 1, child_hint)) return true;
      assignment_.unfix(var);
      if (nodes_left_ <= 0) break;
    }
    return false;
  }

  const HornerSkeleton& skeleton_;
  const CoefficientAssignment& boxes_;
  const AcceptanceOracle& oracle_;
  SynthState& state_;
  const SynthConfig& config_;
  SynthStats& stats_;
  std::mt19937_64& rng_;
  std::vector<std::size_t> order_;
  CoefficientAssignment assignment_;
  int nodes_left_ = 0;
};

// Shrinks every free box to its LP bounds rounded inward to binary32. Each
// true solution at the test points satisfies every row, so it survives.
bool tighten_boxes(const HornerSkeleton& skeleton, CoefficientAssignment& boxes, const AcceptanceOracle& oracle,
                   SynthState& state, const SynthConfig& config, SynthStats& stats) {
  for (int round = 0; round < config.tighten_rounds; ++round) {
    const LinearSystem sys = build_constraints(skeleton, boxes, oracle, state.test_points, &state);
    SimplexSolver solver(sys);
    bool shrank = false;
    for (std::size_t i = 0; i < skeleton.coefficient_count(); ++i) {
      if (boxes.is_fixed(i)) continue;
      const LPOutcome lo = solver.minimize(i);
      stats.lp_solves++;
      if (!lo.feasible()) {
        stats.lp_pivots += solver.pivot_count();
        return false;
      }
      const LPOutcome hi = solver.maximize(i);
      stats.lp_solves++;
      const BigRational new_lo = rational_of_f32(ceil_f32(lo.value));
      const BigRational new_hi = rational_of_f32(floor_f32(hi.value));
      if (new_lo > new_hi) {
        stats.lp_pivots += solver.pivot_count();
        return false;
      }
      const BigRational old_width = boxes[i].hi - boxes[i].lo;
      // Only a real shrink is worth another round.
      if ((new_hi - new_lo) * 100 < old_width * 99) shrank = true;
      boxes.set_box(i, std::max(new_lo, boxes[i].lo), std::min(new_hi, boxes[i].hi));
    }
    stats.lp_pivots += solver.pivot_count();
    if (!shrank) break;
  }
  return true;
}

}  // namespace

std::optional<std::vector<F32>> fix_coefficients(const HornerSkeleton& skeleton, const CoefficientAssignment& boxes,
                                                 const AcceptanceOracle& oracle, SynthState& state,
                                                 const SynthConfig& config, SynthStats* stats,
                                                 const ProgressLog& log) {
  if (state.test_points.empty()) throw std::invalid_argument("fix_coefficients: no test points");
  if (config.branching < 1) throw std::invalid_argument("branching must be at least 1");
  SynthStats local;
  SynthStats& st = stats ? *stats : local;
  if (!state.boxes) state.boxes = boxes;
  std::optional<std::vector<F32>> result;
  if (tighten_boxes(skeleton, *state.boxes, oracle, state, config, st)) {
    FixingSearch search(skeleton, *state.boxes, oracle, state, config, st, state.rng);
    result = search.run();
  }
  if (result) state.last_success = *result;
  if (log) {
    std::ostringstream os;
    os << "fix: " << (result ? "ok" : "failed") << " points=" << state.test_points.size() << " boxes=";
    for (std::size_t i = 0; i < skeleton.coefficient_count(); ++i) {
      os << (i ? "," : "") << skeleton.labels()[i] << ":[" << to_hex(round_to_f32((*state.boxes)[i].lower())) << ' '
         << to_hex(round_to_f32((*state.boxes)[i].upper())) << ']';
    }
    os
       << " lp_solves=" << st.lp_solves << " pivots=" << st.lp_pivots << " restarts=" << st.restarts;
    log(os.str());
  }
  return result;
}

SynthResult synthesize(const HornerSkeleton& skeleton, const CoefficientAssignment& boxes,
                       const AcceptanceOracle& oracle, const SynthConfig& config, const ProgressLog& log) {
  SynthResult result;
  const F32Interval domain = oracle.domain();
  SynthState state;
  state.rng.seed(config.rng_seed);
  for (F32 p : config.initial_test_points.empty() ? default_test_points(domain, skeleton.coefficient_count())
                                                   : config.initial_test_points) {
    if (domain.contains(p)) state.add_point(p);
  }
  if (state.test_points.empty()) state.add_point(domain.lo);

  Ordinal start = ordinal(domain.lo);
  for (int iter = 1; iter <= config.outer_iteration_limit; ++iter) {
    result.stats.outer_iterations = iter;
    const auto coeffs = fix_coefficients(skeleton, boxes, oracle, state, config, &result.stats, log);
    if (!coeffs) {
      result.failure = "coefficient fixing failed at iteration " + std::to_string(iter) + " with " +
                       std::to_string(state.test_points.size()) + " test points";
      break;
    }
    const auto bad = first_violation(skeleton, *coeffs, oracle, domain, start, config.scan);
    if (log) {
      std::ostringstream os;
      os << "iter " << iter << " points=" << state.test_points.size() << " lp_solves=" << result.stats.lp_solves
         << " pivots=" << result.stats.lp_pivots << " coeffs=";
      for (std::size_t i = 0; i < coeffs->size(); ++i) {
        os << (i ? "," : "") << skeleton.labels()[i] << ':' << to_hex((*coeffs)[i]);
      }
      os << " violation=" << (bad ? to_hex(*bad) : std::string("none"));
      log(os.str());
    }
    if (!bad) {
      result.success = true;
      result.coefficients = *coeffs;
      break;
    }
    if (!state.add_point(*bad)) {
      result.failure = "violation at an existing test point " + to_hex(*bad);
      break;
    }
    start = ordinal(*bad);
  }
  if (!result.success && result.failure.empty()) result.failure = "outer iteration limit reached";
  result.test_points = state.test_points;
  return result;
}

std::optional<std::vector<CoefficientBounds>> coefficient_bounds(const HornerSkeleton& skeleton,
                                                                 const CoefficientAssignment& coeffs,
                                                                 const AcceptanceOracle& oracle,
                                                                 std::span<const F32> points) {
  const LinearSystem sys = build_constraints(skeleton, coeffs, oracle, points);
  SimplexSolver solver(sys);
  std::vector<CoefficientBounds> out;
  for (std::size_t i = 0; i < skeleton.coefficient_count(); ++i) {
    const LPOutcome lo = solver.minimize(i);
    if (!lo.feasible()) return std::nullopt;
    const LPOutcome hi = solver.maximize(i);
    out.push_back({skeleton.labels()[i], lo.value, hi.value});
  }
  return out;
}

}  // namespace hornerfit
