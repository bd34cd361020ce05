#include "hornerfit/verify.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <sstream>

namespace hornerfit {

namespace {

struct Candidate {
  Ordinal ord;
  float y;
  double est;  // < 0: screen could not estimate
};

// Candidate lists beyond this size are reduced with certified errors.
constexpr std::size_t kCertifyAt = std::size_t{1} << 14;

struct ScanPartial {
  double best_est = -1.0;
  std::vector<Candidate> candidates;
  std::size_t prune_at = 256;
  std::uint64_t scanned = 0;
  std::uint64_t violations = 0;
  std::uint64_t certified = 0;
  std::uint64_t non_finite = 0;
  std::optional<Ordinal> first_violation;
  std::vector<Ordinal> undecided;

  void prune(double best) {
    std::erase_if(candidates, [&](const Candidate& c) { return c.est >= 0.0 && c.est < best - kScreenMargin; });
    prune_at = 2 * candidates.size() + 256;
  }
};

// Running best estimate shared by all chunks: any estimate some point has
// actually reached is a sound pruning bound for every other chunk.
class SharedBest {
 public:
  double load() const { return value_.load(std::memory_order_relaxed); }
  void raise(double v) {
    double cur = value_.load(std::memory_order_relaxed);
    while (v > cur && !value_.compare_exchange_weak(cur, v, std::memory_order_relaxed)) {
    }
  }

 private:
  std::atomic<double> value_{-1.0};
};

// Replaces the screen estimates by 128-bit certified enclosures, drops every
// candidate certainly below the best, and keeps one representative (the
// smallest ordinal) of each group of identical enclosures. Large runs of
// exact ties, e.g. zero error on tiny arguments, collapse to one entry.
void certify_candidates(RefFunction ref, ScanPartial& part) {
  struct Certified {
    Candidate c;
    ErrorEnclosure e;
  };
  std::vector<Certified> all;
  all.reserve(part.candidates.size());
  BigRational best_lo = -1;
  for (const auto& c : part.candidates) {
    ++part.certified;
    auto e = ulp_error(ref, from_ordinal(c.ord), F32::from_float(c.y), kReportPrecision);
    if (e.lo > best_lo) best_lo = e.lo;
    all.push_back({c, std::move(e)});
  }
  std::vector<Candidate> kept;
  std::vector<const ErrorEnclosure*> seen;
  for (const auto& x : all) {
    if (x.e.hi < best_lo) continue;
    const bool dup = std::any_of(seen.begin(), seen.end(),
                                 [&](const ErrorEnclosure* e) { return e->lo == x.e.lo && e->hi == x.e.hi; });
    if (dup) continue;
    seen.push_back(&x.e);
    // Certified values stand in for the estimates from here on.
    kept.push_back({x.c.ord, x.c.y, std::max(x.e.hi.get_d(), 0.0)});
  }
  part.candidates = std::move(kept);
  part.prune_at = 2 * part.candidates.size() + kCertifyAt;
}

struct Threshold {
  std::optional<BigRational> exact;
  double approx = 0.0;
};

template <class Program>
void scan_range(const Program& program, RefFunction ref, Ordinal lo, Ordinal hi, const Threshold& thr,
                ScanPartial& out, SharedBest& shared) {
  out.best_est = std::max(out.best_est, shared.load());
  auto prune = [&] {
    shared.raise(out.best_est);
    out.best_est = std::max(out.best_est, shared.load());
    out.prune(out.best_est);
    if (out.candidates.size() > kCertifyAt) certify_candidates(ref, out);
  };
  for (Ordinal n = lo; n <= hi; ++n) {
    const F32 a = from_ordinal(n);
    const float y = program(a.value());
    ++out.scanned;
    if (!std::isfinite(y)) {
      ++out.non_finite;
      ++out.violations;
      if (!out.first_violation) out.first_violation = n;
      continue;
    }
    const double est = screened_error(ref_double(ref, static_cast<double>(a.value())), y);
    if (thr.exact) {
      bool bad = false;
      if (est >= 0.0 && est < thr.approx - kScreenMargin) {
        bad = false;
      } else if (est > thr.approx + kScreenMargin) {
        bad = true;
      } else {
        ++out.certified;
        try {
          bad = !within_ulps(ref, a, F32::from_float(y), *thr.exact);
        } catch (const PrecisionCeiling&) {
          out.undecided.push_back(n);
        }
      }
      if (bad) {
        ++out.violations;
        if (!out.first_violation) out.first_violation = n;
      }
    }
    if (est < 0.0 || est >= out.best_est - kScreenMargin) {
      out.candidates.push_back({n, y, est});
      if (est > out.best_est) out.best_est = est;
      if (out.candidates.size() > out.prune_at) prune();
    }
  }
  prune();
}

// A strided pass over the domain. The largest estimate it sees belongs to a
// real point, so it is a sound starting bound, and usually a close one.
// Without it the first chunks keep long runs of near-equal errors as
// candidates (for huge |a| arctan returns pi/2 throughout).
template <class Program>
void seed_best(const Program& program, RefFunction ref, Ordinal lo, Ordinal hi, SharedBest& shared) {
  constexpr Ordinal kSamples = Ordinal{1} << 22;
  const Ordinal stride = (hi - lo) / kSamples;
  if (stride < 2) return;
  double best = -1.0;
  for (Ordinal n = lo; n <= hi; n += stride) {
    const F32 a = from_ordinal(n);
    const float y = program(a.value());
    if (std::isfinite(y)) best = std::max(best, screened_error(ref_double(ref, static_cast<double>(a.value())), y));
  }
  shared.raise(best);
}

// Certified three-way comparison of two ulp errors; exact ties (e.g. a and
// -a of an odd program) compare equal.
int compare_errors(RefFunction ref, F32 a1, F32 y1, F32 a2, F32 y2) {
  for (long p = kReportPrecision;; p = std::min(2 * p, kMaxPrecision)) {
    const auto e1 = ulp_error(ref, a1, y1, p);
    const auto e2 = ulp_error(ref, a2, y2, p);
    if (e1.lo > e2.hi) return 1;
    if (e2.lo > e1.hi) return -1;
    if (e1.lo == e2.lo && e1.hi == e2.hi) return 0;
    if (p >= kMaxPrecision) return 0;
  }
}

int resolve_threads(const ScanOptions& options) {
  return options.threads > 0 ? options.threads : omp_get_max_threads();
}

template <class Program>
VerifyReport run_max_scan(const Program& program, RefFunction ref, Ordinal lo, Ordinal hi,
                          const ScanOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  Threshold thr{options.threshold, options.threshold ? options.threshold->get_d() : 0.0};
  std::vector<ScanPartial> parts;
  SharedBest shared;
  seed_best(program, ref, lo, hi, shared);
  if (!options.parallel) {
    parts.resize(1);
    scan_range(program, ref, lo, hi, thr, parts[0], shared);
  } else {
    const Ordinal chunk = std::max<Ordinal>(options.chunk, 1);
    const Ordinal count = (hi - lo + chunk) / chunk;
    parts.resize(static_cast<std::size_t>(count));
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1) num_threads(resolve_threads(options))
    for (Ordinal c = 0; c < count; ++c) {
      try {
        const Ordinal clo = lo + c * chunk;
        scan_range(program, ref, clo, std::min(hi, clo + chunk - 1), thr, parts[static_cast<std::size_t>(c)], shared);
      } catch (...) {
#pragma omp critical(hornerfit_scan_error)
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
  }

  VerifyReport report;
  double best_est = shared.load();
  for (const auto& p : parts) {
    best_est = std::max(best_est, p.best_est);
    report.scanned += p.scanned;
    report.violations_found += p.violations;
    report.certified_checks += p.certified;
    report.non_finite += p.non_finite;
    for (Ordinal u : p.undecided) report.undecided.push_back(from_ordinal(u));
    if (p.first_violation && !report.first_violation) report.first_violation = from_ordinal(*p.first_violation);
  }

  std::optional<Candidate> best;
  for (const auto& p : parts) {
    for (const auto& c : p.candidates) {
      if (c.est >= 0.0 && c.est < best_est - kScreenMargin) continue;
      ++report.certified_checks;
      if (!best) {
        best = c;
        continue;
      }
      const int cmp = compare_errors(ref, from_ordinal(c.ord), F32::from_float(c.y), from_ordinal(best->ord),
                                     F32::from_float(best->y));
      if (cmp > 0 || (cmp == 0 && c.ord < best->ord)) best = c;
    }
  }
  if (best) {
    report.argmax = from_ordinal(best->ord);
    report.argmax_output = F32::from_float(best->y);
    const auto e = ulp_error(ref, report.argmax, report.argmax_output, kReportPrecision);
    report.max_error_ulps = e.hi;
    report.max_error_lower = e.lo;
  }
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

template <class Program>
std::optional<Ordinal> first_rejected(const Program& program, const AcceptanceOracle& oracle, Ordinal lo,
                                      Ordinal hi) {
  for (Ordinal n = lo; n <= hi; ++n) {
    const F32 a = from_ordinal(n);
    const float y = program(a.value());
    if (!std::isfinite(y) || !oracle.accepts(a, F32::from_float(y))) return n;
  }
  return std::nullopt;
}

template <class Program>
std::optional<Ordinal> find_in_segment(const Program& program, const AcceptanceOracle& oracle, Ordinal lo,
                                       Ordinal hi, const ScanOptions& options) {
  if (lo > hi) return std::nullopt;
  if (!options.parallel) return first_rejected(program, oracle, lo, hi);
  const int threads = resolve_threads(options);
  const Ordinal chunk = std::max<Ordinal>(options.chunk, 1);
  const Ordinal per_round = static_cast<Ordinal>(threads) * 4;
  for (Ordinal base = lo; base <= hi; base += per_round * chunk) {
    std::vector<std::optional<Ordinal>> found(static_cast<std::size_t>(per_round));
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (Ordinal i = 0; i < per_round; ++i) {
      const Ordinal clo = base + i * chunk;
      if (clo > hi) continue;
      try {
        found[static_cast<std::size_t>(i)] = first_rejected(program, oracle, clo, std::min(hi, clo + chunk - 1));
      } catch (...) {
#pragma omp critical(hornerfit_scan_error)
        if (!error) error = std::current_exception();
      }
    }
    if (error) std::rethrow_exception(error);
    for (const auto& f : found) {
      if (f) return f;
    }
  }
  return std::nullopt;
}

void check_zero_symmetry(const CompiledProgram& program, const HornerSkeleton& skeleton, const F32Interval& domain) {
  if (skeleton.form() == SkeletonForm::plain) return;
  if (!(domain.lo.value() <= 0.0f && 0.0f <= domain.hi.value())) return;
  if (program(0.0f) != program(-0.0f)) throw std::logic_error("program differs between +0 and -0");
}

}  // namespace

VerifyReport max_ulp_error(const HornerSkeleton& skeleton, const std::vector<F32>& coeffs, RefFunction reference,
                           const F32Interval& domain, const ScanOptions& options) {
  const CompiledProgram program(skeleton, coeffs);
  check_zero_symmetry(program, skeleton, domain);
  return run_max_scan(program, reference, ordinal(domain.lo), ordinal(domain.hi), options);
}

VerifyReport full_range_error(const HornerSkeleton& skeleton, const std::vector<F32>& coeffs,
                              const ScanOptions& options) {
  return full_range_error(skeleton, coeffs, kAllFinite, options);
}

VerifyReport full_range_error(const HornerSkeleton& skeleton, const std::vector<F32>& coeffs,
                              const F32Interval& inputs, const ScanOptions& options) {
  const CompiledProgram poly(skeleton, coeffs);
  auto program = [&poly](float a) { return juffa_atanf(poly, a); };
  return run_max_scan(program, RefFunction::atan, ordinal(inputs.lo), ordinal(inputs.hi), options);
}

std::optional<F32> first_violation(const HornerSkeleton& skeleton, const std::vector<F32>& coeffs,
                                   const AcceptanceOracle& oracle, const F32Interval& domain, Ordinal start,
                                   const ScanOptions& options) {
  const CompiledProgram program(skeleton, coeffs);
  const Ordinal lo = ordinal(domain.lo);
  const Ordinal hi = ordinal(domain.hi);
  if (start < lo || start > hi) start = lo;
  if (auto n = find_in_segment(program, oracle, start, hi, options)) return from_ordinal(*n);
  if (auto n = find_in_segment(program, oracle, lo, start - 1, options)) return from_ordinal(*n);
  return std::nullopt;
}

std::string format_report(const VerifyReport& r) {
  std::ostringstream os;
  os << "max_error_ulps = " << exact_string(r.max_error_ulps) << '\n';
  os << "max_error_ulps_approx = " << approx_string(r.max_error_ulps, 12) << '\n';
  os << "max_error_lower = " << exact_string(r.max_error_lower) << '\n';
  os << "argmax = " << to_hex(r.argmax) << '\n';
  os << "argmax_output = " << to_hex(r.argmax_output) << '\n';
  os << "violations = " << r.violations_found << '\n';
  os << "first_violation = " << (r.first_violation ? to_hex(*r.first_violation) : std::string("none")) << '\n';
  os << "scanned = " << r.scanned << '\n';
  os << "non_finite = " << r.non_finite << '\n';
  os << "undecided =";
  for (F32 u : r.undecided) os << ' ' << to_hex(u);
  os << '\n';
  return os.str();
}

}  // namespace hornerfit
