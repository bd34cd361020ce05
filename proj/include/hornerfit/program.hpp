#pragma once

#include <cstddef>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hornerfit/rational.hpp"
#include "hornerfit/softfp.hpp"

namespace hornerfit {

/// Supported straight-line shapes (c_top is the highest-degree coefficient):
///   odd:           s = a*a; r = c_top; r = fma(r, s, c)...; r = r*s; return fma(r, a, a)
///   even_plus_one: s = a*a; r = c_top; r = fma(r, s, c)...; return fma(r, s, 1)
///   plain:         r = c_top; r = fma(r, a, c)...; return r
enum class SkeletonForm { odd, even_plus_one, plain };

std::string to_string(SkeletonForm form);
SkeletonForm parse_form(const std::string& text);

/// One fma stage acc' = fma(acc, multiplier, addend).
struct Stage {
  enum class Multiplier { square, abscissa };
  enum class Addend { coefficient, zero, abscissa, one };
  Multiplier multiplier;
  Addend addend;
  std::size_t coefficient = 0;  // when addend == coefficient
};

class HornerSkeleton {
 public:
  /// `labels` runs from the highest-degree coefficient to the lowest.
  HornerSkeleton(SkeletonForm form, std::vector<std::string> labels);

  SkeletonForm form() const { return form_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t coefficient_count() const { return labels_.size(); }
  std::size_t index_of(const std::string& label) const;
  /// Stages after the initial load of labels()[0].
  const std::vector<Stage>& stages() const { return stages_; }
  bool uses_square() const { return form_ != SkeletonForm::plain; }
  /// Name of the value produced by stage i: r_k counting down to r1 at the output.
  std::string stage_name(std::size_t i) const;

 private:
  SkeletonForm form_;
  std::vector<std::string> labels_;
  std::vector<Stage> stages_;
};

/// Per-coefficient state during synthesis: either fixed to a binary32 or
/// free inside a finite rational box.
struct CoefficientSlot {
  std::optional<F32> fixed;
  BigRational lo;
  BigRational hi;

  BigRational lower() const { return fixed ? rational_of_f32(*fixed) : lo; }
  BigRational upper() const { return fixed ? rational_of_f32(*fixed) : hi; }
};

class CoefficientAssignment {
 public:
  CoefficientAssignment() = default;
  /// Every coefficient free in [lo, hi].
  CoefficientAssignment(std::size_t count, const BigRational& lo, const BigRational& hi);
  static CoefficientAssignment all_fixed(const std::vector<F32>& values);

  std::size_t size() const { return slots_.size(); }
  const CoefficientSlot& operator[](std::size_t i) const { return slots_.at(i); }
  void set_box(std::size_t i, BigRational lo, BigRational hi);
  void fix(std::size_t i, F32 value);
  void unfix(std::size_t i);
  bool is_fixed(std::size_t i) const { return slots_.at(i).fixed.has_value(); }
  bool all_fixed() const;
  /// Requires all_fixed().
  std::vector<F32> fixed_values() const;

 private:
  std::vector<CoefficientSlot> slots_;
};

struct TraceEntry {
  std::string stage;
  F32 value;
};
using EvalTrace = std::vector<TraceEntry>;

struct EvalResult {
  F32 result;
  EvalTrace trace;
};

/// Bit-exact binary32 run of the program. Throws EvaluationError on overflow.
EvalResult eval_f32(const HornerSkeleton& skeleton, const std::vector<F32>& coeffs, F32 a);
/// Hexfloat dump of a trace, one stage per line.
std::string format_trace(const EvalTrace& trace);

/// Exact Horner value with the machine square s = f32_mul(a, a) and exact
/// arithmetic afterwards.
BigRational eval_exact(const HornerSkeleton& skeleton, const std::vector<BigRational>& coeffs, F32 a);

/// The exact accumulator after `stage_count` stages as an affine function of
/// the coefficients: constant + sum gradient[i] * c_i.
struct AffineRow {
  std::vector<BigRational> gradient;
  BigRational constant;

  BigRational evaluate(const std::vector<BigRational>& coeffs) const;
};

AffineRow coefficient_row(const HornerSkeleton& skeleton, F32 a);
AffineRow coefficient_row(const HornerSkeleton& skeleton, F32 a, std::size_t stage_count);

/// Forward roundoff analysis over the coefficient boxes. For stage i:
///   magnitude[i] >= |acc_in * m + addend| for every in-box choice,
///   deviation[i] >= |computed acc_i - exact acc_i|,
/// with deviation[i] = ulp(magnitude[i]) / 2 + |m| * deviation[i-1].
/// Index 0 is the initial coefficient load (no rounding).
struct ErrorBudget {
  std::vector<BigRational> magnitude;
  std::vector<BigRational> deviation;
  BigRational delta_lo;
  BigRational delta_hi;
};

ErrorBudget forward_error_bounds(const HornerSkeleton& skeleton, const CoefficientAssignment& coeffs, F32 a);
ErrorBudget forward_error_bounds(const HornerSkeleton& skeleton, const CoefficientAssignment& coeffs, F32 a,
                                 std::size_t stage_count);

/// Number of stages up to and including the last one whose addend is a free
/// coefficient (0 if only the initial load can be free). Everything after it
/// is fully determined once a is known.
std::size_t propagation_cut(const HornerSkeleton& skeleton, const CoefficientAssignment& coeffs);

/// Exact interval of binary32 values for the accumulator at
/// propagation_cut() such that the determined tail lands in `acceptable`.
std::optional<F32Interval> backward_propagate(const HornerSkeleton& skeleton, const CoefficientAssignment& coeffs,
                                              F32 a, const F32Interval& acceptable);

/// Flattened program for the scan kernels: no traces, no overflow checks.
class CompiledProgram {
 public:
  CompiledProgram(const HornerSkeleton& skeleton, const std::vector<F32>& coeffs);

  float operator()(float a) const {
    if (tiny_shortcut_ && std::fabs(a) < 0x1p-60f && a != 0.0f) return form_ == SkeletonForm::odd ? a : 1.0f;
    const float s = a * a;
    const float m = form_ == SkeletonForm::plain ? a : s;
    float r = coeffs_[0];
    for (std::size_t i = 1; i < count_; ++i) r = raw_fma(r, m, coeffs_[i]);
    switch (form_) {
      case SkeletonForm::odd:
        r = r * s;
        return raw_fma(r, a, a);
      case SkeletonForm::even_plus_one:
        return raw_fma(r, s, 1.0f);
      case SkeletonForm::plain:
        return r;
    }
    return r;
  }

 private:
  SkeletonForm form_;
  std::size_t count_;
  bool tiny_shortcut_ = false;
  float coeffs_[32];
};

}  // namespace hornerfit
