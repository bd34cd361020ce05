#include "hornerfit/program.hpp"

#include <sstream>
#include <stdexcept>

namespace hornerfit {

std::string to_string(SkeletonForm form) {
  switch (form) {
    case SkeletonForm::odd: return "odd";
    case SkeletonForm::even_plus_one: return "even_plus_one";
    case SkeletonForm::plain: return "plain";
  }
  return "?";
}

SkeletonForm parse_form(const std::string& text) {
  if (text == "odd") return SkeletonForm::odd;
  if (text == "even_plus_one") return SkeletonForm::even_plus_one;
  if (text == "plain") return SkeletonForm::plain;
  throw std::invalid_argument("unknown skeleton form: " + text);
}

HornerSkeleton::HornerSkeleton(SkeletonForm form, std::vector<std::string> labels)
    : form_(form), labels_(std::move(labels)) {
  if (labels_.empty()) throw std::invalid_argument("skeleton needs at least one coefficient");
  if (labels_.size() > 32) throw std::invalid_argument("skeleton supports at most 32 coefficients");
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    for (std::size_t j = i + 1; j < labels_.size(); ++j) {
      if (labels_[i] == labels_[j]) throw std::invalid_argument("duplicate coefficient label " + labels_[i]);
    }
  }
  const auto mult = form_ == SkeletonForm::plain ? Stage::Multiplier::abscissa : Stage::Multiplier::square;
  for (std::size_t i = 1; i < labels_.size(); ++i) {
    stages_.push_back({mult, Stage::Addend::coefficient, i});
  }
  if (form_ == SkeletonForm::odd) {
    stages_.push_back({Stage::Multiplier::square, Stage::Addend::zero, 0});
    stages_.push_back({Stage::Multiplier::abscissa, Stage::Addend::abscissa, 0});
  } else if (form_ == SkeletonForm::even_plus_one) {
    stages_.push_back({Stage::Multiplier::square, Stage::Addend::one, 0});
  }
}

std::size_t HornerSkeleton::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return i;
  }
  throw std::invalid_argument("unknown coefficient label: " + label);
}

std::string HornerSkeleton::stage_name(std::size_t i) const {
  return "r" + std::to_string(stages_.size() - i);
}

CoefficientAssignment::CoefficientAssignment(std::size_t count, const BigRational& lo, const BigRational& hi)
    : slots_(count, CoefficientSlot{std::nullopt, lo, hi}) {
  if (lo > hi) throw std::invalid_argument("inverted coefficient box");
}

CoefficientAssignment CoefficientAssignment::all_fixed(const std::vector<F32>& values) {
  CoefficientAssignment out;
  for (F32 v : values) {
    const BigRational q = rational_of_f32(v);
    out.slots_.push_back({v, q, q});
  }
  return out;
}

void CoefficientAssignment::set_box(std::size_t i, BigRational lo, BigRational hi) {
  if (lo > hi) throw std::invalid_argument("inverted coefficient box");
  auto& slot = slots_.at(i);
  slot.lo = std::move(lo);
  slot.hi = std::move(hi);
}

void CoefficientAssignment::fix(std::size_t i, F32 value) {
  if (!value.is_finite()) throw std::invalid_argument("coefficients must be finite");
  slots_.at(i).fixed = value;
}

void CoefficientAssignment::unfix(std::size_t i) { slots_.at(i).fixed.reset(); }

bool CoefficientAssignment::all_fixed() const {
  for (const auto& s : slots_) {
    if (!s.fixed) return false;
  }
  return true;
}

std::vector<F32> CoefficientAssignment::fixed_values() const {
  std::vector<F32> out;
  for (const auto& s : slots_) {
    if (!s.fixed) throw std::logic_error("coefficient assignment is not fully fixed");
    out.push_back(*s.fixed);
  }
  return out;
}

namespace {

struct StageOperands {
  F32 multiplier;
  F32 addend;
};

StageOperands operands(const Stage& st, F32 a, F32 s, const std::vector<F32>* coeffs) {
  StageOperands op{st.multiplier == Stage::Multiplier::square ? s : a, F32{}};
  switch (st.addend) {
    case Stage::Addend::coefficient: op.addend = coeffs->at(st.coefficient); break;
    case Stage::Addend::zero: op.addend = F32::from_float(0.0f); break;
    case Stage::Addend::abscissa: op.addend = a; break;
    case Stage::Addend::one: op.addend = F32::from_float(1.0f); break;
  }
  return op;
}

BigRational exact_addend(const Stage& st, const BigRational& a, const std::vector<BigRational>* coeffs) {
  switch (st.addend) {
    case Stage::Addend::coefficient: return coeffs ? coeffs->at(st.coefficient) : BigRational(0);
    case Stage::Addend::zero: return 0;
    case Stage::Addend::abscissa: return a;
    case Stage::Addend::one: return 1;
  }
  return 0;
}

F32 machine_square(const HornerSkeleton& skeleton, F32 a) {
  return skeleton.uses_square() ? f32_mul(a, a) : F32::from_float(0.0f);
}

}  // namespace

EvalResult eval_f32(const HornerSkeleton& skeleton, const std::vector<F32>& coeffs, F32 a) {
  if (coeffs.size() != skeleton.coefficient_count()) throw std::invalid_argument("coefficient count mismatch");
  if (!a.is_finite()) throw EvaluationError("eval_f32: non-finite abscissa");
  EvalResult out;
  const F32 s = machine_square(skeleton, a);
  if (skeleton.uses_square()) out.trace.push_back({"s", s});
  F32 acc = coeffs[0];
  const auto& stages = skeleton.stages();
  for (std::size_t i = 0; i < stages.size(); ++i) {
    const auto op = operands(stages[i], a, s, &coeffs);
    // The zero-addend stage is the plain product r * s in the program text;
    // fma(r, s, +0) would differ from it in the sign of a zero result.
    acc = stages[i].addend == Stage::Addend::zero ? f32_mul(acc, op.multiplier)
                                                  : f32_fma(acc, op.multiplier, op.addend);
    out.trace.push_back({skeleton.stage_name(i), acc});
  }
  out.result = acc;
  return out;
}

std::string format_trace(const EvalTrace& trace) {
  std::ostringstream os;
  for (const auto& e : trace) os << e.stage << " = " << to_hex(e.value) << '\n';
  return os.str();
}

BigRational eval_exact(const HornerSkeleton& skeleton, const std::vector<BigRational>& coeffs, F32 a) {
  if (coeffs.size() != skeleton.coefficient_count()) throw std::invalid_argument("coefficient count mismatch");
  const BigRational ar = rational_of_f32(a);
  const BigRational s = rational_of_f32(machine_square(skeleton, a));
  BigRational acc = coeffs[0];
  for (const auto& st : skeleton.stages()) {
    const BigRational& m = st.multiplier == Stage::Multiplier::square ? s : ar;
    acc = acc * m + exact_addend(st, ar, &coeffs);
  }
  return acc;
}

BigRational AffineRow::evaluate(const std::vector<BigRational>& coeffs) const {
  BigRational v = constant;
  for (std::size_t i = 0; i < gradient.size(); ++i) v += gradient[i] * coeffs.at(i);
  return v;
}

AffineRow coefficient_row(const HornerSkeleton& skeleton, F32 a) {
  return coefficient_row(skeleton, a, skeleton.stages().size());
}

AffineRow coefficient_row(const HornerSkeleton& skeleton, F32 a, std::size_t stage_count) {
  const auto& stages = skeleton.stages();
  if (stage_count > stages.size()) throw std::out_of_range("coefficient_row: stage count");
  const BigRational ar = rational_of_f32(a);
  const BigRational s = rational_of_f32(machine_square(skeleton, a));
  AffineRow row{std::vector<BigRational>(skeleton.coefficient_count(), BigRational(0)), 0};
  row.gradient[0] = 1;
  for (std::size_t i = 0; i < stage_count; ++i) {
    const auto& st = stages[i];
    const BigRational& m = st.multiplier == Stage::Multiplier::square ? s : ar;
    for (auto& g : row.gradient) {
      if (g != 0) g *= m;
    }
    row.constant *= m;
    if (st.addend == Stage::Addend::coefficient) row.gradient[st.coefficient] += 1;
    else row.constant += exact_addend(st, ar, nullptr);
  }
  return row;
}

ErrorBudget forward_error_bounds(const HornerSkeleton& skeleton, const CoefficientAssignment& coeffs, F32 a) {
  return forward_error_bounds(skeleton, coeffs, a, skeleton.stages().size());
}

ErrorBudget forward_error_bounds(const HornerSkeleton& skeleton, const CoefficientAssignment& coeffs, F32 a,
                                 std::size_t stage_count) {
  const auto& stages = skeleton.stages();
  if (stage_count > stages.size()) throw std::out_of_range("forward_error_bounds: stage count");
  if (coeffs.size() != skeleton.coefficient_count()) throw std::invalid_argument("coefficient count mismatch");
  const BigRational ar = rational_of_f32(a);
  const BigRational s = rational_of_f32(machine_square(skeleton, a));
  const BigRational max_finite = rational_of_f32(kMaxFinite);

  // Exact interval of the accumulator over the boxes, tracked as an affine form.
  std::vector<BigRational> grad(skeleton.coefficient_count(), BigRational(0));
  grad[0] = 1;
  BigRational constant = 0;
  auto sup_abs = [&]() {
    BigRational lo = constant, hi = constant;
    for (std::size_t j = 0; j < grad.size(); ++j) {
      if (grad[j] == 0) continue;
      const BigRational p = grad[j] * coeffs[j].lower();
      const BigRational q = grad[j] * coeffs[j].upper();
      lo += p < q ? p : q;
      hi += p < q ? q : p;
    }
    const BigRational alo = abs(lo), ahi = abs(hi);
    return alo < ahi ? ahi : alo;
  };

  ErrorBudget budget;
  budget.magnitude.push_back(sup_abs());
  budget.deviation.push_back(0);
  for (std::size_t i = 0; i < stage_count; ++i) {
    const auto& st = stages[i];
    const BigRational& m = st.multiplier == Stage::Multiplier::square ? s : ar;
    for (auto& g : grad) {
      if (g != 0) g *= m;
    }
    constant *= m;
    if (st.addend == Stage::Addend::coefficient) grad[st.coefficient] += 1;
    else constant += exact_addend(st, ar, nullptr);

    const BigRational carried = abs(m) * budget.deviation.back();
    BigRational mag = sup_abs() + carried;
    if (mag >= max_finite) throw EvaluationError("forward_error_bounds: magnitude bound overflows binary32");
    BigRational dev = ulp_of_real(mag) / 2 + carried;
    budget.magnitude.push_back(std::move(mag));
    budget.deviation.push_back(std::move(dev));
  }
  budget.delta_hi = budget.deviation.back();
  budget.delta_lo = -budget.delta_hi;
  return budget;
}

std::size_t propagation_cut(const HornerSkeleton& skeleton, const CoefficientAssignment& coeffs) {
  const auto& stages = skeleton.stages();
  std::size_t cut = 0;
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (stages[i].addend == Stage::Addend::coefficient && !coeffs.is_fixed(stages[i].coefficient)) cut = i + 1;
  }
  return cut;
}

std::optional<F32Interval> backward_propagate(const HornerSkeleton& skeleton, const CoefficientAssignment& coeffs,
                                              F32 a, const F32Interval& acceptable) {
  const auto& stages = skeleton.stages();
  const std::size_t cut = propagation_cut(skeleton, coeffs);
  const F32 s = machine_square(skeleton, a);
  std::vector<F32> fixed(skeleton.coefficient_count());
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (coeffs.is_fixed(i)) fixed[i] = *coeffs[i].fixed;
  }
  std::optional<F32Interval> target = acceptable;
  for (std::size_t i = stages.size(); i > cut; --i) {
    const auto op = operands(stages[i - 1], a, s, &fixed);
    target = invert_fma_monotone(FmaOperand::first, op.multiplier, op.addend, *target);
    if (!target) return std::nullopt;
  }
  return target;
}

CompiledProgram::CompiledProgram(const HornerSkeleton& skeleton, const std::vector<F32>& coeffs)
    : form_(skeleton.form()), count_(coeffs.size()) {
  if (coeffs.size() != skeleton.coefficient_count()) throw std::invalid_argument("coefficient count mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < count_; ++i) {
    coeffs_[i] = coeffs[i].value();
    total += std::fabs(static_cast<double>(coeffs_[i]));
  }
  // For 0 < |a| < 2^-60 we have s <= 2^-120, so every accumulator stays below
  // 2^81 and the final correction is under 2^-35 relative: the result rounds to
  // a (odd) or to 1 (even_plus_one). Skipping the arithmetic there avoids
  // subnormal intermediates, which are very slow on x86.
  tiny_shortcut_ = form_ != SkeletonForm::plain && total <= 0x1p80;
}

}  // namespace hornerfit
