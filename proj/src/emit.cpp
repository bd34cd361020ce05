#include "hornerfit/emit.hpp"

#include "hornerfit/funcspec.hpp"

#include <sstream>
#include <stdexcept>

namespace hornerfit {

std::string emit_c99(const HornerSkeleton& skeleton, const std::vector<F32>& coeffs, const std::string& name) {
  if (coeffs.size() != skeleton.coefficient_count()) throw std::invalid_argument("coefficient count mismatch");
  std::ostringstream os;
  os << "float " << name << "(float a) {\n";
  if (skeleton.uses_square()) os << "  float s = a * a;\n";
  const char* m = skeleton.uses_square() ? "s" : "a";

  // Positive addends get a pad so the columns line up when signs are mixed.
  bool any_negative = false;
  for (std::size_t i = 1; i < coeffs.size(); ++i) any_negative |= coeffs[i].sign();
  auto literal = [&](F32 c) { return (any_negative && !c.sign() ? " " : "") + to_hex_literal(c); };

  if (skeleton.form() == SkeletonForm::plain && coeffs.size() == 1) {
    os << "  return " << to_hex_literal(coeffs[0]) << ";\n}\n";
    return os.str();
  }
  os << "  float r = " << to_hex_literal(coeffs[0]) << ";\n";
  for (std::size_t i = 1; i < coeffs.size(); ++i) os << "  r = fmaf(r, " << m << ", " << literal(coeffs[i]) << ");\n";
  switch (skeleton.form()) {
    case SkeletonForm::odd:
      os << "  r = r * s;\n  return fmaf(r, a, a);\n";
      break;
    case SkeletonForm::even_plus_one:
      os << "  return fmaf(r, s, 1.0f);\n";
      break;
    case SkeletonForm::plain:
      os << "  return r;\n";
      break;
  }
  os << "}\n";
  return os.str();
}

std::string emit_juffa_wrapper(const std::string& poly_name, const std::string& name) {
  std::ostringstream os;
  os << "float " << name << "(float a) {\n"
     << "  float r, t;\n"
     << "  t = fabsf(a);\n"
     << "  r = t;\n"
     << "  if (t > 1.0f) r = 1.0f / r;\n"
     << "  r = " << poly_name << "(r);\n"
     << "  if (t > 1.0f) r = fmaf(" << to_hex_literal(F32::from_float(kHalfPiHi)) << ", " << to_hex_literal(F32::from_float(kHalfPiLo)) << ", -r);\n"
     << "  r = copysignf(r, a);\n"
     << "  return r;\n"
     << "}\n";
  return os.str();
}

}  // namespace hornerfit
