#pragma once

#include <string>
#include <vector>

#include "hornerfit/program.hpp"

namespace hornerfit {

/// C99 source for the fully specified program: `float name(float a)` using
/// fmaf and hexfloat literals.
std::string emit_c99(const HornerSkeleton& skeleton, const std::vector<F32>& coeffs, const std::string& name);

/// The reduced-argument arctan wrapper calling `poly_name`.
std::string emit_juffa_wrapper(const std::string& poly_name, const std::string& name = "juffa_atanf");

}  // namespace hornerfit
