#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hornerfit/funcspec.hpp"
#include "hornerfit/program.hpp"
#include "hornerfit/synth.hpp"

namespace hornerfit {

/// Malformed or inconsistent job description.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Reconstruction { none, juffa };

std::string to_string(Reconstruction r);
Reconstruction parse_reconstruction(const std::string& text);

struct ProgramSpec {
  SkeletonForm form = SkeletonForm::odd;
  /// Highest degree first, as in the Horner chain.
  std::vector<std::string> labels;
  std::vector<std::string> fixing_order;
  BigRational box_lo = -1;
  BigRational box_hi = 1;
  /// Per-label overrides of the default box.
  std::map<std::string, std::pair<BigRational, BigRational>> boxes;
  /// Coefficients fixed before synthesis starts.
  std::map<std::string, F32> fixed;
};

struct TargetSpec {
  RefFunction function = RefFunction::sin;
  BigRational ulps = 1;
  F32Interval domain{F32::from_float(-1.0f), F32::from_float(1.0f)};
  Reconstruction reconstruction = Reconstruction::none;
  /// Name of the emitted C function.
  std::string name;
};

struct OutputSpec {
  std::string coefficients;
  std::string report;
  std::string source;
};

struct JobConfig {
  ProgramSpec program;
  TargetSpec target;
  SynthConfig synth;
  OutputSpec output;

  HornerSkeleton skeleton() const;
  /// Boxes plus the pre-fixed coefficients.
  CoefficientAssignment assignment() const;
  std::unique_ptr<AcceptanceOracle> oracle() const;
  /// The domain the oracle actually covers ([0, 1] under juffa reconstruction).
  F32Interval effective_domain() const;
  std::string function_name() const;
};

/// Throws ConfigError.
JobConfig parse_job(std::istream& in);
JobConfig parse_job_text(const std::string& text);
JobConfig load_job(const std::string& path);
std::string format_job(const JobConfig& job);

/// Coefficient files hold one "label = hexfloat" line per coefficient.
/// Values come back in skeleton order; every label must be present.
std::vector<F32> parse_coefficients(std::istream& in, const HornerSkeleton& skeleton);
std::vector<F32> load_coefficients(const std::string& path, const HornerSkeleton& skeleton);
std::string format_coefficients(const HornerSkeleton& skeleton, const std::vector<F32>& values);

/// Hexfloat when the value is a binary32, otherwise an exact rational.
std::string format_number(const BigRational& q);

}  // namespace hornerfit
