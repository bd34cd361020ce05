#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hornerfit/funcspec.hpp"
#include "hornerfit/program.hpp"

namespace hornerfit {

struct ScanOptions {
  /// When set, points with error >= threshold ulp count as violations.
  std::optional<BigRational> threshold;
  /// OpenMP chunked scan; false selects the serial reference loop.
  bool parallel = true;
  /// Worker cap; 0 leaves the OpenMP default.
  int threads = 0;
  Ordinal chunk = Ordinal{1} << 20;
};

struct VerifyReport {
  /// Certified enclosure [max_error_lower, max_error_ulps] of the largest
  /// ulp error, computed at kReportPrecision bits for the argmax.
  BigRational max_error_ulps;
  BigRational max_error_lower;
  F32 argmax;
  F32 argmax_output;
  std::uint64_t violations_found = 0;
  std::optional<F32> first_violation;
  std::uint64_t scanned = 0;
  std::uint64_t certified_checks = 0;
  std::uint64_t non_finite = 0;
  /// Abscissae the certified path could not decide at the precision ceiling.
  std::vector<F32> undecided;
  double wall_seconds = 0;

  bool clean() const { return violations_found == 0 && non_finite == 0 && undecided.empty(); }
};

constexpr long kReportPrecision = 128;

/// Exhaustive ulp-error measurement of the program over every binary32 in
/// `domain` (both zeros and subnormals included). Ties for the maximum go
/// to the smallest ordinal.
VerifyReport max_ulp_error(const HornerSkeleton& skeleton, const std::vector<F32>& coeffs, RefFunction reference,
                           const F32Interval& domain, const ScanOptions& options = {});

/// Same measurement for the reduced-argument arctan program wrapped around
/// the skeleton, over every finite binary32 input.
VerifyReport full_range_error(const HornerSkeleton& skeleton, const std::vector<F32>& coeffs,
                              const ScanOptions& options = {});
VerifyReport full_range_error(const HornerSkeleton& skeleton, const std::vector<F32>& coeffs,
                              const F32Interval& inputs, const ScanOptions& options = {});

/// Smallest-ordinal a >= start (wrapping around the domain) whose program
/// output the oracle rejects.
std::optional<F32> first_violation(const HornerSkeleton& skeleton, const std::vector<F32>& coeffs,
                                   const AcceptanceOracle& oracle, const F32Interval& domain, Ordinal start,
                                   const ScanOptions& options = {});

/// Structured text of the run-independent fields; the certified-check count
/// and wall time depend on scheduling and are left out.
std::string format_report(const VerifyReport& report);

}  // namespace hornerfit
