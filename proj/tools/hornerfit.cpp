// hornerfit: synthesize, verify, bound and emit Horner/FMA polynomial programs.

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "hornerfit/config.hpp"
#include "hornerfit/emit.hpp"
#include "hornerfit/synth.hpp"
#include "hornerfit/verify.hpp"

using namespace hornerfit;

namespace {

enum Exit { kOk = 0, kVerifyFailed = 1, kHeuristicFailed = 2, kConfigError = 3 };

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

ScanOptions scan_options(int threads) {
  ScanOptions o;
  o.threads = threads;
  return o;
}

// Exhaustive check of a finished program against the job's tolerance.
VerifyReport run_verify(const JobConfig& job, const std::vector<F32>& coeffs, int threads) {
  ScanOptions o = scan_options(threads);
  o.threshold = job.target.ulps;
  const HornerSkeleton skel = job.skeleton();
  if (job.target.reconstruction == Reconstruction::juffa) return full_range_error(skel, coeffs, o);
  return max_ulp_error(skel, coeffs, job.target.function, job.target.domain, o);
}

std::vector<F32> parse_point_list(const std::string& text) {
  std::vector<F32> out;
  std::istringstream is(text);
  for (std::string w; is >> w;) {
    if (w[0] == '#') {
      std::string rest;
      std::getline(is, rest);
      continue;
    }
    try {
      out.push_back(parse_hexfloat(w));
    } catch (const std::exception& e) {
      throw ConfigError("test point " + w + ": " + e.what());
    }
  }
  return out;
}

int cmd_synthesize(const JobConfig& job, std::string out_path, std::string report_path, int threads, bool quiet) {
  if (out_path.empty()) out_path = job.output.coefficients;
  if (report_path.empty()) report_path = job.output.report;
  const HornerSkeleton skel = job.skeleton();
  const auto oracle = job.oracle();
  SynthConfig cfg = job.synth;
  cfg.scan = scan_options(threads);
  const auto t0 = std::chrono::steady_clock::now();
  auto log = [&](const std::string& line) {
    if (quiet) return;
    const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "[" << std::fixed << std::setprecision(1) << t << "s] " << line << '\n';
  };
  const SynthResult result = synthesize(skel, job.assignment(), *oracle, cfg, log);

  std::ostringstream report;
  report << "job = " << oracle->describe() << '\n';
  report << "outer_iterations = " << result.stats.outer_iterations << '\n';
  report << "test_points = " << result.test_points.size() << '\n';
  report << "lp_solves = " << result.stats.lp_solves << '\n';
  report << "lp_pivots = " << result.stats.lp_pivots << '\n';
  report << "restarts = " << result.stats.restarts << '\n';
  if (!result.success) {
    report << "status = failed\nreason = " << result.failure << '\n';
    if (!report_path.empty()) write_text(report_path, report.str());
    std::cerr << "synthesis failed: " << result.failure << '\n';
    return kHeuristicFailed;
  }
  write_text(out_path, format_coefficients(skel, result.coefficients));
  if (!job.output.source.empty()) write_text(job.output.source, emit_c99(skel, result.coefficients, job.function_name()));

  log("verifying");
  const VerifyReport check = run_verify(job, result.coefficients, threads);
  report << "status = " << (check.violations_found == 0 && check.undecided.empty() ? "ok" : "verify-failed") << '\n';
  report << format_report(check);
  if (!report_path.empty()) write_text(report_path, report.str());
  else if (!quiet) std::cerr << report.str();
  return check.violations_found == 0 && check.undecided.empty() ? kOk : kVerifyFailed;
}

int cmd_verify(const JobConfig& job, const std::string& coeff_path, std::string report_path, int threads) {
  if (report_path.empty()) report_path = job.output.report;
  const HornerSkeleton skel = job.skeleton();
  const auto coeffs = load_coefficients(coeff_path, skel);
  const VerifyReport r = run_verify(job, coeffs, threads);
  write_text(report_path, format_report(r));
  std::cerr << "scanned " << r.scanned << " inputs in " << std::fixed << std::setprecision(1) << r.wall_seconds
            << "s, " << r.certified_checks << " certified checks\n";
  if (r.violations_found > 0) {
    std::cerr << "violation at " << to_hex(*r.first_violation) << '\n';
    return kVerifyFailed;
  }
  if (!r.undecided.empty()) {
    std::cerr << r.undecided.size() << " abscissae undecided at the precision ceiling\n";
    return kVerifyFailed;
  }
  return kOk;
}

int cmd_bounds(const JobConfig& job, const std::vector<F32>& points, const std::vector<std::string>& fixes) {
  const HornerSkeleton skel = job.skeleton();
  CoefficientAssignment coeffs = job.assignment();
  for (const auto& f : fixes) {
    const auto eq = f.find('=');
    if (eq == std::string::npos) throw ConfigError("--fix expects label=hexfloat");
    std::size_t i;
    try {
      i = skel.index_of(f.substr(0, eq));
    } catch (const std::exception& e) {
      throw ConfigError(e.what());
    }
    try {
      coeffs.fix(i, parse_hexfloat(f.substr(eq + 1)));
    } catch (const std::exception& e) {
      throw ConfigError(f + ": " + e.what());
    }
  }
  const auto oracle = job.oracle();
  const auto bounds = coefficient_bounds(skel, coeffs, *oracle, points);
  if (!bounds) {
    std::cout << "infeasible\n";
    return kOk;
  }
  for (const auto& b : *bounds) {
    std::cout << b.label << " lo = " << exact_string(b.lo) << " hi = " << exact_string(b.hi);
    // Outward hexfloat bracket of each bound.
    std::cout << " [" << to_hex(floor_f32(b.lo)) << ", " << to_hex(ceil_f32(b.lo)) << "] [" << to_hex(floor_f32(b.hi))
              << ", " << to_hex(ceil_f32(b.hi)) << "]\n";
  }
  return kOk;
}

int cmd_emit(const JobConfig& job, const std::string& coeff_path, std::string out_path) {
  if (out_path.empty()) out_path = job.output.source;
  const HornerSkeleton skel = job.skeleton();
  const auto coeffs = load_coefficients(coeff_path, skel);
  std::string src = "#include <math.h>\n\n" + emit_c99(skel, coeffs, job.function_name());
  if (job.target.reconstruction == Reconstruction::juffa) src += "\n" + emit_juffa_wrapper(job.function_name());
  write_text(out_path, src);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthesize and verify binary32 polynomial programs"};
  app.require_subcommand(1);
  app.fallthrough();
  int threads = 0;
  app.add_option("--threads", threads, "worker cap for exhaustive scans (0 = all)")->check(CLI::NonNegativeNumber);

  std::string config_path, coeff_path, out_path, report_path, points_text, points_file;
  std::vector<std::string> fixes;
  bool quiet = false;

  auto* syn = app.add_subcommand("synthesize", "search for coefficients, then verify them exhaustively");
  syn->add_option("config", config_path, "job file")->required();
  syn->add_option("-o,--out", out_path, "coefficient file (default from the job, else stdout)");
  syn->add_option("-r,--report", report_path, "run report file");
  syn->add_flag("-q,--quiet", quiet, "no progress log");

  auto* ver = app.add_subcommand("verify", "exhaustively check a coefficient file against the job");
  ver->add_option("config", config_path, "job file")->required();
  ver->add_option("coefficients", coeff_path, "coefficient file")->required();
  ver->add_option("-r,--report", report_path, "report file (default stdout)");

  auto* bnd = app.add_subcommand("bounds", "exact LP bounds on every coefficient over given test points");
  bnd->add_option("config", config_path, "job file")->required();
  bnd->add_option("-p,--points", points_text, "whitespace-separated hexfloat abscissae");
  bnd->add_option("--points-file", points_file, "file of hexfloat abscissae");
  bnd->add_option("--fix", fixes, "fix a coefficient first: label=hexfloat");

  auto* emt = app.add_subcommand("emit", "print C99 source for a coefficient file");
  emt->add_option("config", config_path, "job file")->required();
  emt->add_option("coefficients", coeff_path, "coefficient file")->required();
  emt->add_option("-o,--out", out_path, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    const JobConfig job = load_job(config_path);
    if (*syn) return cmd_synthesize(job, out_path, report_path, threads, quiet);
    if (*ver) return cmd_verify(job, coeff_path, report_path, threads);
    if (*bnd) {
      if (!points_file.empty()) {
        std::ifstream in(points_file);
        if (!in) throw ConfigError("cannot open " + points_file);
        points_text += "\n" + std::string(std::istreambuf_iterator<char>(in), {});
      }
      return cmd_bounds(job, parse_point_list(points_text), fixes);
    }
    if (*emt) return cmd_emit(job, coeff_path, out_path);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
  return kConfigError;
}
