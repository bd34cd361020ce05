#include "hornerfit/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <set>
#include <sstream>

namespace hornerfit {

namespace pt = boost::property_tree;

std::string to_string(Reconstruction r) { return r == Reconstruction::juffa ? "juffa" : "none"; }

Reconstruction parse_reconstruction(const std::string& text) {
  if (text == "none") return Reconstruction::none;
  if (text == "juffa") return Reconstruction::juffa;
  throw std::invalid_argument("unknown reconstruction: " + text);
}

std::string format_number(const BigRational& q) {
  try {
    const F32 f = round_to_f32(q);
    if (rational_of_f32(f) == q) return to_hex(f);
  } catch (const std::out_of_range&) {
  }
  return exact_string(q);
}

namespace {

std::vector<std::string> words(const std::string& text) {
  std::istringstream is(text);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : " ") + s;
  return out;
}

// Rationals in config files: hexfloat, integer, p/q or plain decimal.
BigRational number(const std::string& text, const std::string& key) {
  try {
    return parse_rational(text);
  } catch (const std::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

F32 hexfloat(const std::string& text, const std::string& key) {
  try {
    return parse_hexfloat(text);
  } catch (const std::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

std::pair<BigRational, BigRational> number_pair(const std::string& text, const std::string& key) {
  const auto w = words(text);
  if (w.size() != 2) throw ConfigError(key + ": expected two numbers");
  auto lo = number(w[0], key);
  auto hi = number(w[1], key);
  if (lo > hi) throw ConfigError(key + ": empty interval");
  return {lo, hi};
}

template <class T>
T integer(const std::string& text, const std::string& key) {
  std::istringstream is(text);
  T v{};
  char extra;
  if (!(is >> v) || (is >> extra)) throw ConfigError(key + ": expected an integer");
  return v;
}

template <class Parse>
auto enum_value(const std::string& text, const std::string& key, Parse parse) {
  try {
    return parse(text);
  } catch (const std::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

void check_keys(const pt::ptree& section, const std::string& name, const std::set<std::string>& allowed,
                const std::string& prefix = "") {
  for (const auto& [key, _] : section) {
    if (allowed.count(key) == 0 && (prefix.empty() || key.rfind(prefix, 0) != 0)) {
      throw ConfigError("unknown key [" + name + "] " + key);
    }
  }
}

}  // namespace

JobConfig parse_job(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  for (const auto& [name, _] : tree) {
    if (name != "program" && name != "target" && name != "coefficients" && name != "synth" && name != "output") {
      throw ConfigError("unknown section [" + name + "]");
    }
  }
  JobConfig job;
  const pt::ptree empty;

  const auto& prog = tree.get_child("program", empty);
  check_keys(prog, "program", {"form", "coefficients", "fixing_order", "box"}, "box.");
  if (auto v = prog.get_optional<std::string>("form")) {
    job.program.form = enum_value(*v, "form", parse_form);
  }
  job.program.labels = words(prog.get<std::string>("coefficients", ""));
  if (job.program.labels.empty()) throw ConfigError("[program] coefficients is required");
  job.program.fixing_order = words(prog.get<std::string>("fixing_order", ""));
  if (auto v = prog.get_optional<std::string>("box")) {
    std::tie(job.program.box_lo, job.program.box_hi) = number_pair(*v, "box");
  }
  for (const auto& [key, value] : prog) {
    if (key.rfind("box.", 0) == 0) job.program.boxes[key.substr(4)] = number_pair(value.data(), key);
  }

  const auto& target = tree.get_child("target", empty);
  check_keys(target, "target", {"function", "ulps", "domain", "reconstruction", "name"});
  if (auto v = target.get_optional<std::string>("function")) {
    job.target.function = enum_value(*v, "function", parse_ref_function);
  }
  if (auto v = target.get_optional<std::string>("ulps")) job.target.ulps = number(*v, "ulps");
  if (job.target.ulps <= 0) throw ConfigError("ulps must be positive");
  if (auto v = target.get_optional<std::string>("domain")) {
    const auto w = words(*v);
    if (w.size() != 2) throw ConfigError("domain: expected two hexfloats");
    job.target.domain = {hexfloat(w[0], "domain"), hexfloat(w[1], "domain")};
    if (value_less(job.target.domain.hi, job.target.domain.lo)) throw ConfigError("domain: empty interval");
  }
  if (auto v = target.get_optional<std::string>("reconstruction")) {
    job.target.reconstruction = enum_value(*v, "reconstruction", parse_reconstruction);
  }
  job.target.name = target.get<std::string>("name", "");

  for (const auto& [key, value] : tree.get_child("coefficients", empty)) {
    job.program.fixed[key] = hexfloat(value.data(), key);
  }

  const auto& synth = tree.get_child("synth", empty);
  check_keys(synth, "synth",
             {"seed", "branching", "sample_rule", "outer_iteration_limit", "inner_restart_limit", "node_limit",
              "test_points"});
  SynthConfig& sc = job.synth;
  if (auto v = synth.get_optional<std::string>("seed")) sc.rng_seed = integer<std::uint64_t>(*v, "seed");
  if (auto v = synth.get_optional<std::string>("branching")) sc.branching = integer<int>(*v, "branching");
  if (auto v = synth.get_optional<std::string>("sample_rule")) {
    sc.sample_rule = enum_value(*v, "sample_rule", parse_sample_rule);
  }
  if (auto v = synth.get_optional<std::string>("outer_iteration_limit")) {
    sc.outer_iteration_limit = integer<int>(*v, "outer_iteration_limit");
  }
  if (auto v = synth.get_optional<std::string>("inner_restart_limit")) {
    sc.inner_restart_limit = integer<int>(*v, "inner_restart_limit");
  }
  if (auto v = synth.get_optional<std::string>("node_limit")) sc.node_limit = integer<int>(*v, "node_limit");
  for (const auto& w : words(synth.get<std::string>("test_points", ""))) {
    sc.initial_test_points.push_back(hexfloat(w, "test_points"));
  }
  if (sc.branching < 1 || sc.outer_iteration_limit < 1 || sc.inner_restart_limit < 1 || sc.node_limit < 1) {
    throw ConfigError("[synth] limits must be positive");
  }
  sc.fixing_order = job.program.fixing_order;

  const auto& out = tree.get_child("output", empty);
  check_keys(out, "output", {"coefficients", "report", "source"});
  job.output.coefficients = out.get<std::string>("coefficients", "");
  job.output.report = out.get<std::string>("report", "");
  job.output.source = out.get<std::string>("source", "");

  // Cross-checks.
  try {
    const HornerSkeleton skel = job.skeleton();
    for (const auto& [label, _] : job.program.boxes) skel.index_of(label);
    for (const auto& [label, _] : job.program.fixed) skel.index_of(label);
    if (!job.program.fixing_order.empty()) {
      std::set<std::string> seen(job.program.fixing_order.begin(), job.program.fixing_order.end());
      if (seen.size() != job.program.labels.size() || job.program.fixing_order.size() != seen.size()) {
        throw ConfigError("fixing_order must list every coefficient once");
      }
      for (const auto& l : seen) skel.index_of(l);
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (job.target.reconstruction == Reconstruction::juffa && job.target.function != RefFunction::atan) {
    throw ConfigError("juffa reconstruction requires function = atan");
  }
  return job;
}

JobConfig parse_job_text(const std::string& text) {
  std::istringstream is(text);
  return parse_job(is);
}

JobConfig load_job(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return parse_job(in);
}

std::string format_job(const JobConfig& job) {
  pt::ptree tree;
  pt::ptree prog;
  prog.put("form", to_string(job.program.form));
  prog.put("coefficients", join(job.program.labels));
  if (!job.program.fixing_order.empty()) prog.put("fixing_order", join(job.program.fixing_order));
  prog.put("box", format_number(job.program.box_lo) + " " + format_number(job.program.box_hi));
  for (const auto& [label, box] : job.program.boxes) {
    prog.push_back({"box." + label, pt::ptree(format_number(box.first) + " " + format_number(box.second))});
  }
  tree.add_child("program", prog);

  pt::ptree target;
  target.put("function", to_string(job.target.function));
  target.put("ulps", exact_string(job.target.ulps));
  target.put("domain", to_hex(job.target.domain.lo) + " " + to_hex(job.target.domain.hi));
  target.put("reconstruction", to_string(job.target.reconstruction));
  if (!job.target.name.empty()) target.put("name", job.target.name);
  tree.add_child("target", target);

  if (!job.program.fixed.empty()) {
    pt::ptree fixed;
    for (const auto& [label, v] : job.program.fixed) fixed.push_back({label, pt::ptree(to_hex(v))});
    tree.add_child("coefficients", fixed);
  }

  pt::ptree synth;
  const SynthConfig& sc = job.synth;
  synth.put("seed", sc.rng_seed);
  synth.put("branching", sc.branching);
  synth.put("sample_rule", to_string(sc.sample_rule));
  synth.put("outer_iteration_limit", sc.outer_iteration_limit);
  synth.put("inner_restart_limit", sc.inner_restart_limit);
  synth.put("node_limit", sc.node_limit);
  if (!sc.initial_test_points.empty()) {
    std::vector<std::string> pts;
    for (F32 p : sc.initial_test_points) pts.push_back(to_hex(p));
    synth.put("test_points", join(pts));
  }
  tree.add_child("synth", synth);

  if (!job.output.coefficients.empty() || !job.output.report.empty() || !job.output.source.empty()) {
    pt::ptree out;
    if (!job.output.coefficients.empty()) out.put("coefficients", job.output.coefficients);
    if (!job.output.report.empty()) out.put("report", job.output.report);
    if (!job.output.source.empty()) out.put("source", job.output.source);
    tree.add_child("output", out);
  }
  std::ostringstream os;
  pt::write_ini(os, tree);
  return os.str();
}

HornerSkeleton JobConfig::skeleton() const { return HornerSkeleton(program.form, program.labels); }

CoefficientAssignment JobConfig::assignment() const {
  const HornerSkeleton skel = skeleton();
  CoefficientAssignment a(skel.coefficient_count(), program.box_lo, program.box_hi);
  for (const auto& [label, box] : program.boxes) a.set_box(skel.index_of(label), box.first, box.second);
  for (const auto& [label, v] : program.fixed) a.fix(skel.index_of(label), v);
  return a;
}

std::unique_ptr<AcceptanceOracle> JobConfig::oracle() const {
  if (target.reconstruction == Reconstruction::juffa) return std::make_unique<JuffaOracle>(target.ulps);
  return std::make_unique<UlpOracle>(target.function, target.ulps, target.domain);
}

F32Interval JobConfig::effective_domain() const { return oracle()->domain(); }

std::string JobConfig::function_name() const {
  return target.name.empty() ? to_string(target.function) + "_poly" : target.name;
}

std::vector<F32> parse_coefficients(std::istream& in, const HornerSkeleton& skeleton) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  std::vector<std::optional<F32>> slots(skeleton.coefficient_count());
  for (const auto& [key, value] : tree) {
    if (!value.empty()) throw ConfigError("coefficient file: unexpected section [" + key + "]");
    std::size_t i;
    try {
      i = skeleton.index_of(key);
    } catch (const std::exception&) {
      throw ConfigError("coefficient file: unknown label " + key);
    }
    slots[i] = hexfloat(value.data(), key);
  }
  std::vector<F32> out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i]) throw ConfigError("coefficient file: missing " + skeleton.labels()[i]);
    out.push_back(*slots[i]);
  }
  return out;
}

std::vector<F32> load_coefficients(const std::string& path, const HornerSkeleton& skeleton) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  return parse_coefficients(in, skeleton);
}

std::string format_coefficients(const HornerSkeleton& skeleton, const std::vector<F32>& values) {
  std::ostringstream os;
  for (std::size_t i = 0; i < values.size(); ++i) os << skeleton.labels()[i] << " = " << to_hex(values[i]) << '\n';
  return os.str();
}

}  // namespace hornerfit
