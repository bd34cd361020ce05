#include "hornerfit/exactlp.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace hornerfit {

namespace {
constexpr std::size_t kRowsPerRound = 1;
}  // namespace

std::size_t LinearSystem::add_variable(std::string name, BigRational lo, BigRational hi) {
  variables.push_back(std::move(name));
  boxes.push_back({std::move(lo), std::move(hi)});
  for (auto& row : rows) row.coeffs.emplace_back(0);
  return variables.size() - 1;
}

std::size_t LinearSystem::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < variables.size(); ++i) {
    if (variables[i] == name) return i;
  }
  throw std::invalid_argument("unknown LP variable: " + name);
}

void LinearSystem::validate() const {
  if (boxes.size() != variables.size()) throw std::invalid_argument("LP: one box per variable required");
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (boxes[i].lo > boxes[i].hi) throw std::invalid_argument("LP: inverted box for " + variables[i]);
  }
  for (const auto& row : rows) {
    if (row.coeffs.size() != variables.size()) throw std::invalid_argument("LP: row width mismatch");
  }
}

bool LinearSystem::satisfied_by(const std::vector<BigRational>& x) const {
  if (x.size() != variables.size()) return false;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < boxes[i].lo || x[i] > boxes[i].hi) return false;
  }
  for (const auto& row : rows) {
    BigRational act = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (row.coeffs[i] != 0) act += row.coeffs[i] * x[i];
    }
    if (row.lo && act < *row.lo) return false;
    if (row.hi && act > *row.hi) return false;
  }
  return true;
}

SimplexSolver::SimplexSolver(const LinearSystem& system) : SimplexSolver(system, {}) {}

SimplexSolver::SimplexSolver(const LinearSystem& system, const std::vector<BigRational>& start) {
  system.validate();
  n_ = system.variables.size();
  rows_ = system.rows;
  const std::size_t total = n_ + rows_.size();
  position_.resize(total);
  is_basic_.assign(total, false);
  value_.assign(total, BigRational(0));
  bounds_.resize(total);

  for (std::size_t j = 0; j < n_; ++j) {
    nonbasic_.push_back(j);
    position_[j] = j;
    bounds_[j] = {system.boxes[j].lo, system.boxes[j].hi};
    value_[j] = system.boxes[j].lo;
    if (j < start.size()) {
      if (start[j] > system.boxes[j].hi) value_[j] = system.boxes[j].hi;
      else if (start[j] > system.boxes[j].lo) value_[j] = start[j];
    }
  }
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    bounds_[n_ + r] = {rows_[r].lo, rows_[r].hi};
    inactive_.push_back(r);
  }
}

void SimplexSolver::activate(std::size_t r) {
  const std::size_t v = n_ + r;
  std::vector<BigRational> t(n_, BigRational(0));
  BigRational act = 0;
  for (std::size_t j = 0; j < n_; ++j) {
    const BigRational& a = rows_[r].coeffs[j];
    if (a == 0) continue;
    act += a * value_[j];
    if (is_basic_[j]) {
      const auto& row = tableau_[position_[j]];
      for (std::size_t k = 0; k < n_; ++k) {
        if (row[k] != 0) t[k] += a * row[k];
      }
    } else {
      t[position_[j]] += a;
    }
  }
  value_[v] = act;
  basic_.push_back(v);
  position_[v] = m_;
  is_basic_[v] = true;
  tableau_.push_back(std::move(t));
  ++m_;
}

bool SimplexSolver::activate_violated() {
  // Only the worst few enter per round, so the tableau stays near the size of
  // an optimal basis instead of collecting every row at once.
  std::vector<std::pair<BigRational, std::size_t>> bad;
  for (std::size_t i = 0; i < inactive_.size(); ++i) {
    const LinearRow& row = rows_[inactive_[i]];
    BigRational act = 0;
    for (std::size_t j = 0; j < n_; ++j) {
      if (row.coeffs[j] != 0) act += row.coeffs[j] * value_[j];
    }
    if (row.lo && act < *row.lo) bad.emplace_back(*row.lo - act, i);
    else if (row.hi && act > *row.hi) bad.emplace_back(act - *row.hi, i);
  }
  if (bad.empty()) return false;
  const std::size_t take = std::min<std::size_t>(bad.size(), kRowsPerRound);
  std::partial_sort(bad.begin(), bad.begin() + static_cast<std::ptrdiff_t>(take), bad.end(),
                    [](const auto& x, const auto& y) { return x.first > y.first || (x.first == y.first && x.second < y.second); });
  std::vector<bool> chosen(inactive_.size(), false);
  for (std::size_t i = 0; i < take; ++i) chosen[bad[i].second] = true;
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < inactive_.size(); ++i) {
    if (chosen[i]) activate(inactive_[i]);
    else keep.push_back(inactive_[i]);
  }
  inactive_ = std::move(keep);
  feasible_known_ = false;
  return true;
}

void SimplexSolver::shift_nonbasic(std::size_t col, const BigRational& delta) {
  if (delta == 0) return;
  value_[nonbasic_[col]] += delta;
  for (std::size_t r = 0; r < m_; ++r) {
    if (tableau_[r][col] != 0) value_[basic_[r]] += tableau_[r][col] * delta;
  }
}

void SimplexSolver::pivot(std::size_t row, std::size_t col) {
  ++pivots_;
  auto& prow = tableau_[row];
  const BigRational inv = 1 / prow[col];
  for (std::size_t k = 0; k < n_; ++k) {
    if (k == col) continue;
    if (prow[k] != 0) prow[k] = -prow[k] * inv;
  }
  prow[col] = inv;
  for (std::size_t r = 0; r < m_; ++r) {
    if (r == row) continue;
    auto& trow = tableau_[r];
    if (trow[col] == 0) continue;
    const BigRational c = trow[col];
    for (std::size_t k = 0; k < n_; ++k) {
      if (k == col) continue;
      if (prow[k] != 0) trow[k] += c * prow[k];
    }
    trow[col] = c * inv;
  }
  const std::size_t leaving = basic_[row];
  const std::size_t entering = nonbasic_[col];
  basic_[row] = entering;
  nonbasic_[col] = leaving;
  position_[entering] = row;
  position_[leaving] = col;
  is_basic_[entering] = true;
  is_basic_[leaving] = false;
}

bool SimplexSolver::feasible() {
  if (feasible_known_) return true;
  do {
    if (!phase_one()) return false;
  } while (activate_violated());
  feasible_known_ = true;
  return true;
}

bool SimplexSolver::phase_one() {
  for (;;) {
    // Bland: the violated basic variable with the smallest index.
    std::size_t row = m_;
    std::size_t best_var = std::numeric_limits<std::size_t>::max();
    for (std::size_t r = 0; r < m_; ++r) {
      const std::size_t v = basic_[r];
      if (v < best_var && (below(v) || above(v))) {
        best_var = v;
        row = r;
      }
    }
    if (row == m_) return true;
    const bool raise = below(best_var);
    const BigRational target = raise ? *bounds_[best_var].lo : *bounds_[best_var].hi;

    std::size_t col = n_;
    std::size_t col_var = std::numeric_limits<std::size_t>::max();
    for (std::size_t k = 0; k < n_; ++k) {
      const BigRational& a = tableau_[row][k];
      if (a == 0) continue;
      const std::size_t v = nonbasic_[k];
      const bool ok = raise ? ((a > 0 && can_increase(v)) || (a < 0 && can_decrease(v)))
                            : ((a > 0 && can_decrease(v)) || (a < 0 && can_increase(v)));
      if (ok && v < col_var) {
        col_var = v;
        col = k;
      }
    }
    if (col == n_) return false;

    const BigRational theta = (target - value_[best_var]) / tableau_[row][col];
    shift_nonbasic(col, theta);
    value_[best_var] = target;
    pivot(row, col);
  }
}

LPOutcome SimplexSolver::optimize(std::size_t var, int sense) {
  if (var >= n_) throw std::out_of_range("LP objective variable out of range");
  LPOutcome out;
  if (!feasible()) {
    out.pivots = pivots_;
    return out;
  }
  std::vector<BigRational> cost(n_);
  for (;;) {
    if (!feasible()) {
      out.pivots = pivots_;
      return out;
    }
    // Reduced costs of sense * x_var over the nonbasic columns.
    if (is_basic_[var]) {
      const auto& row = tableau_[position_[var]];
      for (std::size_t k = 0; k < n_; ++k) cost[k] = sense > 0 ? row[k] : BigRational(-row[k]);
    } else {
      for (std::size_t k = 0; k < n_; ++k) cost[k] = 0;
      cost[position_[var]] = sense;
    }

    std::size_t col = n_;
    std::size_t col_var = std::numeric_limits<std::size_t>::max();
    int dir = 0;
    for (std::size_t k = 0; k < n_; ++k) {
      if (cost[k] == 0) continue;
      const std::size_t v = nonbasic_[k];
      if (v >= col_var) continue;
      if (cost[k] < 0 && can_increase(v)) {
        col = k, col_var = v, dir = 1;
      } else if (cost[k] > 0 && can_decrease(v)) {
        col = k, col_var = v, dir = -1;
      }
    }
    if (col == n_) {
      if (activate_violated()) continue;
      break;
    }

    // Ratio test; ties go to the smallest variable index.
    std::optional<BigRational> step;
    std::size_t leave_var = std::numeric_limits<std::size_t>::max();
    std::size_t leave_row = m_;  // m_ means a bound flip of the entering variable
    auto consider = [&](BigRational limit, std::size_t v, std::size_t r) {
      if (!step || limit < *step || (limit == *step && v < leave_var)) {
        step = std::move(limit);
        leave_var = v;
        leave_row = r;
      }
    };
    const auto& eb = bounds_[col_var];
    if (dir > 0 && eb.hi) consider(*eb.hi - value_[col_var], col_var, m_);
    if (dir < 0 && eb.lo) consider(value_[col_var] - *eb.lo, col_var, m_);
    for (std::size_t r = 0; r < m_; ++r) {
      const BigRational& a = tableau_[r][col];
      if (a == 0) continue;
      const std::size_t v = basic_[r];
      const bool rising = (a > 0) == (dir > 0);
      if (rising && bounds_[v].hi) {
        consider((*bounds_[v].hi - value_[v]) / abs(a), v, r);
      } else if (!rising && bounds_[v].lo) {
        consider((value_[v] - *bounds_[v].lo) / abs(a), v, r);
      }
    }
    if (!step) throw std::logic_error("LP unbounded despite finite boxes");

    shift_nonbasic(col, dir > 0 ? *step : BigRational(-*step));
    if (leave_row != m_) {
      const auto& lb = bounds_[leave_var];
      // Snap exactly onto the bound that stopped the step.
      const bool rising = (tableau_[leave_row][col] > 0) == (dir > 0);
      value_[leave_var] = rising ? *lb.hi : *lb.lo;
      pivot(leave_row, col);
    }
  }
  out.status = LPOutcome::Status::optimal;
  out.value = value_[var];
  out.witness = structural_values();
  out.pivots = pivots_;
  return out;
}

LPOutcome SimplexSolver::minimize(std::size_t var) { return optimize(var, 1); }
LPOutcome SimplexSolver::maximize(std::size_t var) { return optimize(var, -1); }

void SimplexSolver::fix_variable(std::size_t var, const BigRational& value) {
  bounds_[var].lo = value;
  bounds_[var].hi = value;
  if (!is_basic_[var]) shift_nonbasic(position_[var], value - value_[var]);
  feasible_known_ = false;
}

std::vector<BigRational> SimplexSolver::structural_values() const {
  return {value_.begin(), value_.begin() + static_cast<std::ptrdiff_t>(n_)};
}

LPOutcome minimize(const LinearSystem& system, std::size_t var) {
  SimplexSolver solver(system);
  return solver.minimize(var);
}

LPOutcome maximize(const LinearSystem& system, std::size_t var) {
  SimplexSolver solver(system);
  return solver.maximize(var);
}

LPOutcome check_feasible(const LinearSystem& system) {
  SimplexSolver solver(system);
  LPOutcome out;
  if (solver.feasible()) {
    out.status = LPOutcome::Status::optimal;
    out.witness = solver.structural_values();
  }
  out.pivots = solver.pivot_count();
  return out;
}

void write_system(std::ostream& out, const LinearSystem& system) {
  out << "variables";
  for (const auto& v : system.variables) out << ' ' << v;
  out << '\n';
  for (std::size_t i = 0; i < system.variables.size(); ++i) {
    out << "box " << system.variables[i] << ' ' << exact_string(system.boxes[i].lo) << ' '
        << exact_string(system.boxes[i].hi) << '\n';
  }
  for (const auto& row : system.rows) {
    out << "row";
    for (const auto& c : row.coeffs) out << ' ' << exact_string(c);
    out << " : " << (row.lo ? exact_string(*row.lo) : "-inf") << ' '
        << (row.hi ? exact_string(*row.hi) : "inf") << '\n';
  }
}

LinearSystem read_system(std::istream& in) {
  LinearSystem sys;
  std::string line;
  std::vector<std::pair<std::string, VariableBox>> pending_boxes;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind) || kind[0] == '#') continue;
    if (kind == "variables") {
      std::string name;
      while (ls >> name) {
        sys.variables.push_back(name);
        sys.boxes.push_back({0, 0});
      }
    } else if (kind == "box") {
      std::string name, lo, hi;
      if (!(ls >> name >> lo >> hi)) throw std::invalid_argument("bad box line: " + line);
      sys.boxes.at(sys.index_of(name)) = {parse_rational(lo), parse_rational(hi)};
    } else if (kind == "row") {
      LinearRow row;
      std::string tok;
      while (ls >> tok && tok != ":") row.coeffs.push_back(parse_rational(tok));
      std::string lo, hi;
      if (tok != ":" || !(ls >> lo >> hi)) throw std::invalid_argument("bad row line: " + line);
      if (lo != "-inf") row.lo = parse_rational(lo);
      if (hi != "inf") row.hi = parse_rational(hi);
      sys.rows.push_back(std::move(row));
    } else {
      throw std::invalid_argument("unknown LP dump line: " + line);
    }
  }
  sys.validate();
  return sys;
}

}  // namespace hornerfit
