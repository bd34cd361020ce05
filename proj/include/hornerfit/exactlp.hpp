#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hornerfit/rational.hpp"

namespace hornerfit {

/// lo <= coeffs . x <= hi, with either side possibly absent (infinite).
struct LinearRow {
  std::vector<BigRational> coeffs;
  std::optional<BigRational> lo;
  std::optional<BigRational> hi;
};

struct VariableBox {
  BigRational lo;
  BigRational hi;
};

/// Exact inequality system over a handful of variables, each confined to a
/// finite box.
struct LinearSystem {
  std::vector<std::string> variables;
  std::vector<VariableBox> boxes;
  std::vector<LinearRow> rows;

  std::size_t add_variable(std::string name, BigRational lo, BigRational hi);
  std::size_t index_of(const std::string& name) const;
  /// Throws std::invalid_argument on ragged rows or inverted boxes.
  void validate() const;
  /// Exact substitution check of every row and box.
  bool satisfied_by(const std::vector<BigRational>& x) const;
};

struct LPOutcome {
  enum class Status { infeasible, optimal };
  Status status = Status::infeasible;
  BigRational value;
  std::vector<BigRational> witness;
  std::size_t pivots = 0;

  bool feasible() const { return status == Status::optimal; }
};

/// Bounded-variable simplex on a dense tableau. Row activities are slack
/// variables w_r = a_r . x carrying the row bounds; structural variables
/// carry their boxes. Phase 1 repairs bound violations of basic variables,
/// phase 2 is a primal simplex on one variable; both use Bland's rule, so
/// every solve terminates.
///
/// A solver keeps its basis between calls: a maximize after a minimize, or a
/// solve after fix_variable, starts from the previous basis.
class SimplexSolver {
 public:
  explicit SimplexSolver(const LinearSystem& system);
  /// Starts the structural variables at `start` (clamped into their boxes)
  /// instead of at their lower bounds.
  SimplexSolver(const LinearSystem& system, const std::vector<BigRational>& start);

  bool feasible();
  LPOutcome minimize(std::size_t var);
  LPOutcome maximize(std::size_t var);
  /// Collapses the box of `var` to [value, value].
  void fix_variable(std::size_t var, const BigRational& value);

  std::vector<BigRational> structural_values() const;
  std::size_t pivot_count() const { return pivots_; }

 private:
  struct Bounds {
    std::optional<BigRational> lo;
    std::optional<BigRational> hi;
  };

  bool below(std::size_t v) const { return bounds_[v].lo && value_[v] < *bounds_[v].lo; }
  bool above(std::size_t v) const { return bounds_[v].hi && value_[v] > *bounds_[v].hi; }
  bool can_increase(std::size_t v) const { return !bounds_[v].hi || value_[v] < *bounds_[v].hi; }
  bool can_decrease(std::size_t v) const { return !bounds_[v].lo || value_[v] > *bounds_[v].lo; }

  void pivot(std::size_t row, std::size_t col);
  void shift_nonbasic(std::size_t col, const BigRational& delta);
  LPOutcome optimize(std::size_t var, int sense);
  bool phase_one();
  /// Moves rows violated at the current point into the tableau; false if
  /// every row already holds.
  bool activate_violated();
  void activate(std::size_t row);

  std::size_t n_ = 0;  // structural variables
  std::size_t m_ = 0;  // rows in the tableau
  // Rows enter the tableau only once the current point violates them; the
  // rest are checked exactly against their original coefficients.
  std::vector<LinearRow> rows_;
  std::vector<std::size_t> inactive_;
  std::vector<std::vector<BigRational>> tableau_;  // m_ x n_
  std::vector<std::size_t> basic_;                 // row position -> variable
  std::vector<std::size_t> nonbasic_;              // column position -> variable
  std::vector<std::size_t> position_;              // variable -> row or column
  std::vector<bool> is_basic_;
  std::vector<BigRational> value_;
  std::vector<Bounds> bounds_;
  std::size_t pivots_ = 0;
  bool feasible_known_ = false;
};

LPOutcome minimize(const LinearSystem& system, std::size_t var);
LPOutcome maximize(const LinearSystem& system, std::size_t var);
/// Phase-1 only: optimal status with a witness, or infeasible.
LPOutcome check_feasible(const LinearSystem& system);

/// Plain-text exact dump:
///   variables <name>...
///   box <name> <lo> <hi>
///   row <a_1> ... <a_n> : <lo|-inf> <hi|inf>
void write_system(std::ostream& out, const LinearSystem& system);
LinearSystem read_system(std::istream& in);

}  // namespace hornerfit
