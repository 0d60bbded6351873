#ifndef SEMISTATIC_EXACT_LP_HPP
#define SEMISTATIC_EXACT_LP_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "semistatic/rational.hpp"

namespace semistatic {

enum class Sense { Minimize, Maximize };
enum class Relation { LessEqual, Equal, GreaterEqual };
enum class SolveStatus { Optimal, Infeasible, Unbounded };

struct LinearTerm {
  int variable;
  Rational coefficient;
};

// Exact LP model.  Variables are free or lower-bounded; an upper bound is
// materialized as an ordinary <= row at add time, so certificates only ever
// involve lower bounds.
class LinearProgram {
 public:
  int add_variable(std::string name = {});  // free variable
  int add_variable(std::string name, std::optional<Rational> lower,
                   std::optional<Rational> upper = std::nullopt);
  void add_constraint(std::vector<LinearTerm> terms, Relation relation, Rational rhs,
                      std::string name = {});
  void set_objective(Sense sense, std::vector<LinearTerm> terms);

  int variable_count() const { return static_cast<int>(vars_.size()); }
  int constraint_count() const { return static_cast<int>(rows_.size()); }
  Sense sense() const { return sense_; }
  const std::optional<Rational>& lower_bound(int var) const { return vars_[var].lower; }
  const std::string& variable_name(int var) const { return vars_[var].name; }
  Relation relation(int row) const { return rows_[row].relation; }
  const Rational& rhs(int row) const { return rows_[row].rhs; }
  const std::vector<LinearTerm>& row_terms(int row) const { return rows_[row].terms; }
  const std::string& row_name(int row) const { return rows_[row].name; }
  const std::vector<LinearTerm>& objective_terms() const { return objective_; }

  RVector objective_vector() const;
  // Row activity a_i . x for all rows.
  RVector row_activity(const RVector& x) const;
  // c . x
  Rational objective_value(const RVector& x) const;
  // A^T y
  RVector transpose_product(const RVector& y) const;

 private:
  struct Variable {
    std::string name;
    std::optional<Rational> lower;
  };
  struct Row {
    std::vector<LinearTerm> terms;
    Relation relation;
    Rational rhs;
    std::string name;
  };
  std::vector<Variable> vars_;
  std::vector<Row> rows_;
  std::vector<LinearTerm> objective_;
  Sense sense_ = Sense::Minimize;
};

// Every status carries an exactly checkable certificate.
//
//   Optimal    primal x* and row multipliers y.  Conventions for Minimize:
//              >= rows have y >= 0, <= rows have y <= 0, = rows free; the
//              reduced cost z = c - A^T y vanishes on free variables and is
//              >= 0 on lower-bounded ones; c.x* = b.y + sum_j z_j l_j.
//              For Maximize the multipliers are reported for the stated
//              maximization row senses (>= rows y <= 0, <= rows y >= 0,
//              z <= 0 on lower-bounded variables).
//   Infeasible farkas multipliers y, sense-independent: same row sign rule as
//              minimization, z := -A^T y vanishes on free variables, z >= 0 on
//              lower-bounded ones, and b.y + sum_j z_j l_j > 0.
//   Unbounded  a feasible point in primal and an improving ray.
struct LPSolution {
  SolveStatus status = SolveStatus::Optimal;
  Rational objective;
  RVector primal;
  RVector dual;
  RVector farkas;
  RVector ray;
};

// Two-phase dense-tableau simplex with Bland's rule.  Deterministic; always
// terminates.  The returned certificate is verified internally before it is
// returned, so a false certificate throws std::logic_error instead of
// escaping.
LPSolution solve(const LinearProgram& lp);

// Exact certificate check, no tolerances.  Returns false on any violation.
bool verify_certificate(const LinearProgram& lp, const LPSolution& sol);

// Debug dump in an LP-format dialect with rational literals.
void write_lp(const LinearProgram& lp, std::ostream& out);

struct SolveStats {
  std::uint64_t solves = 0;
  std::uint64_t certified = 0;
};
SolveStats solve_stats();
void reset_solve_stats();

}  // namespace semistatic

#endif
