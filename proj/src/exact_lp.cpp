#include "semistatic/exact_lp.hpp"

#include <atomic>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace semistatic {

namespace {

std::atomic<std::uint64_t> g_solves{0};
std::atomic<std::uint64_t> g_certified{0};

// Internal standard form: min cint.x, M x = b, x >= 0, b >= 0.
// Columns: one per lower-bounded model variable (value shifted by the bound),
// a positive/negative pair per free variable, a slack per inequality row and
// an artificial wherever no +1 identity column is available.  The column that
// started as the i-th identity vector always holds column i of the current
// basis inverse, which is where dual values come from.
struct Standardized {
  enum class Kind { Shifted, Positive, Negative, Slack, Artificial };
  struct Col {
    Kind kind;
    int ref;  // model variable for Shifted/Positive/Negative, row otherwise
  };

  std::vector<Col> cols;
  RMatrix t;  // (m+1) x (ncols+1): body rows, then reduced-cost row; last column is rhs
  std::vector<int> basis;
  std::vector<int> idcol;
  std::vector<Rational> flip;
  std::vector<int> varcol;  // model variable -> first internal column
  RVector cint;
  int m = 0;
  int ncols = 0;

  bool is_artificial(int col) const { return cols[col].kind == Kind::Artificial; }
};

Standardized standardize(const LinearProgram& lp) {
  const int n = lp.variable_count();
  const int m = lp.constraint_count();
  Standardized sf;
  sf.m = m;

  RMatrix a = RMatrix::Zero(m, n);
  RVector bshift(m);
  for (int i = 0; i < m; ++i) {
    for (const LinearTerm& term : lp.row_terms(i)) a(i, term.variable) += term.coefficient;
    bshift(i) = lp.rhs(i);
  }
  for (int j = 0; j < n; ++j) {
    if (lp.lower_bound(j)) bshift -= a.col(j) * *lp.lower_bound(j);
  }

  sf.varcol.resize(n);
  for (int j = 0; j < n; ++j) {
    sf.varcol[j] = static_cast<int>(sf.cols.size());
    if (lp.lower_bound(j)) {
      sf.cols.push_back({Standardized::Kind::Shifted, j});
    } else {
      sf.cols.push_back({Standardized::Kind::Positive, j});
      sf.cols.push_back({Standardized::Kind::Negative, j});
    }
  }
  std::vector<int> slackcol(m, -1);
  for (int i = 0; i < m; ++i) {
    if (lp.relation(i) != Relation::Equal) {
      slackcol[i] = static_cast<int>(sf.cols.size());
      sf.cols.push_back({Standardized::Kind::Slack, i});
    }
  }
  sf.flip.assign(m, Rational(1));
  sf.idcol.assign(m, -1);
  sf.basis.assign(m, -1);
  std::vector<int> artrow;
  for (int i = 0; i < m; ++i) {
    if (bshift(i) < 0) sf.flip[i] = -1;
    Rational slack_coeff = 0;
    if (lp.relation(i) == Relation::LessEqual) slack_coeff = sf.flip[i];
    if (lp.relation(i) == Relation::GreaterEqual) slack_coeff = -sf.flip[i];
    if (slack_coeff == 1) {
      sf.idcol[i] = slackcol[i];
      sf.basis[i] = slackcol[i];
    } else {
      sf.idcol[i] = static_cast<int>(sf.cols.size());
      sf.basis[i] = sf.idcol[i];
      sf.cols.push_back({Standardized::Kind::Artificial, i});
      artrow.push_back(i);
    }
  }

  sf.ncols = static_cast<int>(sf.cols.size());
  sf.t = RMatrix::Zero(m + 1, sf.ncols + 1);
  for (int c = 0; c < sf.ncols; ++c) {
    const Standardized::Col& col = sf.cols[c];
    switch (col.kind) {
      case Standardized::Kind::Shifted:
      case Standardized::Kind::Positive:
        for (int i = 0; i < m; ++i) {
          if (a(i, col.ref) != 0) sf.t(i, c) = sf.flip[i] * a(i, col.ref);
        }
        break;
      case Standardized::Kind::Negative:
        for (int i = 0; i < m; ++i) {
          if (a(i, col.ref) != 0) sf.t(i, c) = -sf.flip[i] * a(i, col.ref);
        }
        break;
      case Standardized::Kind::Slack:
        sf.t(col.ref, c) =
            sf.flip[col.ref] * (lp.relation(col.ref) == Relation::LessEqual ? 1 : -1);
        break;
      case Standardized::Kind::Artificial:
        sf.t(col.ref, c) = 1;
        break;
    }
  }
  for (int i = 0; i < m; ++i) sf.t(i, sf.ncols) = sf.flip[i] * bshift(i);

  const RVector c_model = lp.objective_vector();
  const Rational sigma = lp.sense() == Sense::Maximize ? -1 : 1;
  sf.cint = RVector::Zero(sf.ncols);
  for (int c = 0; c < sf.ncols; ++c) {
    const Standardized::Col& col = sf.cols[c];
    if (col.kind == Standardized::Kind::Shifted || col.kind == Standardized::Kind::Positive) {
      sf.cint(c) = sigma * c_model(col.ref);
    } else if (col.kind == Standardized::Kind::Negative) {
      sf.cint(c) = -sigma * c_model(col.ref);
    }
  }
  return sf;
}

class Simplex {
 public:
  Simplex(const LinearProgram& lp, Standardized sf) : lp_(lp), sf_(std::move(sf)) {
    enterable_.assign(sf_.ncols, true);
  }

  LPSolution run() {
    bool need_phase1 = false;
    for (int c = 0; c < sf_.ncols; ++c) need_phase1 |= sf_.is_artificial(c);
    if (need_phase1) {
      load_phase1_objective();
      const int unbounded_col = bland();
      if (unbounded_col >= 0) throw std::logic_error("exact_lp: phase 1 unbounded");
      if (-sf_.t(sf_.m, sf_.ncols) > 0) return infeasible();
      drive_out_artificials();
    }
    load_phase2_objective();
    const int unbounded_col = bland();
    if (unbounded_col >= 0) return unbounded(unbounded_col);
    return optimal();
  }

 private:
  RMatrix& t() { return sf_.t; }
  int m() const { return sf_.m; }
  int ncols() const { return sf_.ncols; }

  void pivot(int row, int col) {
    t().row(row) /= t()(row, col);
    for (int i = 0; i <= m(); ++i) {
      if (i != row && t()(i, col) != 0) t().row(i) -= t()(i, col) * t().row(row);
    }
    if (sf_.is_artificial(sf_.basis[row])) enterable_[sf_.basis[row]] = false;
    sf_.basis[row] = col;
  }

  // Bland's rule: lowest-index entering column, lowest basic index on ratio
  // ties.  Returns -1 at optimality, else the entering column proving the
  // problem unbounded.
  int bland() {
    for (;;) {
      int enter = -1;
      for (int c = 0; c < ncols(); ++c) {
        if (enterable_[c] && t()(m(), c) < 0) {
          enter = c;
          break;
        }
      }
      if (enter < 0) return -1;
      int leave = -1;
      Rational best_ratio;
      for (int i = 0; i < m(); ++i) {
        if (t()(i, enter) <= 0) continue;
        Rational ratio = t()(i, ncols()) / t()(i, enter);
        if (leave < 0 || ratio < best_ratio ||
            (ratio == best_ratio && sf_.basis[i] < sf_.basis[leave])) {
          leave = i;
          best_ratio = ratio;
        }
      }
      if (leave < 0) return enter;
      pivot(leave, enter);
    }
  }

  void load_phase1_objective() {
    for (int c = 0; c < ncols(); ++c) t()(m(), c) = sf_.is_artificial(c) ? 1 : 0;
    t()(m(), ncols()) = 0;
    for (int i = 0; i < m(); ++i) {
      if (sf_.is_artificial(sf_.basis[i])) t().row(m()) -= t().row(i);
    }
  }

  void load_phase2_objective() {
    for (int c = 0; c < ncols(); ++c) {
      t()(m(), c) = sf_.cint(c);
      if (sf_.is_artificial(c)) enterable_[c] = false;
    }
    t()(m(), ncols()) = 0;
    for (int i = 0; i < m(); ++i) {
      if (sf_.cint(sf_.basis[i]) != 0) t().row(m()) -= sf_.cint(sf_.basis[i]) * t().row(i);
    }
  }

  void drive_out_artificials() {
    for (int i = 0; i < m(); ++i) {
      if (!sf_.is_artificial(sf_.basis[i])) continue;
      for (int c = 0; c < ncols(); ++c) {
        if (enterable_[c] && !sf_.is_artificial(c) && t()(i, c) != 0) {
          pivot(i, c);
          break;
        }
      }
      // A row that stays on its artificial is linearly dependent; it is kept
      // inert with zero right-hand side.
    }
  }

  RVector internal_point() const {
    RVector x = RVector::Zero(ncols());
    for (int i = 0; i < m(); ++i) x(sf_.basis[i]) = sf_.t(i, ncols());
    return x;
  }

  RVector to_model_space(const RVector& internal, bool with_bound_offset) const {
    RVector x = RVector::Zero(lp_.variable_count());
    for (int j = 0; j < lp_.variable_count(); ++j) {
      const int c = sf_.varcol[j];
      if (lp_.lower_bound(j)) {
        x(j) = internal(c);
        if (with_bound_offset) x(j) += *lp_.lower_bound(j);
      } else {
        x(j) = internal(c) - internal(c + 1);
      }
    }
    return x;
  }

  // Multipliers for the equality system come from the reduced costs of the
  // columns that started as identity vectors: y_i = cost(idcol_i) - z(idcol_i).
  RVector equality_duals(bool phase1_costs) const {
    RVector y(m());
    for (int i = 0; i < m(); ++i) {
      Rational cost = 0;
      if (phase1_costs && sf_.is_artificial(sf_.idcol[i])) cost = 1;
      y(i) = sf_.flip[i] * (cost - sf_.t(m(), sf_.idcol[i]));
    }
    return y;
  }

  LPSolution infeasible() const {
    LPSolution sol;
    sol.status = SolveStatus::Infeasible;
    sol.objective = 0;
    sol.farkas = equality_duals(true);
    return sol;
  }

  LPSolution unbounded(int enter) const {
    LPSolution sol;
    sol.status = SolveStatus::Unbounded;
    sol.objective = 0;
    sol.primal = to_model_space(internal_point(), true);
    RVector r = RVector::Zero(ncols());
    r(enter) = 1;
    for (int i = 0; i < m(); ++i) r(sf_.basis[i]) = -sf_.t(i, enter);
    sol.ray = to_model_space(r, false);
    return sol;
  }

  LPSolution optimal() const {
    LPSolution sol;
    sol.status = SolveStatus::Optimal;
    sol.primal = to_model_space(internal_point(), true);
    sol.objective = lp_.objective_value(sol.primal);
    sol.dual = equality_duals(false);
    if (lp_.sense() == Sense::Maximize) sol.dual = -sol.dual;
    return sol;
  }

  const LinearProgram& lp_;
  Standardized sf_;
  std::vector<bool> enterable_;
};

bool relation_holds(const Rational& lhs, Relation rel, const Rational& rhs) {
  switch (rel) {
    case Relation::LessEqual:
      return lhs <= rhs;
    case Relation::Equal:
      return lhs == rhs;
    case Relation::GreaterEqual:
      return lhs >= rhs;
  }
  return false;
}

bool primal_feasible(const LinearProgram& lp, const RVector& x) {
  if (x.size() != lp.variable_count()) return false;
  for (int j = 0; j < lp.variable_count(); ++j) {
    if (lp.lower_bound(j) && x(j) < *lp.lower_bound(j)) return false;
  }
  const RVector act = lp.row_activity(x);
  for (int i = 0; i < lp.constraint_count(); ++i) {
    if (!relation_holds(act(i), lp.relation(i), lp.rhs(i))) return false;
  }
  return true;
}

// Row multiplier sign rule shared by the optimal and farkas checks, stated for
// minimization: >= rows need y >= 0 and <= rows need y <= 0.
bool multiplier_signs_ok(const LinearProgram& lp, const RVector& y, bool flipped) {
  for (int i = 0; i < lp.constraint_count(); ++i) {
    const Rational v = flipped ? Rational(-y(i)) : y(i);
    if (lp.relation(i) == Relation::GreaterEqual && v < 0) return false;
    if (lp.relation(i) == Relation::LessEqual && v > 0) return false;
  }
  return true;
}

}  // namespace

int LinearProgram::add_variable(std::string name) {
  vars_.push_back({std::move(name), std::nullopt});
  return static_cast<int>(vars_.size()) - 1;
}

int LinearProgram::add_variable(std::string name, std::optional<Rational> lower,
                                std::optional<Rational> upper) {
  vars_.push_back({name, std::move(lower)});
  const int idx = static_cast<int>(vars_.size()) - 1;
  if (upper) {
    add_constraint({{idx, Rational(1)}}, Relation::LessEqual, *upper,
                   (name.empty() ? "x" + std::to_string(idx) : name) + "_ub");
  }
  return idx;
}

void LinearProgram::add_constraint(std::vector<LinearTerm> terms, Relation relation, Rational rhs,
                                   std::string name) {
  for (const LinearTerm& term : terms) {
    if (term.variable < 0 || term.variable >= variable_count()) {
      throw std::out_of_range("exact_lp: constraint references unknown variable");
    }
  }
  rows_.push_back({std::move(terms), relation, std::move(rhs), std::move(name)});
}

void LinearProgram::set_objective(Sense sense, std::vector<LinearTerm> terms) {
  for (const LinearTerm& term : terms) {
    if (term.variable < 0 || term.variable >= variable_count()) {
      throw std::out_of_range("exact_lp: objective references unknown variable");
    }
  }
  sense_ = sense;
  objective_ = std::move(terms);
}

RVector LinearProgram::objective_vector() const {
  RVector c = RVector::Zero(variable_count());
  for (const LinearTerm& term : objective_) c(term.variable) += term.coefficient;
  return c;
}

RVector LinearProgram::row_activity(const RVector& x) const {
  RVector act = RVector::Zero(constraint_count());
  for (int i = 0; i < constraint_count(); ++i) {
    for (const LinearTerm& term : rows_[i].terms) act(i) += term.coefficient * x(term.variable);
  }
  return act;
}

Rational LinearProgram::objective_value(const RVector& x) const {
  Rational v = 0;
  for (const LinearTerm& term : objective_) v += term.coefficient * x(term.variable);
  return v;
}

RVector LinearProgram::transpose_product(const RVector& y) const {
  RVector out = RVector::Zero(variable_count());
  for (int i = 0; i < constraint_count(); ++i) {
    for (const LinearTerm& term : rows_[i].terms) out(term.variable) += term.coefficient * y(i);
  }
  return out;
}

LPSolution solve(const LinearProgram& lp) {
  Simplex simplex(lp, standardize(lp));
  LPSolution sol = simplex.run();
  g_solves.fetch_add(1, std::memory_order_relaxed);
  if (!verify_certificate(lp, sol)) {
    throw std::logic_error("exact_lp: solution failed certificate verification");
  }
  g_certified.fetch_add(1, std::memory_order_relaxed);
  return sol;
}

bool verify_certificate(const LinearProgram& lp, const LPSolution& sol) {
  const int n = lp.variable_count();
  const int m = lp.constraint_count();
  switch (sol.status) {
    case SolveStatus::Optimal: {
      if (sol.dual.size() != m) return false;
      if (!primal_feasible(lp, sol.primal)) return false;
      if (sol.objective != lp.objective_value(sol.primal)) return false;
      const bool maximize = lp.sense() == Sense::Maximize;
      if (!multiplier_signs_ok(lp, sol.dual, maximize)) return false;
      const RVector z = lp.objective_vector() - lp.transpose_product(sol.dual);
      Rational dual_value = 0;
      for (int i = 0; i < m; ++i) dual_value += sol.dual(i) * lp.rhs(i);
      for (int j = 0; j < n; ++j) {
        if (!lp.lower_bound(j)) {
          if (z(j) != 0) return false;
        } else {
          if (!maximize && z(j) < 0) return false;
          if (maximize && z(j) > 0) return false;
          dual_value += z(j) * *lp.lower_bound(j);
        }
      }
      return dual_value == sol.objective;
    }
    case SolveStatus::Infeasible: {
      if (sol.farkas.size() != m) return false;
      if (!multiplier_signs_ok(lp, sol.farkas, false)) return false;
      const RVector z = -lp.transpose_product(sol.farkas);
      Rational value = 0;
      for (int i = 0; i < m; ++i) value += sol.farkas(i) * lp.rhs(i);
      for (int j = 0; j < n; ++j) {
        if (!lp.lower_bound(j)) {
          if (z(j) != 0) return false;
        } else {
          if (z(j) < 0) return false;
          value += z(j) * *lp.lower_bound(j);
        }
      }
      return value > 0;
    }
    case SolveStatus::Unbounded: {
      if (sol.ray.size() != n) return false;
      if (!primal_feasible(lp, sol.primal)) return false;
      for (int j = 0; j < n; ++j) {
        if (lp.lower_bound(j) && sol.ray(j) < 0) return false;
      }
      const RVector ray_act = lp.row_activity(sol.ray);
      for (int i = 0; i < m; ++i) {
        if (lp.relation(i) == Relation::GreaterEqual && ray_act(i) < 0) return false;
        if (lp.relation(i) == Relation::LessEqual && ray_act(i) > 0) return false;
        if (lp.relation(i) == Relation::Equal && ray_act(i) != 0) return false;
      }
      const Rational drift = lp.objective_value(sol.ray);
      return lp.sense() == Sense::Minimize ? drift < 0 : drift > 0;
    }
  }
  return false;
}

void write_lp(const LinearProgram& lp, std::ostream& out) {
  auto var_name = [&](int j) {
    return lp.variable_name(j).empty() ? "x" + std::to_string(j) : lp.variable_name(j);
  };
  auto write_terms = [&](const std::vector<LinearTerm>& terms) {
    if (terms.empty()) {
      out << "0";
      return;
    }
    bool first = true;
    for (const LinearTerm& term : terms) {
      if (!first) out << " + ";
      out << format_rational(term.coefficient) << " " << var_name(term.variable);
      first = false;
    }
  };
  out << (lp.sense() == Sense::Maximize ? "Maximize" : "Minimize") << "\n obj: ";
  write_terms(lp.objective_terms());
  out << "\nSubject To\n";
  for (int i = 0; i < lp.constraint_count(); ++i) {
    out << " " << (lp.row_name(i).empty() ? "c" + std::to_string(i) : lp.row_name(i)) << ": ";
    write_terms(lp.row_terms(i));
    switch (lp.relation(i)) {
      case Relation::LessEqual:
        out << " <= ";
        break;
      case Relation::Equal:
        out << " = ";
        break;
      case Relation::GreaterEqual:
        out << " >= ";
        break;
    }
    out << format_rational(lp.rhs(i)) << "\n";
  }
  out << "Bounds\n";
  for (int j = 0; j < lp.variable_count(); ++j) {
    if (lp.lower_bound(j)) {
      out << " " << var_name(j) << " >= " << format_rational(*lp.lower_bound(j)) << "\n";
    } else {
      out << " " << var_name(j) << " free\n";
    }
  }
  out << "End\n";
}

SolveStats solve_stats() {
  return {g_solves.load(std::memory_order_relaxed), g_certified.load(std::memory_order_relaxed)};
}

void reset_solve_stats() {
  g_solves.store(0, std::memory_order_relaxed);
  g_certified.store(0, std::memory_order_relaxed);
}

}  // namespace semistatic
