#include "semistatic/stopping.hpp"

#include <stdexcept>

#include "semistatic/exact_lp.hpp"

namespace semistatic {

namespace {

// Maximizes values.q over the one-step martingale kernels at v.  The optimum
// is attained at a vertex of the local kernel polytope, which keeps the
// family of kernels that can ever be returned finite.
struct KernelOpt {
  Rational value;
  RVector kernel;  // one weight per child of v
};

KernelOpt one_step_kernel_opt(const Instance& inst, int v, const RVector& values) {
  const auto& children = inst.node(v).children;
  const int n = static_cast<int>(children.size());
  LinearProgram lp;
  for (int c = 0; c < n; ++c) {
    lp.add_variable("q" + std::to_string(c), Rational(0));
  }
  std::vector<LinearTerm> mass;
  for (int c = 0; c < n; ++c) mass.push_back({c, Rational(1)});
  lp.add_constraint(std::move(mass), Relation::Equal, Rational(1));
  for (int i = 0; i < inst.stock_dim(); ++i) {
    std::vector<LinearTerm> terms;
    for (int c = 0; c < n; ++c) {
      const Rational step = inst.increment(children[c])(i);
      if (step != 0) terms.push_back({c, step});
    }
    lp.add_constraint(std::move(terms), Relation::Equal, Rational(0));
  }
  std::vector<LinearTerm> objective;
  for (int c = 0; c < n; ++c) {
    if (values(c) != 0) objective.push_back({c, values(c)});
  }
  lp.set_objective(Sense::Maximize, std::move(objective));
  const LPSolution sol = solve(lp);
  if (sol.status != SolveStatus::Optimal) {
    throw MarketError("node " + inst.node(v).id +
                      " admits no one-step martingale kernel (local arbitrage)");
  }
  return {sol.objective, sol.primal};
}

RVector child_values(const Instance& inst, int v, const RVector& per_node) {
  const auto& children = inst.node(v).children;
  RVector out(children.size());
  for (std::size_t c = 0; c < children.size(); ++c) out(c) = per_node(children[c]);
  return out;
}

}  // namespace

RVector node_masses(const Instance& inst, const MartingaleMeasure& q) {
  RVector masses = RVector::Zero(inst.node_count());
  for (std::size_t l = 0; l < inst.leaves().size(); ++l) {
    const Rational& w = q.leaf_weights(static_cast<Eigen::Index>(l));
    for (int v = inst.leaves()[l];; v = inst.node(v).parent) {
      masses(v) += w;
      if (v == inst.root()) break;
    }
  }
  return masses;
}

std::vector<RVector> transition_kernels(const Instance& inst, const MartingaleMeasure& q) {
  if (!is_martingale_measure(inst, q)) {
    throw MarketError("transition kernels require a martingale measure");
  }
  const RVector masses = node_masses(inst, q);
  std::vector<RVector> kernels(inst.node_count());
  for (int v = 0; v < inst.node_count(); ++v) {
    if (inst.is_leaf(v)) continue;
    const auto& children = inst.node(v).children;
    if (masses(v) > 0) {
      RVector k(children.size());
      for (std::size_t c = 0; c < children.size(); ++c) {
        k(c) = Rational(masses(children[c]) / masses(v));
      }
      kernels[v] = std::move(k);
    } else {
      // Unreached nodes still get a well-defined kernel through a
      // deterministic feasible choice.
      kernels[v] = one_step_kernel_opt(inst, v, RVector::Zero(children.size())).kernel;
    }
  }
  return kernels;
}

bool is_martingale_measure(const Instance& inst, const MartingaleMeasure& q) {
  if (q.leaf_weights.size() != static_cast<Eigen::Index>(inst.leaves().size())) return false;
  Rational total = 0;
  for (Eigen::Index l = 0; l < q.leaf_weights.size(); ++l) {
    if (q.leaf_weights(l) < 0) return false;
    total += q.leaf_weights(l);
  }
  if (total != 1) return false;
  const RVector residual = martingale_system(inst) * q.leaf_weights;
  for (Eigen::Index r = 0; r < residual.size(); ++r) {
    if (residual(r) != 0) return false;
  }
  return true;
}

RVector option_expectation(const Instance& inst, const MartingaleMeasure& q) {
  return calibration_system(inst) * q.leaf_weights;
}

bool is_stopping_rule(const Instance& inst, const StoppingRule& rule) {
  if (rule.stop_probability.size() != inst.node_count()) return false;
  for (int v = 0; v < inst.node_count(); ++v) {
    const Rational& p = rule.stop_probability(v);
    if (p < 0 || p > 1) return false;
    if (inst.is_leaf(v) && p != 1) return false;
  }
  return true;
}

SnellResult snell_value(const Instance& inst, const MartingaleMeasure& q) {
  if (!is_martingale_measure(inst, q)) {
    throw MarketError("snell_value requires a martingale measure");
  }
  const std::vector<RVector> kernels = transition_kernels(inst, q);
  SnellResult result;
  result.node_values = RVector::Zero(inst.node_count());
  result.rule.stop_probability = RVector::Zero(inst.node_count());
  for (int t = inst.horizon(); t >= 0; --t) {
    for (int v : inst.nodes_at(t)) {
      if (inst.is_leaf(v)) {
        result.node_values(v) = inst.node(v).exercise_payoff;
      } else {
        const Rational continuation =
            kernels[v].dot(child_values(inst, v, result.node_values));
        const Rational& payoff = inst.node(v).exercise_payoff;
        result.node_values(v) = payoff >= continuation ? payoff : continuation;
      }
      if (result.node_values(v) == inst.node(v).exercise_payoff) {
        result.rule.stop_probability(v) = 1;
      }
    }
  }
  result.value = result.node_values(inst.root());
  return result;
}

Rational evaluate(const Instance& inst, const MartingaleMeasure& q, const StoppingRule& rule,
                  const RVector& h) {
  if (!is_martingale_measure(inst, q)) throw MarketError("evaluate requires a martingale measure");
  if (!is_stopping_rule(inst, rule)) throw MarketError("evaluate requires a stopping rule");
  if (h.size() != inst.option_count()) throw MarketError("option position has wrong length");
  const RVector masses = node_masses(inst, q);

  Rational value = 0;
  // carry = P(reach v and no stop strictly before v)
  auto walk = [&](auto&& self, int v, const Rational& carry) -> void {
    if (carry == 0) return;
    const Rational& stop = rule.stop_probability(v);
    value += carry * stop * inst.node(v).exercise_payoff;
    if (inst.is_leaf(v)) return;
    const Rational keep = carry * (1 - stop);
    for (int c : inst.node(v).children) {
      if (masses(c) > 0) self(self, c, Rational(keep * masses(c) / masses(v)));
    }
  };
  walk(walk, inst.root(), Rational(1));

  if (h.size() > 0) value -= h.dot(option_expectation(inst, q));
  return value;
}

JointValue joint_sup(const Instance& inst, const RVector& h) {
  if (h.size() != inst.option_count()) throw MarketError("option position has wrong length");
  const int n = inst.node_count();

  // Static option leg charged at the leaves.
  RVector static_leg = RVector::Zero(n);
  for (int leaf : inst.leaves()) {
    if (h.size() > 0) static_leg(leaf) = h.dot(inst.node(leaf).option_payoff);
  }

  // u: best expected -static_leg below a node once exercise already happened.
  // w: best expected stopped payoff minus static_leg when still unexercised.
  RVector u = RVector::Zero(n), w = RVector::Zero(n);
  std::vector<RVector> u_kernel(n), w_kernel(n);
  std::vector<bool> stop_here(n, false);
  for (int t = inst.horizon(); t >= 0; --t) {
    for (int v : inst.nodes_at(t)) {
      if (inst.is_leaf(v)) {
        u(v) = -static_leg(v);
        w(v) = inst.node(v).exercise_payoff - static_leg(v);
        stop_here[v] = true;
        continue;
      }
      const KernelOpt ubest = one_step_kernel_opt(inst, v, child_values(inst, v, u));
      const KernelOpt wbest = one_step_kernel_opt(inst, v, child_values(inst, v, w));
      u(v) = ubest.value;
      u_kernel[v] = ubest.kernel;
      w_kernel[v] = wbest.kernel;
      const Rational stopped = inst.node(v).exercise_payoff + u(v);
      stop_here[v] = stopped >= wbest.value;  // ties stop
      w(v) = stop_here[v] ? stopped : wbest.value;
    }
  }

  JointValue result;
  result.value = w(inst.root());
  result.measure.leaf_weights = RVector::Zero(inst.leaves().size());
  result.rule.stop_probability = RVector::Zero(n);
  for (int v = 0; v < n; ++v) {
    if (inst.is_leaf(v) || stop_here[v]) result.rule.stop_probability(v) = 1;
  }
  // Assemble the maximizing measure: continuation kernels while unexercised,
  // option-leg kernels afterwards.
  auto walk = [&](auto&& self, int v, const Rational& mass, bool exercised) -> void {
    if (inst.is_leaf(v)) {
      result.measure.leaf_weights(inst.leaf_ordinal(v)) = mass;
      return;
    }
    const bool now = exercised || stop_here[v];
    const RVector& kernel = now ? u_kernel[v] : w_kernel[v];
    const auto& children = inst.node(v).children;
    for (std::size_t c = 0; c < children.size(); ++c) {
      self(self, children[c], Rational(mass * kernel(c)), now);
    }
  };
  walk(walk, inst.root(), Rational(1), false);
  return result;
}

}  // namespace semistatic
