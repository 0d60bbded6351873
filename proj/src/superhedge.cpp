#include "semistatic/superhedge.hpp"

#include <stdexcept>
#include <string>

namespace semistatic {

namespace {

// Shared variable layout of the primal program.
struct Layout {
  int capital = 0;
  int option0 = 0;                          // h_k = option0 + k
  std::vector<int> pre;                     // by node, -1 on leaves
  std::vector<std::vector<int>> post;       // [time][node], -1 where absent
  int total = 0;
};

Layout make_layout(const Instance& inst) {
  Layout layout;
  layout.capital = 0;
  layout.option0 = 1;
  int next = 1 + inst.option_count();
  layout.pre.assign(inst.node_count(), -1);
  for (int v = 0; v < inst.node_count(); ++v) {
    if (!inst.is_leaf(v)) {
      layout.pre[v] = next;
      next += inst.stock_dim();
    }
  }
  layout.post.assign(inst.horizon() + 1, std::vector<int>(inst.node_count(), -1));
  for (int t = 0; t <= inst.horizon(); ++t) {
    for (int v = 0; v < inst.node_count(); ++v) {
      if (!inst.is_leaf(v) && inst.node(v).time >= t) {
        layout.post[t][v] = next;
        next += inst.stock_dim();
      }
    }
  }
  layout.total = next;
  return layout;
}

LinearProgram build_lp(const Instance& inst, const Layout& layout) {
  LinearProgram lp;
  lp.add_variable("x");
  for (int k = 0; k < inst.option_count(); ++k) lp.add_variable("h" + std::to_string(k));
  for (int v = 0; v < inst.node_count(); ++v) {
    if (inst.is_leaf(v)) continue;
    for (int i = 0; i < inst.stock_dim(); ++i) {
      lp.add_variable("H_" + inst.node(v).id + "_" + std::to_string(i));
    }
  }
  for (int t = 0; t <= inst.horizon(); ++t) {
    for (int v = 0; v < inst.node_count(); ++v) {
      if (layout.post[t][v] < 0) continue;
      for (int i = 0; i < inst.stock_dim(); ++i) {
        lp.add_variable("Hpost" + std::to_string(t) + "_" + inst.node(v).id + "_" +
                        std::to_string(i));
      }
    }
  }
  if (lp.variable_count() != layout.total) throw std::logic_error("primal layout out of sync");

  const int d = inst.stock_dim();
  for (int t = 0; t <= inst.horizon(); ++t) {
    for (int leaf : inst.leaves()) {
      RVector coeff = RVector::Zero(layout.total);
      coeff(layout.capital) = 1;
      for (int k = 0; k < inst.option_count(); ++k) {
        coeff(layout.option0 + k) += inst.node(leaf).option_payoff(k);
      }
      // Walk the path; edge into v trades at its parent: book `pre` strictly
      // before the exercise time, the time-t post book from it onwards.
      for (int v = leaf; v != inst.root(); v = inst.node(v).parent) {
        const int parent = inst.node(v).parent;
        const RVector step = inst.increment(v);
        const int base =
            inst.node(parent).time < t ? layout.pre[parent] : layout.post[t][parent];
        for (int i = 0; i < d; ++i) coeff(base + i) += step(i);
      }
      std::vector<LinearTerm> terms;
      for (int j = 0; j < layout.total; ++j) {
        if (coeff(j) != 0) terms.push_back({j, coeff(j)});
      }
      lp.add_constraint(std::move(terms), Relation::GreaterEqual,
                        inst.node(inst.ancestor_at(leaf, t)).exercise_payoff,
                        "t" + std::to_string(t) + "_" + inst.node(leaf).id);
    }
  }
  lp.set_objective(Sense::Minimize, {{layout.capital, Rational(1)}});
  return lp;
}

}  // namespace

LinearProgram build_primal_lp(const Instance& inst) {
  return build_lp(inst, make_layout(inst));
}

PrimalResult solve_primal(const Instance& inst) {
  const Layout layout = make_layout(inst);
  const LinearProgram lp = build_lp(inst, layout);
  const LPSolution sol = solve(lp);
  if (sol.status == SolveStatus::Unbounded) {
    throw MarketError("the hedging program is unbounded below: the market admits arbitrage");
  }
  if (sol.status != SolveStatus::Optimal) {
    throw std::logic_error("the hedging program cannot be infeasible");
  }
  PrimalResult result;
  result.price = sol.objective;
  result.strategy.initial_capital = sol.primal(layout.capital);
  result.strategy.option_position = sol.primal.segment(layout.option0, inst.option_count());
  result.strategy.pre_exercise.resize(inst.node_count());
  for (int v = 0; v < inst.node_count(); ++v) {
    if (layout.pre[v] >= 0) {
      result.strategy.pre_exercise[v] = sol.primal.segment(layout.pre[v], inst.stock_dim());
    }
  }
  result.strategy.post_exercise.assign(inst.horizon() + 1,
                                       std::vector<RVector>(inst.node_count()));
  for (int t = 0; t <= inst.horizon(); ++t) {
    for (int v = 0; v < inst.node_count(); ++v) {
      if (layout.post[t][v] >= 0) {
        result.strategy.post_exercise[t][v] =
            sol.primal.segment(layout.post[t][v], inst.stock_dim());
      }
    }
  }
  return result;
}

bool verify_superhedge(const Instance& inst, const SemiStaticStrategy& strategy,
                       const Rational& budget) {
  if (strategy.option_position.size() != inst.option_count()) return false;
  if (static_cast<int>(strategy.pre_exercise.size()) != inst.node_count()) return false;
  if (static_cast<int>(strategy.post_exercise.size()) != inst.horizon() + 1) return false;
  for (int t = 0; t <= inst.horizon(); ++t) {
    for (int leaf : inst.leaves()) {
      Rational lhs = budget;
      if (inst.option_count() > 0) {
        lhs += strategy.option_position.dot(inst.node(leaf).option_payoff);
      }
      for (int v = leaf; v != inst.root(); v = inst.node(v).parent) {
        const int parent = inst.node(v).parent;
        const RVector& book = inst.node(parent).time < t
                                  ? strategy.pre_exercise[parent]
                                  : strategy.post_exercise[t][parent];
        if (book.size() != inst.stock_dim()) return false;
        lhs += book.dot(inst.increment(v));
      }
      if (lhs < inst.node(inst.ancestor_at(leaf, t)).exercise_payoff) return false;
    }
  }
  return true;
}

json strategy_to_json(const Instance& inst, const SemiStaticStrategy& strategy) {
  auto vector_json = [](const RVector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(format_rational(v(i)));
    return arr;
  };
  json doc;
  doc["x"] = format_rational(strategy.initial_capital);
  doc["h"] = vector_json(strategy.option_position);
  json pre = json::object();
  for (int v = 0; v < inst.node_count(); ++v) {
    if (!inst.is_leaf(v)) pre[inst.node(v).id] = vector_json(strategy.pre_exercise[v]);
  }
  doc["H"] = std::move(pre);
  json post = json::array();
  for (int t = 0; t <= inst.horizon(); ++t) {
    json book = json::object();
    for (int v = 0; v < inst.node_count(); ++v) {
      if (!inst.is_leaf(v) && inst.node(v).time >= t) {
        book[inst.node(v).id] = vector_json(strategy.post_exercise[t][v]);
      }
    }
    post.push_back(std::move(book));
  }
  doc["H_post"] = std::move(post);
  return doc;
}

}  // namespace semistatic
