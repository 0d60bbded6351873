#include "semistatic/dual.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "semistatic/exact_lp.hpp"
#include "semistatic/superhedge.hpp"

namespace semistatic {

namespace {

constexpr int kIterationCap = 100000;
constexpr int kDoublingCap = 64;

// Options kept by the reduction, ascending original indices.
std::vector<int> kept_options(const Instance& inst, const ReductionResult& red) {
  std::vector<bool> removed(inst.option_count(), false);
  for (int k : red.removed) removed[k] = true;
  std::vector<int> kept;
  for (int k = 0; k < inst.option_count(); ++k) {
    if (!removed[k]) kept.push_back(k);
  }
  return kept;
}

RVector embed_position(int full_dim, const std::vector<int>& kept, const RVector& h) {
  RVector full = RVector::Zero(full_dim);
  for (std::size_t i = 0; i < kept.size(); ++i) full(kept[i]) = h(static_cast<int>(i));
  return full;
}

}  // namespace

SupportResult support_function(const Instance& inst, const RVector& direction) {
  if (direction.size() != inst.option_count()) {
    throw StructuralError("support direction must have one entry per option");
  }
  const std::vector<int>& leaves = inst.leaves();
  const int n = static_cast<int>(leaves.size());

  LinearProgram lp;
  for (int l = 0; l < n; ++l) {
    lp.add_variable("q_" + inst.node(leaves[l]).id, Rational(0));
  }
  {
    std::vector<LinearTerm> terms;
    for (int l = 0; l < n; ++l) terms.push_back({l, Rational(1)});
    lp.add_constraint(std::move(terms), Relation::Equal, Rational(1), "mass");
  }
  const RMatrix mart = martingale_system(inst);
  for (int r = 0; r < mart.rows(); ++r) {
    std::vector<LinearTerm> terms;
    for (int l = 0; l < n; ++l) {
      if (mart(r, l) != 0) terms.push_back({l, mart(r, l)});
    }
    lp.add_constraint(std::move(terms), Relation::Equal, Rational(0),
                      "mart" + std::to_string(r));
  }
  {
    std::vector<LinearTerm> terms;
    for (int l = 0; l < n; ++l) {
      Rational coeff = direction.dot(inst.node(leaves[l]).option_payoff);
      if (coeff != 0) terms.push_back({l, std::move(coeff)});
    }
    lp.set_objective(Sense::Maximize, std::move(terms));
  }

  LPSolution sol = solve(lp);
  if (sol.status == SolveStatus::Infeasible) {
    throw MarketError("the stock admits no martingale measure (arbitrage)");
  }
  if (sol.status != SolveStatus::Optimal) {
    throw std::logic_error("support program over a simplex cannot be unbounded");
  }
  return {sol.objective, MartingaleMeasure{sol.primal}};
}

CalibrationBox compute_box(const Instance& inst) {
  const int e = inst.option_count();
  if (e == 0) throw StructuralError("box construction needs at least one option");
  CalibrationBox box;
  box.payoff_bound = inst.payoff_bound();
  bool first = true;
  for (int k = 0; k < e; ++k) {
    for (int sign : {1, -1}) {
      RVector dir = RVector::Zero(e);
      dir(k) = Rational(sign);
      Rational s = support_function(inst, dir).value;
      if (first || s < box.inradius) box.inradius = s;
      first = false;
    }
  }
  if (!(box.inradius > 0)) {
    throw MarketError(
        "option expectations span a flat direction; drop replicable options "
        "(reduce_redundant_options) before the dual solvers");
  }
  box.radius = Rational(Rational(3) * box.payoff_bound / box.inradius);
  return box;
}

CutModel::CutModel(int dim, Rational radius) : dim_(dim), radius_(std::move(radius)) {
  if (dim_ <= 0) throw std::logic_error("cut model needs a positive dimension");
  if (!(radius_ > 0)) throw std::logic_error("cut model needs a positive radius");
}

void CutModel::add_cut(const RVector& point, const Rational& value, const RVector& gradient) {
  if (point.size() != dim_ || gradient.size() != dim_) {
    throw std::logic_error("cut dimension mismatch");
  }
  points_.push_back(point);
  values_.push_back(value);
  gradients_.push_back(gradient);
}

CutModel::Master CutModel::minimize() const {
  if (points_.empty()) throw std::logic_error("cut master needs at least one cut");
  LinearProgram lp;
  const int z = lp.add_variable("z");
  std::vector<int> h(dim_);
  for (int j = 0; j < dim_; ++j) {
    h[j] = lp.add_variable("h" + std::to_string(j), Rational(-radius_), Rational(radius_));
  }
  for (std::size_t k = 0; k < points_.size(); ++k) {
    std::vector<LinearTerm> terms;
    terms.push_back({z, Rational(1)});
    for (int j = 0; j < dim_; ++j) {
      if (gradients_[k](j) != 0) terms.push_back({h[j], Rational(-gradients_[k](j))});
    }
    Rational rhs = Rational(values_[k] - gradients_[k].dot(points_[k]));
    lp.add_constraint(std::move(terms), Relation::GreaterEqual, std::move(rhs),
                      "cut" + std::to_string(k));
  }
  lp.set_objective(Sense::Minimize, {{z, Rational(1)}});

  LPSolution sol = solve(lp);
  if (sol.status != SolveStatus::Optimal) {
    throw std::logic_error("cut master over a box is always solvable");
  }
  Master m;
  m.lower = sol.objective;
  m.point = RVector(dim_);
  for (int j = 0; j < dim_; ++j) m.point(j) = sol.primal(h[j]);
  return m;
}

bool CutModel::consistent() const {
  for (std::size_t j = 0; j < points_.size(); ++j) {
    for (std::size_t k = 0; k < points_.size(); ++k) {
      Rational bound =
          Rational(values_[k] + gradients_[k].dot(RVector(points_[j] - points_[k])));
      if (values_[j] < bound) return false;
    }
  }
  return true;
}

E1Result solve_e1(const Instance& inst) {
  NoArbitrageReport na = check_no_arbitrage(inst);
  if (!na.ok) throw MarketError("market admits arbitrage; the dual price is undefined");
  ReductionResult red = reduce_redundant_options(inst);
  const Instance& work = red.instance;
  const std::vector<int> kept = kept_options(inst, red);
  const int e = work.option_count();

  E1Result out;
  auto query = [&](const RVector& h) {
    JointValue jv = joint_sup(work, h);
    out.queried.push_back(embed_position(inst.option_count(), kept, h));
    out.queried_values.push_back(jv.value);
    return std::pair<Rational, RVector>(jv.value, option_expectation(work, jv.measure));
  };

  if (e == 0) {
    auto [value, gamma] = query(RVector::Zero(0));
    (void)gamma;
    out.value = value;
    out.h_star = RVector::Zero(inst.option_count());
    out.lower_trace.push_back(value);
    out.upper_trace.push_back(value);
    out.iterations = 1;
    return out;
  }

  CalibrationBox box = compute_box(work);
  CutModel cuts(e, box.radius);
  Rational upper;
  {
    RVector h0 = RVector::Zero(e);
    auto [f0, g0] = query(h0);
    cuts.add_cut(h0, f0, RVector(-g0));
    upper = f0;
  }

  while (true) {
    if (++out.iterations > kIterationCap) {
      throw std::logic_error("cutting planes failed to terminate");
    }
    CutModel::Master m = cuts.minimize();
    auto [f, gamma] = query(m.point);
    if (f < upper) upper = f;
    out.lower_trace.push_back(m.lower);
    out.upper_trace.push_back(upper);
    if (f == m.lower) {
      const Rational r = cuts.radius();
      bool interior = true;
      for (int j = 0; j < e; ++j) {
        if (!(m.point(j) < r) || !(Rational(-r) < m.point(j))) interior = false;
      }
      if (interior) {
        out.value = f;
        out.h_star = embed_position(inst.option_count(), kept, m.point);
        return out;
      }
      // The minimum over the box sits on its boundary, so the box may be
      // clipping the true minimizer: grow it and keep every cut.
      if (++out.box_doublings > kDoublingCap) {
        throw std::logic_error("minimizer escaped every search box");
      }
      cuts.add_cut(m.point, f, RVector(-gamma));
      cuts.double_radius();
      continue;
    }
    cuts.add_cut(m.point, f, RVector(-gamma));
  }
}

bool mixture_valid(const Instance& inst, const MixtureModel& mix) {
  if (mix.components.empty()) return false;
  Rational total(0);
  RVector balance = RVector::Zero(inst.option_count());
  for (const MixtureComponent& comp : mix.components) {
    if (!(comp.weight > 0)) return false;
    if (!is_martingale_measure(inst, comp.measure)) return false;
    if (comp.snell != snell_value(inst, comp.measure).value) return false;
    RVector gamma = option_expectation(inst, comp.measure);
    if (comp.option_expectation.size() != gamma.size()) return false;
    for (int k = 0; k < gamma.size(); ++k) {
      if (comp.option_expectation(k) != gamma(k)) return false;
    }
    total += comp.weight;
    balance += comp.weight * gamma;
  }
  if (total != 1) return false;
  for (int k = 0; k < balance.size(); ++k) {
    if (balance(k) != 0) return false;
  }
  return true;
}

E2Result solve_e2(const Instance& inst) {
  NoArbitrageReport na = check_no_arbitrage(inst);
  if (!na.ok) throw MarketError("market admits arbitrage; no calibrated mixture exists");
  ReductionResult red = reduce_redundant_options(inst);
  const Instance& work = red.instance;
  const int e = work.option_count();

  struct Column {
    Rational value;  // Snell value of the measure
    RVector gamma;   // E[g] under the measure, reduced options
    MartingaleMeasure measure;
  };
  std::vector<Column> pool;
  auto add_measure = [&](const MartingaleMeasure& q) {
    pool.push_back({snell_value(work, q).value, option_expectation(work, q), q});
  };
  auto seed_at = [&](const RVector& h) { add_measure(joint_sup(work, h).measure); };

  E2Result out;
  auto finish = [&](const Rational& value, const RVector& weights) {
    out.value = value;
    for (std::size_t j = 0; j < pool.size(); ++j) {
      const Rational& w = weights(static_cast<int>(j));
      if (!(w > 0)) continue;
      MixtureComponent comp;
      comp.weight = w;
      comp.measure = pool[j].measure;
      comp.snell = pool[j].value;
      comp.option_expectation = option_expectation(inst, pool[j].measure);
      out.mixture.components.push_back(std::move(comp));
    }
  };

  if (e == 0) {
    seed_at(RVector::Zero(0));
    out.iterations = 1;
    out.master_trace.push_back(pool[0].value);
    RVector weights(1);
    weights(0) = Rational(1);
    finish(pool[0].value, weights);
    return out;
  }

  CalibrationBox box = compute_box(work);
  seed_at(RVector::Zero(e));
  for (int k = 0; k < e; ++k) {
    RVector dir = RVector::Zero(e);
    dir(k) = box.radius;
    seed_at(dir);
    dir(k) = Rational(-box.radius);
    seed_at(dir);
  }

  bool reseeded = false;
  while (true) {
    if (++out.iterations > kIterationCap) {
      throw std::logic_error("column generation failed to terminate");
    }
    LinearProgram master;
    for (std::size_t j = 0; j < pool.size(); ++j) {
      master.add_variable("c" + std::to_string(j), Rational(0));
    }
    for (int k = 0; k < e; ++k) {
      std::vector<LinearTerm> terms;
      for (std::size_t j = 0; j < pool.size(); ++j) {
        if (pool[j].gamma(k) != 0) terms.push_back({static_cast<int>(j), pool[j].gamma(k)});
      }
      master.add_constraint(std::move(terms), Relation::Equal, Rational(0),
                            "balance" + std::to_string(k));
    }
    {
      std::vector<LinearTerm> terms;
      for (std::size_t j = 0; j < pool.size(); ++j) {
        terms.push_back({static_cast<int>(j), Rational(1)});
      }
      master.add_constraint(std::move(terms), Relation::Equal, Rational(1), "mass");
    }
    {
      std::vector<LinearTerm> terms;
      for (std::size_t j = 0; j < pool.size(); ++j) {
        if (pool[j].value != 0) terms.push_back({static_cast<int>(j), pool[j].value});
      }
      master.set_objective(Sense::Maximize, std::move(terms));
    }

    LPSolution sol = solve(master);
    if (sol.status == SolveStatus::Infeasible) {
      // The seeds did not span a calibrated mixture.  The no-arbitrage
      // certificate is itself a calibrated measure, hence a valid column; if
      // even that leaves the master infeasible the market is mispriced.
      if (reseeded || !na.positive_measure.has_value()) {
        throw MarketError("no calibrated mixture exists (arbitrage)");
      }
      reseeded = true;
      add_measure(MartingaleMeasure{*na.positive_measure});
      continue;
    }
    if (sol.status != SolveStatus::Optimal) {
      throw std::logic_error("mixture master over a simplex cannot be unbounded");
    }
    out.master_trace.push_back(sol.objective);

    RVector h(e);
    for (int k = 0; k < e; ++k) h(k) = sol.dual(k);
    const Rational eta = sol.dual(e);
    JointValue jv = joint_sup(work, h);
    if (jv.value > eta) {
      add_measure(jv.measure);
      continue;
    }
    finish(sol.objective, sol.primal);
    return out;
  }
}

NatureResult solve_nature_lp(const Instance& inst) {
  const int n = inst.node_count();
  const int root = inst.root();

  if (inst.horizon() == 0) {
    // Single-node tree: all mass stops immediately.
    const Node& node = inst.node(root);
    for (int k = 0; k < inst.option_count(); ++k) {
      if (node.option_payoff(k) != 0) {
        throw MarketError("no calibrated occupation flow; the market admits arbitrage");
      }
    }
    NatureResult out;
    out.value = node.exercise_payoff;
    out.stopped_mass = {Rational(1)};
    out.pre_flow = {Rational(1)};
    out.post_flow = {Rational(0)};
    return out;
  }

  LinearProgram lp;
  std::vector<int> w(n, -1), u(n, -1), y(n, -1);
  for (int v = 0; v < n; ++v) w[v] = lp.add_variable("w_" + inst.node(v).id, Rational(0));
  for (int v = 0; v < n; ++v) {
    if (v != root) u[v] = lp.add_variable("u_" + inst.node(v).id, Rational(0));
  }
  for (int v = 0; v < n; ++v) {
    if (v != root) y[v] = lp.add_variable("y_" + inst.node(v).id, Rational(0));
  }

  // Pre-exercise conservation: in-flow = stopped mass + out-flow.
  for (int v = 0; v < n; ++v) {
    std::vector<LinearTerm> terms;
    terms.push_back({w[v], Rational(1)});
    for (int c : inst.node(v).children) terms.push_back({u[c], Rational(1)});
    Rational rhs(0);
    if (v == root) {
      rhs = Rational(1);
    } else {
      terms.push_back({u[v], Rational(-1)});
    }
    lp.add_constraint(std::move(terms), Relation::Equal, std::move(rhs),
                      "pre_" + inst.node(v).id);
  }
  // Post-exercise conservation: stopped mass joins the post-exercise flow.
  for (int v = 0; v < n; ++v) {
    if (inst.is_leaf(v)) continue;
    std::vector<LinearTerm> terms;
    for (int c : inst.node(v).children) terms.push_back({y[c], Rational(1)});
    if (v != root) terms.push_back({y[v], Rational(-1)});
    terms.push_back({w[v], Rational(-1)});
    lp.add_constraint(std::move(terms), Relation::Equal, Rational(0),
                      "post_" + inst.node(v).id);
  }
  // Both flows are martingale node by node, independently of each other.
  for (int v = 0; v < n; ++v) {
    if (inst.is_leaf(v)) continue;
    for (int i = 0; i < inst.stock_dim(); ++i) {
      std::vector<LinearTerm> pre_terms, post_terms;
      for (int c : inst.node(v).children) {
        Rational step = inst.increment(c)(i);
        if (step == 0) continue;
        pre_terms.push_back({u[c], step});
        post_terms.push_back({y[c], std::move(step)});
      }
      const std::string tag = inst.node(v).id + "_" + std::to_string(i);
      lp.add_constraint(std::move(pre_terms), Relation::Equal, Rational(0), "mart_pre_" + tag);
      lp.add_constraint(std::move(post_terms), Relation::Equal, Rational(0),
                        "mart_post_" + tag);
    }
  }
  // The combined flow into the leaves prices every option at zero.
  for (int k = 0; k < inst.option_count(); ++k) {
    std::vector<LinearTerm> terms;
    for (int leaf : inst.leaves()) {
      const Rational& g = inst.node(leaf).option_payoff(k);
      if (g == 0) continue;
      terms.push_back({u[leaf], g});
      terms.push_back({y[leaf], g});
    }
    lp.add_constraint(std::move(terms), Relation::Equal, Rational(0),
                      "calibrate" + std::to_string(k));
  }
  {
    std::vector<LinearTerm> terms;
    for (int v = 0; v < n; ++v) {
      if (inst.node(v).exercise_payoff != 0) terms.push_back({w[v], inst.node(v).exercise_payoff});
    }
    lp.set_objective(Sense::Maximize, std::move(terms));
  }

  LPSolution sol = solve(lp);
  if (sol.status == SolveStatus::Infeasible) {
    throw MarketError("no calibrated occupation flow; the market admits arbitrage");
  }
  if (sol.status != SolveStatus::Optimal) {
    throw std::logic_error("occupation flows carry at most unit mass");
  }

  NatureResult out;
  out.value = sol.objective;
  out.stopped_mass.resize(n);
  out.pre_flow.resize(n);
  out.post_flow.resize(n);
  for (int v = 0; v < n; ++v) {
    out.stopped_mass[v] = sol.primal(w[v]);
    out.pre_flow[v] = v == root ? Rational(1) : sol.primal(u[v]);
    out.post_flow[v] = v == root ? Rational(0) : sol.primal(y[v]);
  }
  return out;
}

Rational model_sup_calibrated(const Instance& inst, const Guards& guards) {
  std::vector<MartingaleMeasure> vertices = enumerate_calibrated_vertices(inst, guards);
  if (vertices.empty()) {
    throw MarketError("no calibrated martingale measure; the market admits arbitrage");
  }
  Rational best;
  bool first = true;
  for (const MartingaleMeasure& q : vertices) {
    Rational value = snell_value(inst, q).value;
    if (first || value > best) best = value;
    first = false;
  }
  return best;
}

GapResult duality_gap(const Instance& inst, const Guards& guards) {
  GapResult out;
  out.pi = solve_primal(inst).price;
  out.model_price = model_sup_calibrated(inst, guards);
  out.gap = Rational(out.pi - out.model_price);
  return out;
}

json full_report(const Instance& inst, const Guards& guards) {
  PrimalResult primal = solve_primal(inst);
  E1Result e1 = solve_e1(inst);
  E2Result e2 = solve_e2(inst);
  NatureResult nature = solve_nature_lp(inst);
  Rational model = model_sup_calibrated(inst, guards);

  json report;
  report["pi_primal"] = format_rational(primal.price);
  report["pi_e1"] = format_rational(e1.value);
  report["pi_e2"] = format_rational(e2.value);
  report["pi_nature"] = format_rational(nature.value);
  report["model_sup"] = format_rational(model);
  report["gap"] = format_rational(Rational(primal.price - model));
  json mixture = json::array();
  for (const MixtureComponent& comp : e2.mixture.components) {
    json entry;
    entry["c"] = format_rational(comp.weight);
    json weights = json::array();
    for (int l = 0; l < comp.measure.leaf_weights.size(); ++l) {
      weights.push_back(format_rational(comp.measure.leaf_weights(l)));
    }
    entry["leaf_weights"] = std::move(weights);
    entry["snell"] = format_rational(comp.snell);
    mixture.push_back(std::move(entry));
  }
  report["mixture"] = std::move(mixture);
  json h_star = json::array();
  for (int k = 0; k < e1.h_star.size(); ++k) h_star.push_back(format_rational(e1.h_star(k)));
  report["h_star"] = std::move(h_star);
  report["strategy"] = strategy_to_json(inst, primal.strategy);
  return report;
}

}  // namespace semistatic
