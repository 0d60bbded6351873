#include "semistatic/market_tree.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <utility>

#include "semistatic/exact_lp.hpp"
#include "semistatic/linalg.hpp"

namespace semistatic {

namespace {

bool vectors_equal(const RVector& a, const RVector& b) {
  if (a.size() != b.size()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) != b(i)) return false;
  }
  return true;
}

// Leaf ordinals in the subtree rooted at v, in leaf order.
void collect_leaves_under(const Instance& inst, int v, std::vector<int>& out) {
  if (inst.is_leaf(v)) {
    out.push_back(inst.leaf_ordinal(v));
    return;
  }
  for (int c : inst.node(v).children) collect_leaves_under(inst, c, out);
}

}  // namespace

bool Node::operator==(const Node& other) const {
  return id == other.id && time == other.time && parent == other.parent &&
         vectors_equal(stock, other.stock) && exercise_payoff == other.exercise_payoff &&
         vectors_equal(option_payoff, other.option_payoff) && children == other.children;
}

Instance::Instance(int horizon, int stock_dim, int option_count, std::vector<Node> nodes)
    : horizon_(horizon), stock_dim_(stock_dim), option_count_(option_count),
      nodes_(std::move(nodes)) {
  if (horizon_ < 0) throw StructuralError("horizon must be nonnegative");
  if (stock_dim_ < 1) throw StructuralError("stock_dim must be at least one");
  if (option_count_ < 0) throw StructuralError("option_count must be nonnegative");
  if (nodes_.empty()) throw StructuralError("instance has no nodes");

  std::map<std::string, int> seen;
  for (int v = 0; v < node_count(); ++v) {
    Node& node = nodes_[v];
    if (node.id.empty()) throw StructuralError("node with empty id");
    if (!seen.emplace(node.id, v).second) throw StructuralError("duplicate node id " + node.id);
    node.children.clear();
  }
  for (int v = 0; v < node_count(); ++v) {
    const Node& node = nodes_[v];
    if (node.time < 0 || node.time > horizon_) {
      throw StructuralError("node " + node.id + " has time outside [0, horizon]");
    }
    if (node.parent < 0) {
      if (root_ >= 0) {
        throw StructuralError("multiple roots: " + nodes_[root_].id + " and " + node.id);
      }
      root_ = v;
      if (node.time != 0) throw StructuralError("root " + node.id + " must have time 0");
    } else {
      if (node.parent >= node_count()) {
        throw StructuralError("node " + node.id + " has an invalid parent index");
      }
      if (nodes_[node.parent].time != node.time - 1) {
        throw StructuralError("node " + node.id + " is not one step after its parent");
      }
      nodes_[node.parent].children.push_back(v);
    }
    if (node.stock.size() != stock_dim_) {
      throw StructuralError("node " + node.id + " has a stock vector of wrong dimension");
    }
  }
  if (root_ < 0) throw StructuralError("instance has no root");

  by_time_.assign(horizon_ + 1, {});
  leaf_ordinal_.assign(node_count(), -1);
  for (int v = 0; v < node_count(); ++v) {
    const Node& node = nodes_[v];
    by_time_[node.time].push_back(v);
    const bool at_horizon = node.time == horizon_;
    if (at_horizon && !node.children.empty()) {
      throw StructuralError("node " + node.id + " at the horizon has children");
    }
    if (!at_horizon && node.children.empty()) {
      throw StructuralError("inner node " + node.id + " has no children");
    }
    if (at_horizon) {
      if (node.option_payoff.size() != option_count_) {
        throw StructuralError("leaf " + node.id + " has an option payoff of wrong length");
      }
      leaf_ordinal_[v] = static_cast<int>(leaves_.size());
      leaves_.push_back(v);
    } else if (node.option_payoff.size() != 0) {
      throw StructuralError("inner node " + node.id + " carries option payoffs");
    }
  }
}

int Instance::ancestor_at(int leaf_node, int time) const {
  int v = leaf_node;
  while (nodes_[v].time > time) v = nodes_[v].parent;
  if (nodes_[v].time != time) throw std::logic_error("ancestor_at: time above the node");
  return v;
}

RVector Instance::increment(int child) const {
  return nodes_[child].stock - nodes_[nodes_[child].parent].stock;
}

Rational Instance::payoff_bound() const {
  Rational bound = 1;
  for (const Node& node : nodes_) {
    Rational a = node.exercise_payoff < 0 ? Rational(-node.exercise_payoff) : node.exercise_payoff;
    if (1 + a > bound) bound = 1 + a;
  }
  return bound;
}

bool Instance::operator==(const Instance& other) const {
  return horizon_ == other.horizon_ && stock_dim_ == other.stock_dim_ &&
         option_count_ == other.option_count_ && nodes_ == other.nodes_;
}

RMatrix martingale_system(const Instance& inst) {
  const int n_leaves = static_cast<int>(inst.leaves().size());
  std::vector<int> inner;
  for (int v = 0; v < inst.node_count(); ++v) {
    if (!inst.is_leaf(v)) inner.push_back(v);
  }
  RMatrix m = RMatrix::Zero(static_cast<Eigen::Index>(inner.size()) * inst.stock_dim(), n_leaves);
  Eigen::Index row = 0;
  for (int v : inner) {
    for (int i = 0; i < inst.stock_dim(); ++i, ++row) {
      for (int c : inst.node(v).children) {
        const Rational step = inst.node(c).stock(i) - inst.node(v).stock(i);
        if (step == 0) continue;
        std::vector<int> under;
        collect_leaves_under(inst, c, under);
        for (int leaf : under) m(row, leaf) += step;
      }
    }
  }
  return m;
}

RMatrix calibration_system(const Instance& inst) {
  const int n_leaves = static_cast<int>(inst.leaves().size());
  RMatrix g(inst.option_count(), n_leaves);
  for (int l = 0; l < n_leaves; ++l) {
    g.col(l) = inst.node(inst.leaves()[l]).option_payoff;
  }
  return g;
}

Instance load_instance(const json& doc) {
  if (!doc.is_object()) throw ParseError("instance document must be a JSON object");
  for (const char* key : {"horizon", "stock_dim", "option_count", "nodes"}) {
    if (!doc.contains(key)) throw ParseError(std::string("missing key \"") + key + "\"");
  }
  if (!doc["horizon"].is_number_integer() || !doc["stock_dim"].is_number_integer() ||
      !doc["option_count"].is_number_integer()) {
    throw ParseError("horizon, stock_dim and option_count must be integers");
  }
  const int horizon = doc["horizon"].get<int>();
  const int stock_dim = doc["stock_dim"].get<int>();
  const int option_count = doc["option_count"].get<int>();
  if (!doc["nodes"].is_array()) throw ParseError("nodes must be an array");

  std::map<std::string, int> index_of;
  int position = 0;
  for (const auto& item : doc["nodes"]) {
    if (!item.is_object() || !item.contains("id") || !item["id"].is_string()) {
      throw ParseError("every node needs a string id");
    }
    index_of.emplace(item["id"].get<std::string>(), position++);
  }

  auto parse_vector = [](const json& arr, const std::string& where) {
    if (!arr.is_array()) throw ParseError(where + " must be an array of rational strings");
    RVector out(arr.size());
    Eigen::Index i = 0;
    for (const auto& item : arr) {
      if (!item.is_string()) throw ParseError(where + " must contain rational strings");
      out(i++) = parse_rational(item.get<std::string>());
    }
    return out;
  };

  std::vector<Node> nodes;
  for (const auto& item : doc["nodes"]) {
    Node node;
    node.id = item["id"].get<std::string>();
    if (!item.contains("time") || !item["time"].is_number_integer()) {
      throw ParseError("node " + node.id + " needs an integer time");
    }
    node.time = item["time"].get<int>();
    if (!item.contains("parent")) throw ParseError("node " + node.id + " needs a parent");
    if (item["parent"].is_null()) {
      node.parent = -1;
    } else if (item["parent"].is_string()) {
      auto found = index_of.find(item["parent"].get<std::string>());
      if (found == index_of.end()) {
        throw StructuralError("node " + node.id + " references unknown parent " +
                              item["parent"].get<std::string>());
      }
      node.parent = found->second;
    } else {
      throw ParseError("node " + node.id + " parent must be a node id or null");
    }
    if (!item.contains("S")) throw ParseError("node " + node.id + " needs a stock vector S");
    node.stock = parse_vector(item["S"], "node " + node.id + " S");
    if (!item.contains("phi") || !item["phi"].is_string()) {
      throw ParseError("node " + node.id + " needs a rational string phi");
    }
    node.exercise_payoff = parse_rational(item["phi"].get<std::string>());
    const bool leaf = node.time == horizon;
    if (item.contains("g")) {
      RVector g = parse_vector(item["g"], "node " + node.id + " g");
      if (!leaf && g.size() != 0) {
        throw StructuralError("inner node " + node.id + " carries option payoffs");
      }
      node.option_payoff = std::move(g);
    }
    if (leaf && node.option_payoff.size() == 0 && option_count != 0) {
      throw StructuralError("leaf " + node.id + " is missing its option payoffs");
    }
    nodes.push_back(std::move(node));
  }
  return Instance(horizon, stock_dim, option_count, std::move(nodes));
}

Instance parse_instance(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return load_instance(doc);
}

json to_json(const Instance& inst) {
  json doc;
  doc["horizon"] = inst.horizon();
  doc["stock_dim"] = inst.stock_dim();
  doc["option_count"] = inst.option_count();
  doc["nodes"] = json::array();
  for (int v = 0; v < inst.node_count(); ++v) {
    const Node& node = inst.node(v);
    json item;
    item["id"] = node.id;
    item["time"] = node.time;
    item["parent"] = node.parent < 0 ? json(nullptr) : json(inst.node(node.parent).id);
    json stock = json::array();
    for (Eigen::Index i = 0; i < node.stock.size(); ++i) {
      stock.push_back(format_rational(node.stock(i)));
    }
    item["S"] = std::move(stock);
    item["phi"] = format_rational(node.exercise_payoff);
    if (inst.is_leaf(v)) {
      json g = json::array();
      for (Eigen::Index k = 0; k < node.option_payoff.size(); ++k) {
        g.push_back(format_rational(node.option_payoff(k)));
      }
      item["g"] = std::move(g);
    }
    doc["nodes"].push_back(std::move(item));
  }
  return doc;
}

std::string serialize(const Instance& inst) { return to_json(inst).dump(2); }

namespace {

Node make_node(std::string id, int time, int parent, std::vector<Rational> stock, Rational phi,
               std::vector<Rational> g = {}) {
  Node node;
  node.id = std::move(id);
  node.time = time;
  node.parent = parent;
  node.stock = RVector(stock.size());
  for (std::size_t i = 0; i < stock.size(); ++i) node.stock(static_cast<Eigen::Index>(i)) = stock[i];
  node.exercise_payoff = std::move(phi);
  node.option_payoff = RVector(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) node.option_payoff(static_cast<Eigen::Index>(i)) = g[i];
  return node;
}

Rational positive_part(const Rational& x) { return x > 0 ? x : Rational(0); }

Instance binary_put_tree(bool zero_payoff) {
  auto put = [&](const Rational& s) {
    return zero_payoff ? Rational(0) : positive_part(Rational(2 - s));
  };
  std::vector<Node> nodes;
  nodes.push_back(make_node("n0", 0, -1, {Rational(2)}, put(2)));
  nodes.push_back(make_node("n1", 1, 0, {Rational(1)}, put(1)));
  nodes.push_back(make_node("n2", 1, 0, {Rational(3)}, put(3)));
  auto claim = [](const Rational& s) {
    return Rational(positive_part(Rational(s - 2)) - Rational(1, 2));
  };
  nodes.push_back(make_node("n3", 2, 1, {Rational(0)}, put(0), {claim(0)}));
  nodes.push_back(make_node("n4", 2, 1, {Rational(2)}, put(2), {claim(2)}));
  nodes.push_back(make_node("n5", 2, 2, {Rational(2)}, put(2), {claim(2)}));
  nodes.push_back(make_node("n6", 2, 2, {Rational(4)}, put(4), {claim(4)}));
  return Instance(2, 1, 1, std::move(nodes));
}

}  // namespace

Instance fixture(const std::string& name) {
  if (name == "INST_BIN") return binary_put_tree(false);
  if (name == "INST_ZERO") return binary_put_tree(true);
  if (name == "INST_SINGLE") {
    std::vector<Node> nodes;
    nodes.push_back(make_node("n0", 0, -1, {Rational(1)}, Rational(0)));
    nodes.push_back(make_node("n1", 1, 0, {Rational(1)}, Rational(3)));
    nodes.push_back(make_node("n2", 2, 1, {Rational(1)}, Rational(1)));
    return Instance(2, 1, 0, std::move(nodes));
  }
  if (name == "INST_GAP") {
    std::vector<Node> nodes;
    nodes.push_back(make_node("n0", 0, -1, {Rational(2)}, Rational(1, 3)));
    nodes.push_back(make_node("n1", 1, 0, {Rational(1)}, Rational(1), {Rational(-1, 3)}));
    nodes.push_back(make_node("n2", 1, 0, {Rational(2)}, Rational(0), {Rational(-1, 3)}));
    nodes.push_back(make_node("n3", 1, 0, {Rational(4)}, Rational(0), {Rational(5, 3)}));
    return Instance(1, 1, 1, std::move(nodes));
  }
  throw ParseError("unknown fixture \"" + name + "\"");
}

std::vector<std::string> fixture_names() {
  return {"INST_ZERO", "INST_SINGLE", "INST_BIN", "INST_GAP"};
}

namespace {

// Feasibility program for a dominating position: gains >= 0 on every leaf and
// total gain >= 1.  Feasible exactly when the market admits arbitrage.
LPSolution solve_arbitrage_lp(const Instance& inst, std::vector<int>& inner,
                              std::vector<int>& var_of_inner, int& option_var0,
                              LinearProgram& lp) {
  const int d = inst.stock_dim();
  for (int v = 0; v < inst.node_count(); ++v) {
    if (!inst.is_leaf(v)) {
      var_of_inner[v] = lp.variable_count();
      inner.push_back(v);
      for (int i = 0; i < d; ++i) lp.add_variable("H_" + inst.node(v).id + "_" + std::to_string(i));
    }
  }
  option_var0 = lp.variable_count();
  for (int k = 0; k < inst.option_count(); ++k) lp.add_variable("h_" + std::to_string(k));

  RVector total = RVector::Zero(lp.variable_count());
  for (int leaf : inst.leaves()) {
    std::vector<LinearTerm> terms;
    RVector coeff = RVector::Zero(lp.variable_count());
    for (int v = leaf; v != inst.root(); v = inst.node(v).parent) {
      const RVector step = inst.increment(v);
      const int base = var_of_inner[inst.node(v).parent];
      for (int i = 0; i < d; ++i) coeff(base + i) += step(i);
    }
    for (int k = 0; k < inst.option_count(); ++k) {
      coeff(option_var0 + k) += inst.node(leaf).option_payoff(k);
    }
    for (int j = 0; j < lp.variable_count(); ++j) {
      if (coeff(j) != 0) terms.push_back({j, coeff(j)});
    }
    total += coeff;
    lp.add_constraint(std::move(terms), Relation::GreaterEqual, Rational(0),
                      "gain_" + inst.node(leaf).id);
  }
  std::vector<LinearTerm> total_terms;
  for (int j = 0; j < lp.variable_count(); ++j) {
    if (total(j) != 0) total_terms.push_back({j, total(j)});
  }
  lp.add_constraint(std::move(total_terms), Relation::GreaterEqual, Rational(1), "strict_gain");
  lp.set_objective(Sense::Minimize, {});
  return solve(lp);
}

// Best uniform lower bound on leaf weights over calibrated martingale
// measures; positive optimum certifies no-arbitrage.
LPSolution solve_support_margin_lp(const Instance& inst, LinearProgram& lp) {
  const int n_leaves = static_cast<int>(inst.leaves().size());
  for (int l = 0; l < n_leaves; ++l) {
    lp.add_variable("q_" + inst.node(inst.leaves()[l]).id, Rational(0));
  }
  const int t = lp.add_variable("margin");
  for (int l = 0; l < n_leaves; ++l) {
    lp.add_constraint({{l, Rational(1)}, {t, Rational(-1)}}, Relation::GreaterEqual, Rational(0));
  }
  std::vector<LinearTerm> mass;
  for (int l = 0; l < n_leaves; ++l) mass.push_back({l, Rational(1)});
  lp.add_constraint(std::move(mass), Relation::Equal, Rational(1), "total_mass");
  const RMatrix mart = martingale_system(inst);
  for (Eigen::Index r = 0; r < mart.rows(); ++r) {
    std::vector<LinearTerm> terms;
    for (int l = 0; l < n_leaves; ++l) {
      if (mart(r, l) != 0) terms.push_back({l, mart(r, l)});
    }
    lp.add_constraint(std::move(terms), Relation::Equal, Rational(0));
  }
  const RMatrix calib = calibration_system(inst);
  for (Eigen::Index r = 0; r < calib.rows(); ++r) {
    std::vector<LinearTerm> terms;
    for (int l = 0; l < n_leaves; ++l) {
      if (calib(r, l) != 0) terms.push_back({l, calib(r, l)});
    }
    lp.add_constraint(std::move(terms), Relation::Equal, Rational(0));
  }
  lp.set_objective(Sense::Maximize, {{t, Rational(1)}});
  return solve(lp);
}

}  // namespace

NoArbitrageReport check_no_arbitrage(const Instance& inst) {
  std::vector<int> inner;
  std::vector<int> var_of_inner(inst.node_count(), -1);
  int option_var0 = 0;
  LinearProgram arb_lp;
  const LPSolution arb = solve_arbitrage_lp(inst, inner, var_of_inner, option_var0, arb_lp);
  if (arb.status == SolveStatus::Unbounded) {
    throw std::logic_error("arbitrage feasibility program cannot be unbounded");
  }
  const bool has_arbitrage = arb.status == SolveStatus::Optimal;

  LinearProgram margin_lp;
  const LPSolution margin = solve_support_margin_lp(inst, margin_lp);
  const bool positive_measure_exists =
      margin.status == SolveStatus::Optimal && margin.objective > 0;
  if (has_arbitrage == positive_measure_exists) {
    throw std::logic_error("no-arbitrage characterizations disagree");
  }

  NoArbitrageReport report;
  report.ok = !has_arbitrage;
  if (has_arbitrage) {
    ArbitrageStrategy strategy;
    strategy.stock_position.resize(inst.node_count());
    for (int v : inner) {
      strategy.stock_position[v] = arb.primal.segment(var_of_inner[v], inst.stock_dim());
    }
    strategy.option_position = arb.primal.segment(option_var0, inst.option_count());
    report.arbitrage = std::move(strategy);
    report.support_margin = margin.status == SolveStatus::Optimal ? margin.objective : Rational(0);
  } else {
    report.positive_measure = margin.primal.head(inst.leaves().size());
    report.support_margin = margin.objective;
  }
  return report;
}

ReductionResult reduce_redundant_options(const Instance& inst) {
  std::vector<int> original(inst.option_count());
  for (int k = 0; k < inst.option_count(); ++k) original[k] = k;
  Instance current = inst;
  std::vector<int> removed;

  std::vector<int> inner;
  for (int v = 0; v < inst.node_count(); ++v) {
    if (!inst.is_leaf(v)) inner.push_back(v);
  }
  const int d = inst.stock_dim();
  const int n_leaves = static_cast<int>(inst.leaves().size());

  bool changed = true;
  while (changed && current.option_count() > 0) {
    changed = false;
    for (int k = 0; k < current.option_count(); ++k) {
      // Unknowns: a dynamic position per inner node plus weights on the other
      // options; option k is redundant when they replicate -g_k on all leaves.
      const int cols = d * static_cast<int>(inner.size()) + current.option_count() - 1;
      RMatrix a = RMatrix::Zero(n_leaves, cols);
      RVector b(n_leaves);
      for (int l = 0; l < n_leaves; ++l) {
        const int leaf = current.leaves()[l];
        for (int v = leaf; v != current.root(); v = current.node(v).parent) {
          const RVector step = current.increment(v);
          const auto it = std::find(inner.begin(), inner.end(), current.node(v).parent);
          const int base = d * static_cast<int>(it - inner.begin());
          for (int i = 0; i < d; ++i) a(l, base + i) += step(i);
        }
        int col = d * static_cast<int>(inner.size());
        for (int j = 0; j < current.option_count(); ++j) {
          if (j == k) continue;
          a(l, col++) = current.node(leaf).option_payoff(j);
        }
        b(l) = -current.node(leaf).option_payoff(k);
      }
      if (!solve_linear_system(a, b)) continue;

      removed.push_back(original[k]);
      original.erase(original.begin() + k);
      std::vector<Node> nodes;
      for (int v = 0; v < current.node_count(); ++v) {
        Node node = current.node(v);
        if (current.is_leaf(v)) {
          RVector g(node.option_payoff.size() - 1);
          Eigen::Index w = 0;
          for (Eigen::Index j = 0; j < node.option_payoff.size(); ++j) {
            if (j != k) g(w++) = node.option_payoff(j);
          }
          node.option_payoff = std::move(g);
        }
        nodes.push_back(std::move(node));
      }
      current = Instance(current.horizon(), current.stock_dim(), current.option_count() - 1,
                         std::move(nodes));
      changed = true;
      break;
    }
  }
  std::sort(removed.begin(), removed.end());
  return {std::move(current), std::move(removed)};
}

}  // namespace semistatic
