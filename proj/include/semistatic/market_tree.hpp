#ifndef SEMISTATIC_MARKET_TREE_HPP
#define SEMISTATIC_MARKET_TREE_HPP

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "semistatic/rational.hpp"

namespace semistatic {

using json = nlohmann::ordered_json;

struct Node {
  std::string id;
  int time = 0;
  int parent = -1;  // node index, -1 for the root
  RVector stock;
  Rational exercise_payoff;
  RVector option_payoff;  // leaves carry e entries, inner nodes none
  std::vector<int> children;

  bool operator==(const Node& other) const;
};

// A finite filtered market tree of depth `horizon`.  Nodes at the horizon are
// exactly the leaves; every inner node has at least one child.  The node
// order, and hence the child and leaf order, is the order of construction.
class Instance {
 public:
  Instance(int horizon, int stock_dim, int option_count, std::vector<Node> nodes);

  int horizon() const { return horizon_; }
  int stock_dim() const { return stock_dim_; }
  int option_count() const { return option_count_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int v) const { return nodes_[v]; }
  int root() const { return root_; }
  bool is_leaf(int v) const { return nodes_[v].children.empty(); }
  const std::vector<int>& leaves() const { return leaves_; }
  const std::vector<int>& nodes_at(int time) const { return by_time_[time]; }
  int leaf_ordinal(int v) const { return leaf_ordinal_[v]; }  // -1 for inner nodes

  // Node on the path to `leaf_node` at the given time (time <= leaf time).
  int ancestor_at(int leaf_node, int time) const;
  // Stock increment along the edge into `child`.
  RVector increment(int child) const;
  // 1 + the largest |exercise payoff| anywhere in the tree.
  Rational payoff_bound() const;

  bool operator==(const Instance& other) const;

 private:
  int horizon_;
  int stock_dim_;
  int option_count_;
  std::vector<Node> nodes_;
  std::vector<int> leaves_;
  std::vector<int> leaf_ordinal_;
  std::vector<std::vector<int>> by_time_;
  int root_ = -1;
};

// Linear description of the martingale measures in leaf-weight space.  Rows
// are one per inner node and stock coordinate; a nonnegative leaf-weight
// vector q with sum 1 is a martingale measure iff martingale_system(inst) q = 0.
RMatrix martingale_system(const Instance& inst);
// e rows of option payoffs per leaf; calibration means calibration_system * q = 0.
RMatrix calibration_system(const Instance& inst);

Instance load_instance(const json& doc);
Instance parse_instance(const std::string& text);
json to_json(const Instance& inst);
std::string serialize(const Instance& inst);

// Named fixtures used across tests and the command line: INST_ZERO,
// INST_SINGLE, INST_BIN, INST_GAP.
Instance fixture(const std::string& name);
std::vector<std::string> fixture_names();

// Dynamic positions per inner node plus a static option position whose total
// payoff dominates zero and is strictly positive somewhere.
struct ArbitrageStrategy {
  std::vector<RVector> stock_position;  // indexed by node, empty on leaves
  RVector option_position;
};

struct NoArbitrageReport {
  bool ok = false;
  std::optional<ArbitrageStrategy> arbitrage;       // present when ok is false
  std::optional<RVector> positive_measure;          // strictly positive calibrated
  Rational support_margin;                          // optimal min leaf weight
};

// Decides no-arbitrage two independent ways (absence of a dominating
// semi-static position, and existence of a strictly positive calibrated
// martingale measure) and insists they agree.
NoArbitrageReport check_no_arbitrage(const Instance& inst);

struct ReductionResult {
  Instance instance;
  std::vector<int> removed;  // original option indices, ascending
};

// Iteratively drops every option replicable by dynamic trading plus the other
// options; the reduced instance has the same super-hedging price.
ReductionResult reduce_redundant_options(const Instance& inst);

}  // namespace semistatic

#endif
