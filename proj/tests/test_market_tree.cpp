#include "doctest.h"

#include <vector>

#include "semistatic/market_tree.hpp"

using namespace semistatic;

namespace {

Node raw_node(std::string id, int time, int parent, std::vector<Rational> stock, Rational phi,
              std::vector<Rational> g = {}) {
  Node node;
  node.id = std::move(id);
  node.time = time;
  node.parent = parent;
  node.stock = RVector(stock.size());
  for (std::size_t i = 0; i < stock.size(); ++i) node.stock(i) = stock[i];
  node.exercise_payoff = phi;
  node.option_payoff = RVector(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) node.option_payoff(i) = g[i];
  return node;
}

// INST_GAP tree with a second option appended on the leaves.
Instance gap_with_extra_option(std::vector<Rational> extra) {
  Instance base = fixture("INST_GAP");
  std::vector<Node> nodes;
  for (int v = 0; v < base.node_count(); ++v) {
    Node node = base.node(v);
    if (base.is_leaf(v)) {
      RVector g(2);
      g(0) = node.option_payoff(0);
      g(1) = extra[static_cast<std::size_t>(base.leaf_ordinal(v))];
      node.option_payoff = g;
    }
    nodes.push_back(node);
  }
  return Instance(base.horizon(), base.stock_dim(), 2, std::move(nodes));
}

}  // namespace

TEST_CASE("fixtures have the expected shape") {
  Instance bin = fixture("INST_BIN");
  CHECK(bin.horizon() == 2);
  CHECK(bin.node_count() == 7);
  CHECK(bin.leaves().size() == 4);
  CHECK(bin.option_count() == 1);
  CHECK(bin.node(1).exercise_payoff == Rational(1));  // put at S = 1
  CHECK(bin.node(3).exercise_payoff == Rational(2));  // put at S = 0
  CHECK(bin.node(3).option_payoff(0) == Rational(-1, 2));
  CHECK(bin.node(6).option_payoff(0) == Rational(3, 2));

  Instance zero = fixture("INST_ZERO");
  for (int v = 0; v < zero.node_count(); ++v) CHECK(zero.node(v).exercise_payoff == 0);
  CHECK(zero.option_count() == 1);

  Instance single = fixture("INST_SINGLE");
  CHECK(single.node_count() == 3);
  CHECK(single.option_count() == 0);
  CHECK(single.leaves().size() == 1);

  Instance gap = fixture("INST_GAP");
  CHECK(gap.horizon() == 1);
  CHECK(gap.node_count() == 4);
  CHECK(gap.node(0).exercise_payoff == Rational(1, 3));

  CHECK_THROWS_AS(fixture("INST_NOPE"), ParseError);
}

TEST_CASE("serialization round-trips field by field") {
  for (const std::string& name : fixture_names()) {
    Instance inst = fixture(name);
    Instance back = parse_instance(serialize(inst));
    CHECK(back == inst);
  }
}

TEST_CASE("ancestors and increments") {
  Instance bin = fixture("INST_BIN");
  const int leaf = bin.leaves()[3];  // n6
  CHECK(bin.node(leaf).id == "n6");
  CHECK(bin.ancestor_at(leaf, 0) == 0);
  CHECK(bin.node(bin.ancestor_at(leaf, 1)).id == "n2");
  CHECK(bin.increment(leaf)(0) == Rational(1));  // 4 - 3
  CHECK(bin.payoff_bound() == Rational(3));      // 1 + put at S = 0
}

TEST_CASE("martingale and calibration systems") {
  Instance gap = fixture("INST_GAP");
  RMatrix mart = martingale_system(gap);
  REQUIRE(mart.rows() == 1);
  CHECK(mart(0, 0) == Rational(-1));
  CHECK(mart(0, 1) == Rational(0));
  CHECK(mart(0, 2) == Rational(2));
  RMatrix calib = calibration_system(gap);
  REQUIRE(calib.rows() == 1);
  CHECK(calib(0, 2) == Rational(5, 3));

  Instance bin = fixture("INST_BIN");
  CHECK(martingale_system(bin).rows() == 3);
  CHECK(martingale_system(bin).cols() == 4);
}

TEST_CASE("structural validation rejects malformed trees") {
  auto build = [](std::vector<Node> nodes, int horizon = 1, int d = 1, int e = 0) {
    return Instance(horizon, d, e, std::move(nodes));
  };
  // duplicate id
  CHECK_THROWS_AS(build({raw_node("n0", 0, -1, {Rational(1)}, 0),
                         raw_node("n0", 1, 0, {Rational(1)}, 0)}),
                  StructuralError);
  // two roots
  CHECK_THROWS_AS(build({raw_node("a", 0, -1, {Rational(1)}, 0),
                         raw_node("b", 0, -1, {Rational(1)}, 0)}),
                  StructuralError);
  // child skips a period
  CHECK_THROWS_AS(build({raw_node("a", 0, -1, {Rational(1)}, 0),
                         raw_node("b", 1, 0, {Rational(1)}, 0),
                         raw_node("c", 1, 1, {Rational(1)}, 0)},
                        1),
                  StructuralError);
  // inner node without children
  CHECK_THROWS_AS(build({raw_node("a", 0, -1, {Rational(1)}, 0),
                         raw_node("b", 1, 0, {Rational(1)}, 0)},
                        2),
                  StructuralError);
  // wrong stock dimension
  CHECK_THROWS_AS(build({raw_node("a", 0, -1, {Rational(1), Rational(2)}, 0),
                         raw_node("b", 1, 0, {Rational(1)}, 0)}),
                  StructuralError);
  // leaf missing option payoffs
  CHECK_THROWS_AS(build({raw_node("a", 0, -1, {Rational(1)}, 0),
                         raw_node("b", 1, 0, {Rational(1)}, 0)},
                        1, 1, 1),
                  StructuralError);
}

TEST_CASE("loader rejects malformed documents") {
  CHECK_THROWS_AS(parse_instance("not json"), ParseError);
  CHECK_THROWS_AS(parse_instance("{}"), ParseError);
  CHECK_THROWS_AS(parse_instance(R"({"horizon": 1, "stock_dim": 1, "option_count": 0,
    "nodes": [{"id": "a", "time": 0, "parent": null, "S": ["1/0"], "phi": "0"}]})"),
                  ParseError);
  // option payoffs on an inner node
  CHECK_THROWS_AS(parse_instance(R"({"horizon": 1, "stock_dim": 1, "option_count": 1, "nodes": [
      {"id": "a", "time": 0, "parent": null, "S": ["1"], "phi": "0", "g": ["1"]},
      {"id": "b", "time": 1, "parent": "a", "S": ["1"], "phi": "0", "g": ["0"]}]})"),
                  StructuralError);
  // unknown parent
  CHECK_THROWS_AS(parse_instance(R"({"horizon": 1, "stock_dim": 1, "option_count": 0, "nodes": [
      {"id": "a", "time": 0, "parent": null, "S": ["1"], "phi": "0"},
      {"id": "b", "time": 1, "parent": "zz", "S": ["1"], "phi": "0"}]})"),
                  StructuralError);
}

TEST_CASE("fixtures admit no arbitrage, with the known positive measures") {
  for (const std::string& name : fixture_names()) {
    NoArbitrageReport report = check_no_arbitrage(fixture(name));
    CHECK(report.ok);
    REQUIRE(report.positive_measure.has_value());
    CHECK(report.support_margin > 0);
  }
  NoArbitrageReport bin = check_no_arbitrage(fixture("INST_BIN"));
  REQUIRE(bin.positive_measure->size() == 4);
  for (int l = 0; l < 4; ++l) CHECK((*bin.positive_measure)(l) == Rational(1, 4));
  CHECK(bin.support_margin == Rational(1, 4));

  NoArbitrageReport gap = check_no_arbitrage(fixture("INST_GAP"));
  CHECK((*gap.positive_measure)(0) == Rational(1, 3));
  CHECK((*gap.positive_measure)(1) == Rational(1, 2));
  CHECK((*gap.positive_measure)(2) == Rational(1, 6));
  CHECK(gap.support_margin == Rational(1, 6));
}

TEST_CASE("a dominated option price is arbitrage, and the certificate checks out") {
  // Second option pays (0, 0, 1) at zero cost: buying it dominates zero.
  Instance bad = gap_with_extra_option({Rational(0), Rational(0), Rational(1)});
  NoArbitrageReport report = check_no_arbitrage(bad);
  CHECK_FALSE(report.ok);
  REQUIRE(report.arbitrage.has_value());
  const ArbitrageStrategy& strat = *report.arbitrage;
  Rational total = 0;
  for (int l = 0; l < 3; ++l) {
    const int leaf = bad.leaves()[l];
    Rational gain = strat.stock_position[0].dot(bad.increment(leaf));
    gain += strat.option_position.dot(bad.node(leaf).option_payoff);
    CHECK(gain >= 0);
    total += gain;
  }
  CHECK(total >= 1);
}

TEST_CASE("a drifting stock is arbitrage through dynamic trading alone") {
  std::vector<Node> nodes = {raw_node("r", 0, -1, {Rational(2)}, 0),
                             raw_node("u", 1, 0, {Rational(3)}, 0),
                             raw_node("d", 1, 0, {Rational(4)}, 0)};
  Instance drift(1, 1, 0, std::move(nodes));
  NoArbitrageReport report = check_no_arbitrage(drift);
  CHECK_FALSE(report.ok);
  REQUIRE(report.arbitrage.has_value());
  CHECK(report.arbitrage->stock_position[0](0) > 0);
}

TEST_CASE("redundant options are detected and removed") {
  Instance base = fixture("INST_BIN");
  // Appended forward payoff S_2 - 2 is replicable by holding one share.
  std::vector<Node> nodes;
  for (int v = 0; v < base.node_count(); ++v) {
    Node node = base.node(v);
    if (base.is_leaf(v)) {
      RVector g(2);
      g(0) = node.option_payoff(0);
      g(1) = node.stock(0) - Rational(2);
      node.option_payoff = g;
    }
    nodes.push_back(node);
  }
  // The binary tree is a complete market, so both options are replicable.
  Instance padded(2, 1, 2, std::move(nodes));
  ReductionResult reduced = reduce_redundant_options(padded);
  CHECK(reduced.removed == std::vector<int>{0, 1});
  CHECK(reduced.instance.option_count() == 0);

  // A duplicated option column is redundant; the survivor is not.
  Instance doubled = gap_with_extra_option({Rational(-1, 3), Rational(-1, 3), Rational(5, 3)});
  ReductionResult dedup = reduce_redundant_options(doubled);
  CHECK(dedup.removed == std::vector<int>{0});
  CHECK(dedup.instance == fixture("INST_GAP"));

  // Trinomial leaves cannot be spanned by one stock, so INST_GAP keeps its
  // option; INST_SINGLE has none.  INST_BIN and INST_ZERO are complete.
  CHECK(reduce_redundant_options(fixture("INST_GAP")).removed.empty());
  CHECK(reduce_redundant_options(fixture("INST_SINGLE")).removed.empty());
  CHECK(reduce_redundant_options(fixture("INST_BIN")).removed == std::vector<int>{0});
  CHECK(reduce_redundant_options(fixture("INST_ZERO")).removed == std::vector<int>{0});
}
