#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "doctest.h"
#include "semistatic/cli.hpp"
#include "semistatic/dual.hpp"
#include "semistatic/market_tree.hpp"

using namespace semistatic;

namespace {

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult invoke(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  REQUIRE(out.good());
  out << text;
}

Instance gap_with_replicable_forward() {
  const Instance gap = fixture("INST_GAP");
  std::vector<Node> raw;
  for (int v = 0; v < gap.node_count(); ++v) {
    Node node = gap.node(v);
    node.children.clear();
    if (gap.is_leaf(v)) {
      RVector g(2);
      g(0) = node.option_payoff(0);
      g(1) = Rational(node.stock(0) - gap.node(gap.root()).stock(0));
      node.option_payoff = std::move(g);
    }
    raw.push_back(std::move(node));
  }
  return Instance(gap.horizon(), gap.stock_dim(), 2, std::move(raw));
}

Instance rising_market() {
  std::vector<Node> raw;
  auto add = [&](std::string id, int time, int parent, Rational s, Rational phi) {
    Node node;
    node.id = std::move(id);
    node.time = time;
    node.parent = parent;
    node.stock = RVector(1);
    node.stock(0) = s;
    node.exercise_payoff = phi;
    raw.push_back(std::move(node));
  };
  add("r", 0, -1, 1, 0);
  add("a", 1, 0, 2, 0);
  add("b", 1, 0, 3, 1);
  return Instance(1, 1, 0, std::move(raw));
}

}  // namespace

TEST_CASE("price command on fixtures and files") {
  const CliResult direct = invoke({"price", "--fixture", "INST_SINGLE"});
  CHECK(direct.code == 0);
  CHECK(json::parse(direct.out)["pi"] == "3");

  write_file("cli_gap.json", serialize(fixture("INST_GAP")));
  const CliResult from_file = invoke({"price", "cli_gap.json", "--verify"});
  CHECK(from_file.code == 0);
  const json doc = json::parse(from_file.out);
  CHECK(doc["pi"] == "1/2");
  CHECK(doc["verified"] == true);
  CHECK(doc["strategy"]["x"] == "1/2");
}

TEST_CASE("check command reports structure and redundancy") {
  const CliResult clean = invoke({"check", "--fixture", "INST_GAP"});
  CHECK(clean.code == 0);
  const json doc = json::parse(clean.out);
  CHECK(doc["ok"] == true);
  CHECK(doc["node_count"] == 4);
  CHECK(doc["redundant_option_indices"].empty());
  CHECK_FALSE(doc.contains("warning"));

  write_file("cli_forward.json", serialize(gap_with_replicable_forward()));
  const CliResult redundant = invoke({"check", "cli_forward.json"});
  CHECK(redundant.code == 0);
  const json warn = json::parse(redundant.out);
  CHECK(warn["ok"] == true);
  REQUIRE(warn["redundant_option_indices"].size() == 1);
  CHECK(warn["redundant_option_indices"][0] == 1);
  CHECK(warn.contains("warning"));
}

TEST_CASE("check rejects arbitrage with a certificate") {
  write_file("cli_rising.json", serialize(rising_market()));
  const CliResult result = invoke({"check", "cli_rising.json"});
  CHECK(result.code == 1);
  const json doc = json::parse(result.out);
  CHECK(doc["ok"] == false);
  CHECK(doc["arbitrage"]["stock_position"].size() >= 1);
}

TEST_CASE("dual methods and the combined report") {
  const CliResult all = invoke({"dual", "--fixture", "INST_GAP", "--method", "all"});
  CHECK(all.code == 0);
  const json report = json::parse(all.out);
  CHECK(report["pi_primal"] == "1/2");
  CHECK(report["pi_e1"] == "1/2");
  CHECK(report["pi_e2"] == "1/2");
  CHECK(report["pi_nature"] == "1/2");
  CHECK(report["model_sup"] == "1/3");
  CHECK(report["gap"] == "1/6");

  CHECK(json::parse(invoke({"dual", "--fixture", "INST_GAP", "--method", "e1"}).out)["value"] ==
        "1/2");
  const json e2 = json::parse(invoke({"dual", "--fixture", "INST_GAP", "--method", "e2"}).out);
  CHECK(e2["value"] == "1/2");
  CHECK(e2["components"] == 2);
  CHECK(json::parse(invoke({"dual", "--fixture", "INST_GAP", "--method", "nature"}).out)["value"] ==
        "1/2");
  CHECK(json::parse(
            invoke({"dual", "--fixture", "INST_GAP", "--method", "model-sup"}).out)["value"] ==
        "1/3");

  const CliResult repeat = invoke({"dual", "--fixture", "INST_GAP", "--method", "all"});
  CHECK(repeat.out == all.out);  // byte-stable report
}

TEST_CASE("gap, oracle, and corollary commands") {
  const json gap = json::parse(invoke({"gap", "--fixture", "INST_GAP"}).out);
  CHECK(gap["pi"] == "1/2");
  CHECK(gap["model_sup"] == "1/3");
  CHECK(gap["gap"] == "1/6");

  const CliResult oracle = invoke({"oracle", "--fixture", "INST_BIN"});
  CHECK(oracle.code == 0);
  CHECK(json::parse(oracle.out)["ok"] == true);

  const CliResult corollary = invoke({"corollary", "--fixture", "INST_ZERO"});
  CHECK(corollary.code == 0);
  const json chain = json::parse(corollary.out);
  CHECK(chain["equal"] == true);
  CHECK(chain["pi"] == "0");
  CHECK(chain["sup_nature"] == "0");
  CHECK(chain["sup_randomized"] == "0");
}

TEST_CASE("generation is deterministic and arbitrage-free") {
  const CliResult first = invoke({"gen", "--seed", "42", "--count", "2"});
  CHECK(first.code == 0);
  const CliResult second = invoke({"gen", "--seed", "42", "--count", "2"});
  CHECK(first.out == second.out);
  const json doc = json::parse(first.out);
  REQUIRE(doc["instances"].size() == 2);
  for (const json& item : doc["instances"]) {
    const Instance inst = load_instance(item);
    CHECK(check_no_arbitrage(inst).ok);
  }
}

TEST_CASE("gap search finds positive-gap instances through the CLI") {
  const CliResult result =
      invoke({"gen", "--seed", "11", "--profile", "gap-search", "--count", "2", "--attempts",
              "2000"});
  CHECK(result.code == 0);
  const json doc = json::parse(result.out);
  CHECK(doc["found"] == 2);
  REQUIRE(doc["instances"].size() == 2);
  for (const json& item : doc["instances"]) {
    const Instance inst = load_instance(item);
    CHECK(check_no_arbitrage(inst).ok);
    CHECK(duality_gap(inst).gap > 0);
  }

  const CliResult parallel =
      invoke({"--jobs", "2", "gen", "--seed", "11", "--profile", "gap-search", "--count", "2",
              "--attempts", "2000"});
  CHECK(parallel.out == result.out);
}

TEST_CASE("fixtures listing and emission") {
  const json list = json::parse(invoke({"fixtures"}).out);
  bool has_gap = false;
  for (const json& name : list["fixtures"]) has_gap |= name == "INST_GAP";
  CHECK(has_gap);

  const CliResult emitted = invoke({"fixtures", "--name", "INST_GAP", "--emit"});
  CHECK(emitted.code == 0);
  CHECK(load_instance(json::parse(emitted.out)).node_count() == 4);

  const json summary = json::parse(invoke({"fixtures", "--name", "INST_BIN"}).out);
  CHECK(summary["node_count"] == 7);
}

TEST_CASE("pretty and approximate renderings") {
  const CliResult pretty = invoke({"price", "--fixture", "INST_SINGLE", "--pretty"});
  CHECK(pretty.code == 0);
  CHECK(pretty.out.find("pi: 3") != std::string::npos);
  CHECK(pretty.out.find('{') == std::string::npos);

  const CliResult approx = invoke({"gap", "--fixture", "INST_GAP", "--approx"});
  CHECK(approx.code == 0);
  CHECK(approx.out.find("1/6 (~0.166667)") != std::string::npos);
}

TEST_CASE("exit codes distinguish usage, input, and success") {
  CHECK(invoke({}).code == 3);
  CHECK(invoke({"price"}).code == 3);
  CHECK(invoke({"price", "cli_gap.json", "--fixture", "INST_GAP"}).code == 3);
  CHECK(invoke({"dual", "--fixture", "INST_GAP", "--method", "bogus"}).code == 3);
  CHECK(invoke({"frobnicate"}).code == 3);
  CHECK(invoke({"price", "--fixture", "NO_SUCH"}).code == 1);
  CHECK(invoke({"price", "missing_file.json"}).code == 1);
  write_file("cli_rising.json", serialize(rising_market()));
  CHECK(invoke({"price", "cli_rising.json"}).code == 1);

  const CliResult help = invoke({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("semistatic") != std::string::npos);
}
