#include "semistatic/cli.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "semistatic/dual.hpp"
#include "semistatic/market_tree.hpp"
#include "semistatic/oracle.hpp"
#include "semistatic/randomized.hpp"
#include "semistatic/stopping.hpp"
#include "semistatic/superhedge.hpp"

namespace semistatic {

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Instance read_target(const std::string& path, const std::string& fixture_name) {
  if (!path.empty() && !fixture_name.empty()) {
    throw UsageError("pass an instance file or --fixture, not both");
  }
  if (path.empty() && fixture_name.empty()) {
    throw UsageError("an instance file or --fixture NAME is required");
  }
  if (!fixture_name.empty()) return fixture(fixture_name);
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_instance(buffer.str());
}

json rational_array(const RVector& values) {
  json out = json::array();
  for (Eigen::Index i = 0; i < values.size(); ++i) out.push_back(format_rational(values(i)));
  return out;
}

// Appends a decimal rendering to every string holding an exact rational.
void annotate_decimals(json& doc) {
  if (doc.is_object() || doc.is_array()) {
    for (json& value : doc) annotate_decimals(value);
    return;
  }
  if (!doc.is_string()) return;
  const std::string text = doc.get<std::string>();
  try {
    const Rational value = parse_rational(text);
    char approx[48];
    std::snprintf(approx, sizeof approx, "%.6g", value.convert_to<double>());
    doc = text + " (~" + approx + ")";
  } catch (const ParseError&) {
    // Not a rational; leave the string alone.
  }
}

bool scalars_only(const json& values) {
  for (const json& value : values) {
    if (value.is_object() || value.is_array()) return false;
  }
  return true;
}

std::string scalar_text(const json& value) {
  return value.is_string() ? value.get<std::string>() : value.dump();
}

void print_pretty(const json& doc, std::ostream& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  if (doc.is_object()) {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
      const json& value = it.value();
      if (value.is_array() && scalars_only(value)) {
        out << pad << it.key() << ": [";
        for (std::size_t i = 0; i < value.size(); ++i) {
          if (i > 0) out << ", ";
          out << scalar_text(value[i]);
        }
        out << "]\n";
      } else if (value.is_object() || value.is_array()) {
        out << pad << it.key() << ":\n";
        print_pretty(value, out, indent + 2);
      } else {
        out << pad << it.key() << ": " << scalar_text(value) << "\n";
      }
    }
  } else if (doc.is_array()) {
    for (const json& value : doc) {
      if (value.is_object() || value.is_array()) {
        out << pad << "-\n";
        print_pretty(value, out, indent + 2);
      } else {
        out << pad << "- " << scalar_text(value) << "\n";
      }
    }
  } else {
    out << pad << scalar_text(doc) << "\n";
  }
}

struct OutputStyle {
  bool pretty = false;
  bool approx = false;
};

void emit(json doc, std::ostream& out, const OutputStyle& style) {
  if (style.approx) annotate_decimals(doc);
  if (style.pretty) {
    print_pretty(doc, out, 0);
  } else {
    out << doc.dump(2) << "\n";
  }
}

int do_check(const Instance& inst, std::ostream& out, const OutputStyle& style) {
  json doc;
  const NoArbitrageReport na = check_no_arbitrage(inst);
  doc["ok"] = na.ok;
  doc["horizon"] = inst.horizon();
  doc["stock_dim"] = inst.stock_dim();
  doc["option_count"] = inst.option_count();
  doc["node_count"] = inst.node_count();
  doc["leaf_count"] = static_cast<int>(inst.leaves().size());
  if (!na.ok) {
    json certificate;
    json stock = json::array();
    for (int v = 0; v < inst.node_count(); ++v) {
      if (na.arbitrage->stock_position[static_cast<std::size_t>(v)].size() == 0) continue;
      json entry;
      entry["node"] = inst.node(v).id;
      entry["H"] = rational_array(na.arbitrage->stock_position[static_cast<std::size_t>(v)]);
      stock.push_back(std::move(entry));
    }
    certificate["stock_position"] = std::move(stock);
    certificate["option_position"] = rational_array(na.arbitrage->option_position);
    doc["arbitrage"] = std::move(certificate);
    emit(std::move(doc), out, style);
    return 1;
  }
  doc["support_margin"] = format_rational(na.support_margin);
  const ReductionResult reduced = reduce_redundant_options(inst);
  json indices = json::array();
  for (int k : reduced.removed) indices.push_back(k);
  doc["redundant_option_indices"] = std::move(indices);
  if (!reduced.removed.empty()) {
    doc["warning"] =
        "listed options are replicable by dynamic trading and add no hedging power";
  }
  emit(std::move(doc), out, style);
  return 0;
}

int do_price(const Instance& inst, bool verify, std::ostream& out, const OutputStyle& style) {
  const PrimalResult result = solve_primal(inst);
  json doc;
  doc["pi"] = format_rational(result.price);
  doc["strategy"] = strategy_to_json(inst, result.strategy);
  bool verified = true;
  if (verify) {
    verified = verify_superhedge(inst, result.strategy, result.price);
    doc["verified"] = verified;
  }
  emit(std::move(doc), out, style);
  return verified ? 0 : 2;
}

int do_dual(const Instance& inst, const std::string& method, std::ostream& out,
            const OutputStyle& style) {
  if (method == "all") {
    const json doc = full_report(inst);
    const bool equal = doc["pi_primal"] == doc["pi_e1"] && doc["pi_primal"] == doc["pi_e2"] &&
                       doc["pi_primal"] == doc["pi_nature"];
    emit(doc, out, style);
    return equal ? 0 : 2;
  }
  json doc;
  doc["method"] = method;
  if (method == "e1") {
    const E1Result result = solve_e1(inst);
    doc["value"] = format_rational(result.value);
    doc["h_star"] = rational_array(result.h_star);
    doc["iterations"] = result.iterations;
    doc["box_doublings"] = result.box_doublings;
  } else if (method == "e2") {
    const E2Result result = solve_e2(inst);
    doc["value"] = format_rational(result.value);
    doc["iterations"] = result.iterations;
    doc["components"] = static_cast<int>(result.mixture.components.size());
  } else if (method == "nature") {
    doc["value"] = format_rational(solve_nature_lp(inst).value);
  } else {
    doc["value"] = format_rational(model_sup_calibrated(inst));
  }
  emit(std::move(doc), out, style);
  return 0;
}

int do_gap(const Instance& inst, std::ostream& out, const OutputStyle& style) {
  const GapResult result = duality_gap(inst);
  json doc;
  doc["pi"] = format_rational(result.pi);
  doc["model_sup"] = format_rational(result.model_price);
  doc["gap"] = format_rational(result.gap);
  emit(std::move(doc), out, style);
  return 0;
}

int do_oracle(const Instance& inst, std::ostream& out, const OutputStyle& style) {
  const CrossCheckReport report = cross_check(inst);
  json doc;
  doc["primal"] = format_rational(report.primal);
  doc["e1"] = format_rational(report.e1);
  doc["e2"] = format_rational(report.e2);
  doc["nature"] = format_rational(report.nature);
  doc["oracle"] = format_rational(report.oracle);
  doc["agree"] = report.agree;
  doc["snell_matches"] = report.snell_matches;
  doc["ok"] = report.ok;
  if (!report.ok) doc["counterexample"] = json::parse(report.counterexample);
  emit(std::move(doc), out, style);
  return report.ok ? 0 : 2;
}

int do_corollary(const Instance& inst, std::ostream& out, const OutputStyle& style) {
  const CorollaryReport report = verify_corollary(inst);
  json doc;
  doc["pi"] = format_rational(report.pi);
  doc["sup_nature"] = format_rational(report.sup_nature);
  doc["sup_randomized"] = format_rational(report.sup_randomized);
  doc["equal"] = report.equal;
  emit(std::move(doc), out, style);
  return report.equal ? 0 : 2;
}

int do_gen(std::uint64_t seed, const std::string& profile_name, int count, int attempts,
           int jobs, std::ostream& out, const OutputStyle& style) {
  json doc;
  doc["profile"] = profile_name;
  doc["seed"] = seed;
  json instances = json::array();
  if (profile_name == "random") {
    for (int i = 0; i < count; ++i) {
      std::mt19937_64 rng(seed + static_cast<std::uint64_t>(i));
      instances.push_back(to_json(generate_instance(rng, random_profile())));
    }
  } else {
    const std::vector<Instance> found = gap_search(seed, attempts, count, gap_profile(), jobs);
    doc["attempts"] = attempts;
    doc["found"] = static_cast<int>(found.size());
    for (const Instance& inst : found) instances.push_back(to_json(inst));
  }
  doc["instances"] = std::move(instances);
  emit(std::move(doc), out, style);
  return 0;
}

int do_fixtures(const std::string& name, bool emit_instance, std::ostream& out,
                const OutputStyle& style) {
  json doc;
  if (name.empty()) {
    doc["fixtures"] = fixture_names();
    emit(std::move(doc), out, style);
    return 0;
  }
  const Instance inst = fixture(name);
  if (emit_instance) {
    emit(to_json(inst), out, style);
    return 0;
  }
  doc["name"] = name;
  doc["horizon"] = inst.horizon();
  doc["stock_dim"] = inst.stock_dim();
  doc["option_count"] = inst.option_count();
  doc["node_count"] = inst.node_count();
  emit(std::move(doc), out, style);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"exact pricing and hedging of American options on finite market trees"};
  app.name("semistatic");
  OutputStyle style;
  int jobs = 1;
  app.add_flag("--pretty", style.pretty, "human-readable output instead of JSON");
  app.add_flag("--approx", style.approx, "append decimal renderings to exact rationals");
  app.add_option("--jobs", jobs, "worker threads for the gap search")
      ->check(CLI::PositiveNumber);
  app.require_subcommand(1);

  struct Target {
    std::string path;
    std::string fixture_name;
  };
  auto add_target = [](CLI::App* cmd, Target& target) {
    cmd->add_option("file", target.path, "instance JSON file");
    cmd->add_option("--fixture", target.fixture_name, "use a named built-in instance");
    cmd->fallthrough();
  };

  Target check_target;
  CLI::App* check_cmd = app.add_subcommand("check", "validate structure, arbitrage, redundancy");
  add_target(check_cmd, check_target);

  Target price_target;
  bool price_verify = false;
  CLI::App* price_cmd = app.add_subcommand("price", "hedging price and optimal strategy");
  add_target(price_cmd, price_target);
  price_cmd->add_flag("--verify", price_verify, "re-verify the strategy leaf by leaf");

  Target dual_target;
  std::string dual_method = "all";
  CLI::App* dual_cmd = app.add_subcommand("dual", "adversary-side solvers");
  add_target(dual_cmd, dual_target);
  dual_cmd->add_option("--method", dual_method, "e1, e2, nature, model-sup, or all")
      ->check(CLI::IsMember({"e1", "e2", "nature", "model-sup", "all"}));

  Target gap_target;
  CLI::App* gap_cmd = app.add_subcommand("gap", "price gap over single calibrated models");
  add_target(gap_cmd, gap_target);

  Target oracle_target;
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "five-way brute-force cross-check");
  add_target(oracle_cmd, oracle_target);

  Target corollary_target;
  CLI::App* corollary_cmd =
      app.add_subcommand("corollary", "hedging, adversary, and randomized-model chain");
  add_target(corollary_cmd, corollary_target);

  std::uint64_t gen_seed = 0;
  std::string gen_profile = "random";
  int gen_count = 1;
  int gen_attempts = 10000;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate arbitrage-free instances");
  gen_cmd->add_option("--seed", gen_seed, "generator seed")->required();
  gen_cmd->add_option("--profile", gen_profile, "random or gap-search")
      ->check(CLI::IsMember({"random", "gap-search"}));
  gen_cmd->add_option("--count", gen_count, "instances to emit")->check(CLI::PositiveNumber);
  gen_cmd->add_option("--attempts", gen_attempts, "samples for the gap search")
      ->check(CLI::PositiveNumber);
  gen_cmd->fallthrough();

  std::string fixtures_name;
  bool fixtures_emit = false;
  CLI::App* fixtures_cmd = app.add_subcommand("fixtures", "list or emit built-in instances");
  fixtures_cmd->add_option("--name", fixtures_name, "fixture to describe");
  fixtures_cmd->add_flag("--emit", fixtures_emit, "print the full instance JSON");
  fixtures_cmd->fallthrough();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);

    if (check_cmd->parsed()) {
      return do_check(read_target(check_target.path, check_target.fixture_name), out, style);
    }
    if (price_cmd->parsed()) {
      return do_price(read_target(price_target.path, price_target.fixture_name), price_verify,
                      out, style);
    }
    if (dual_cmd->parsed()) {
      return do_dual(read_target(dual_target.path, dual_target.fixture_name), dual_method, out,
                     style);
    }
    if (gap_cmd->parsed()) {
      return do_gap(read_target(gap_target.path, gap_target.fixture_name), out, style);
    }
    if (oracle_cmd->parsed()) {
      return do_oracle(read_target(oracle_target.path, oracle_target.fixture_name), out, style);
    }
    if (corollary_cmd->parsed()) {
      return do_corollary(read_target(corollary_target.path, corollary_target.fixture_name), out,
                          style);
    }
    if (gen_cmd->parsed()) {
      return do_gen(gen_seed, gen_profile, gen_count, gen_attempts, jobs, out, style);
    }
    if (fixtures_cmd->parsed()) {
      return do_fixtures(fixtures_name, fixtures_emit, out, style);
    }
    err << "error: no subcommand selected\n";
    return 3;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& error) {
    err << "usage error: " << error.what() << "\n";
    return 3;
  } catch (const UsageError& error) {
    err << "usage error: " << error.what() << "\n";
    return 3;
  } catch (const ParseError& error) {
    err << "error: " << error.what() << "\n";
    return 1;
  } catch (const StructuralError& error) {
    err << "error: " << error.what() << "\n";
    return 1;
  } catch (const MarketError& error) {
    err << "error: " << error.what() << "\n";
    return 1;
  } catch (const GuardExceeded& error) {
    err << "error: " << error.what() << "\n";
    return 1;
  } catch (const std::logic_error& error) {
    err << "internal invariant violated: " << error.what() << "\n";
    return 2;
  }
}

}  // namespace semistatic
