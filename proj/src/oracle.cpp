#include "semistatic/oracle.hpp"

#include <algorithm>
#include <exception>
#include <optional>
#include <set>
#include <stdexcept>
#include <thread>
#include <utility>

#include "semistatic/dual.hpp"
#include "semistatic/exact_lp.hpp"
#include "semistatic/stopping.hpp"
#include "semistatic/superhedge.hpp"

namespace semistatic {

namespace {

// Best value of a measure over every adapted stopping time, by brute force.
Rational exhaustive_value(const Instance& inst, const MartingaleMeasure& q,
                          const std::vector<StoppingRule>& rules, const RVector& h0) {
  Rational best = evaluate(inst, q, rules.front(), h0);
  for (std::size_t r = 1; r < rules.size(); ++r) {
    const Rational value = evaluate(inst, q, rules[r], h0);
    if (value > best) best = value;
  }
  return best;
}

}  // namespace

Rational oracle_e2(const Instance& inst, const Guards& guards) {
  const std::vector<MartingaleMeasure> vertices = enumerate_martingale_vertices(inst, guards);
  if (vertices.empty()) {
    throw MarketError("the stock admits no martingale measure (arbitrage)");
  }
  const std::vector<StoppingRule> rules = enumerate_stopping_times(inst, guards);
  const RVector h0 = RVector::Zero(inst.option_count());

  LinearProgram lp;
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    lp.add_variable("c" + std::to_string(v), Rational(0));
  }
  for (int k = 0; k < inst.option_count(); ++k) {
    std::vector<LinearTerm> terms;
    for (std::size_t v = 0; v < vertices.size(); ++v) {
      const Rational gamma = option_expectation(inst, vertices[v])(k);
      if (gamma != 0) terms.push_back({static_cast<int>(v), gamma});
    }
    if (!terms.empty()) {
      lp.add_constraint(std::move(terms), Relation::Equal, Rational(0),
                        "calibrate" + std::to_string(k));
    }
  }
  std::vector<LinearTerm> mass;
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    mass.push_back({static_cast<int>(v), Rational(1)});
  }
  lp.add_constraint(std::move(mass), Relation::Equal, Rational(1), "mass");

  std::vector<LinearTerm> objective;
  for (std::size_t v = 0; v < vertices.size(); ++v) {
    const Rational value = exhaustive_value(inst, vertices[v], rules, h0);
    if (value != 0) objective.push_back({static_cast<int>(v), value});
  }
  lp.set_objective(Sense::Maximize, std::move(objective));

  const LPSolution sol = solve(lp);
  if (sol.status != SolveStatus::Optimal) {
    throw MarketError("no calibrated mixture of vertex measures exists (arbitrage)");
  }
  return sol.objective;
}

CrossCheckReport cross_check(const Instance& inst, const Guards& guards) {
  CrossCheckReport report;
  report.primal = solve_primal(inst).price;
  report.e1 = solve_e1(inst).value;
  report.e2 = solve_e2(inst).value;
  report.nature = solve_nature_lp(inst).value;
  report.oracle = oracle_e2(inst, guards);
  report.agree = report.primal == report.e1 && report.primal == report.e2 &&
                 report.primal == report.nature && report.primal == report.oracle;

  report.snell_matches = true;
  const std::vector<MartingaleMeasure> vertices = enumerate_martingale_vertices(inst, guards);
  const std::vector<StoppingRule> rules = enumerate_stopping_times(inst, guards);
  const RVector h0 = RVector::Zero(inst.option_count());
  for (const MartingaleMeasure& q : vertices) {
    if (exhaustive_value(inst, q, rules, h0) != snell_value(inst, q).value) {
      report.snell_matches = false;
    }
  }

  report.ok = report.agree && report.snell_matches;
  if (!report.ok) report.counterexample = serialize(inst);
  return report;
}

GeneratorProfile random_profile() { return {}; }

GeneratorProfile gap_profile() {
  GeneratorProfile profile;
  profile.max_horizon = 2;
  profile.max_children = 3;
  profile.max_stock_dim = 1;
  profile.min_options = 1;
  profile.max_options = 1;
  return profile;
}

namespace {

int draw_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Half-integer steps in [-2, 2].
Rational draw_step(std::mt19937_64& rng) { return Rational(draw_int(rng, -4, 4), 2); }

// Small nonnegative payoffs with denominators up to 4.
Rational draw_payoff(std::mt19937_64& rng) {
  return Rational(draw_int(rng, 0, 8), draw_int(rng, 1, 4));
}

}  // namespace

Instance generate_instance(std::mt19937_64& rng, const GeneratorProfile& profile) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    const int horizon = draw_int(rng, 1, profile.max_horizon);
    const int d = draw_int(rng, 1, profile.max_stock_dim);
    const int e = draw_int(rng, profile.min_options, profile.max_options);

    std::vector<Node> nodes;
    std::vector<Rational> mass;  // composed-kernel weight reaching each node

    Node root;
    root.id = "n0";
    root.time = 0;
    root.parent = -1;
    root.stock = RVector(d);
    for (int i = 0; i < d; ++i) root.stock(i) = draw_int(rng, 1, 4);
    root.exercise_payoff = draw_payoff(rng);
    nodes.push_back(std::move(root));
    mass.push_back(Rational(1));

    std::vector<int> frontier{0};
    for (int t = 1; t <= horizon; ++t) {
      std::vector<int> next;
      for (int v : frontier) {
        const int arity = draw_int(rng, 1, profile.max_children);
        std::vector<Rational> kernel(static_cast<std::size_t>(arity));
        Rational total = 0;
        for (Rational& weight : kernel) {
          weight = draw_int(rng, 1, 4);
          total += weight;
        }
        // All but the last increment are free draws; the last one balances
        // the kernel exactly, so zero sits in the increment hull.
        std::vector<RVector> steps(static_cast<std::size_t>(arity), RVector::Zero(d));
        for (int i = 0; i < d; ++i) {
          Rational drift = 0;
          for (int c = 0; c + 1 < arity; ++c) {
            steps[static_cast<std::size_t>(c)](i) = draw_step(rng);
            drift += Rational(kernel[static_cast<std::size_t>(c)] *
                              steps[static_cast<std::size_t>(c)](i));
          }
          steps[static_cast<std::size_t>(arity - 1)](i) =
              Rational(-drift / kernel[static_cast<std::size_t>(arity - 1)]);
        }
        for (int c = 0; c < arity; ++c) {
          Node child;
          child.id = "n" + std::to_string(nodes.size());
          child.time = t;
          child.parent = v;
          child.stock = RVector(nodes[static_cast<std::size_t>(v)].stock +
                                steps[static_cast<std::size_t>(c)]);
          child.exercise_payoff = draw_payoff(rng);
          next.push_back(static_cast<int>(nodes.size()));
          mass.push_back(Rational(mass[static_cast<std::size_t>(v)] *
                                  kernel[static_cast<std::size_t>(c)] / total));
          nodes.push_back(std::move(child));
        }
      }
      frontier = std::move(next);
    }

    if (e > 0) {
      for (int leaf : frontier) {
        nodes[static_cast<std::size_t>(leaf)].option_payoff = RVector::Zero(e);
      }
      for (int k = 0; k < e; ++k) {
        const int coord = draw_int(rng, 0, d - 1);
        const int kind = draw_int(rng, 0, 2);  // call, put, digital
        const int pivot = frontier[static_cast<std::size_t>(
            draw_int(rng, 0, static_cast<int>(frontier.size()) - 1))];
        const Rational strike = Rational(nodes[static_cast<std::size_t>(pivot)].stock(coord) +
                                         Rational(draw_int(rng, -1, 1), 2));
        std::vector<Rational> raw(frontier.size());
        Rational price = 0;
        for (std::size_t l = 0; l < frontier.size(); ++l) {
          const Rational& s = nodes[static_cast<std::size_t>(frontier[l])].stock(coord);
          Rational value = 0;
          if (kind == 0) {
            if (s > strike) value = Rational(s - strike);
          } else if (kind == 1) {
            if (s < strike) value = Rational(strike - s);
          } else {
            if (s >= strike) value = 1;
          }
          raw[l] = value;
          price += Rational(mass[static_cast<std::size_t>(frontier[l])] * value);
        }
        // Net at the composed-kernel price: the full-support composed measure
        // then calibrates every option, which certifies no-arbitrage.
        for (std::size_t l = 0; l < frontier.size(); ++l) {
          nodes[static_cast<std::size_t>(frontier[l])].option_payoff(k) =
              Rational(raw[l] - price);
        }
      }
    }

    Instance built(horizon, d, e, std::move(nodes));
    Instance reduced = reduce_redundant_options(built).instance;
    if (check_no_arbitrage(reduced).ok) return reduced;
  }
  throw std::logic_error("instance generation failed to reach an arbitrage-free market");
}

std::vector<Instance> gap_search(std::uint64_t seed, int attempts, int want,
                                 const GeneratorProfile& profile, int jobs) {
  std::vector<Instance> kept;
  if (want <= 0 || attempts <= 0) return kept;
  const int workers = std::max(1, jobs);
  std::set<std::string> seen;

  int scanned = 0;
  while (scanned < attempts && static_cast<int>(kept.size()) < want) {
    const int block = std::min(attempts - scanned, workers * 8);
    std::vector<std::optional<Instance>> found(static_cast<std::size_t>(block));
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));

    auto probe = [&](int worker) {
      try {
        for (int o = worker; o < block; o += workers) {
          std::mt19937_64 rng(seed + static_cast<std::uint64_t>(scanned + o));
          Instance inst = generate_instance(rng, profile);
          try {
            if (duality_gap(inst).gap > 0) found[static_cast<std::size_t>(o)] = std::move(inst);
          } catch (const GuardExceeded&) {
            // Too large for the enumeration oracle: not a candidate.
          }
        }
      } catch (...) {
        errors[static_cast<std::size_t>(worker)] = std::current_exception();
      }
    };

    if (workers == 1) {
      probe(0);
    } else {
      std::vector<std::thread> pool;
      for (int w = 1; w < workers; ++w) pool.emplace_back(probe, w);
      probe(0);
      for (std::thread& t : pool) t.join();
    }
    for (const std::exception_ptr& error : errors) {
      if (error) std::rethrow_exception(error);
    }

    for (int o = 0; o < block && static_cast<int>(kept.size()) < want; ++o) {
      std::optional<Instance>& hit = found[static_cast<std::size_t>(o)];
      if (!hit) continue;
      if (seen.insert(serialize(*hit)).second) kept.push_back(std::move(*hit));
    }
    scanned += block;
  }
  return kept;
}

}  // namespace semistatic
