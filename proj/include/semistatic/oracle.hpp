#ifndef SEMISTATIC_ORACLE_HPP
#define SEMISTATIC_ORACLE_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "semistatic/market_tree.hpp"
#include "semistatic/polytope.hpp"
#include "semistatic/rational.hpp"

namespace semistatic {

// Brute-force price: every martingale-polytope vertex is valued by exhaustive
// search over the adapted stopping times, then one small LP picks the best
// calibrated mixture of vertices.  Shares no code path with the iterative
// solvers, so agreement with them is evidence rather than tautology.
// Throws MarketError when no martingale measure or no calibrated mixture
// exists, GuardExceeded when the instance is too large to enumerate.
Rational oracle_e2(const Instance& inst, const Guards& guards = {});

struct CrossCheckReport {
  Rational primal;              // hedging LP
  Rational e1;                  // cutting-plane position search
  Rational e2;                  // column-generation mixture search
  Rational nature;              // occupation-measure LP
  Rational oracle;              // vertex-enumeration mixture LP
  bool agree = false;           // all five values coincide
  bool snell_matches = false;   // per-vertex Snell == stopping-time max
  bool ok = false;              // agree && snell_matches
  std::string counterexample;   // replayable instance JSON when !ok
};

// Prices the instance five independent ways and compares exactly; also pits
// the backward-induction Snell value against the stopping-time enumeration on
// every vertex of the martingale polytope.
CrossCheckReport cross_check(const Instance& inst, const Guards& guards = {});

struct GeneratorProfile {
  int max_horizon = 3;
  int max_children = 3;
  int max_stock_dim = 2;
  int min_options = 0;
  int max_options = 2;
};

// Default sampling profile: trees up to depth 3 with up to 3 children per
// node, up to 2 stock coordinates and up to 2 static options.
GeneratorProfile random_profile();

// Small markets (depth <= 2, one stock, exactly one option) where price gaps
// between the hedging price and the best single calibrated model are common.
GeneratorProfile gap_profile();

// Draws a random arbitrage-free instance: random tree shape; increments
// balanced against an explicitly drawn positive kernel, so zero always lies
// in each node's increment hull; payoffs >= 0 with small denominators; and
// call/put/digital options netted so the composed-kernel measure prices them
// at zero.  Options a dynamic strategy can replicate are dropped before the
// instance is returned, and absence of arbitrage is re-checked.
Instance generate_instance(std::mt19937_64& rng, const GeneratorProfile& profile = {});

// Draws up to `attempts` instances (attempt i from its own generator seeded
// seed + i) and keeps the first `want` distinct ones whose hedging price
// strictly exceeds the best calibrated model value.  The result depends only
// on (seed, attempts, want, profile): `jobs` > 1 parallelizes the scan in
// deterministic blocks without changing the output.
std::vector<Instance> gap_search(std::uint64_t seed, int attempts, int want,
                                 const GeneratorProfile& profile = gap_profile(),
                                 int jobs = 1);

}  // namespace semistatic

#endif  // SEMISTATIC_ORACLE_HPP
