#ifndef SEMISTATIC_SUPERHEDGE_HPP
#define SEMISTATIC_SUPERHEDGE_HPP

#include <vector>

#include "semistatic/exact_lp.hpp"
#include "semistatic/market_tree.hpp"
#include "semistatic/rational.hpp"

namespace semistatic {

// Initial capital, a static option position, one dynamic stock position per
// inner node before exercise, and a separate dynamic position per (exercise
// time, inner node at or after it) afterwards.  Post-exercise books are kept
// per exercise time, never pooled.
struct SemiStaticStrategy {
  Rational initial_capital;
  RVector option_position;
  std::vector<RVector> pre_exercise;                // by node; inner nodes only
  std::vector<std::vector<RVector>> post_exercise;  // [exercise time][node]
};

// One row per (exercise time, leaf): capital plus trading gains plus the
// option leg dominates the payoff collected at that time on that path.
// Minimizes the initial capital.  Variable order: capital, option positions,
// pre-exercise positions by node, post-exercise positions by time then node.
LinearProgram build_primal_lp(const Instance& inst);

struct PrimalResult {
  Rational price;  // the super-hedging price
  SemiStaticStrategy strategy;
};

// Exact optimum of the hedging program.  Throws MarketError when the program
// is unbounded below (the market then admits arbitrage); it is never
// infeasible.
PrimalResult solve_primal(const Instance& inst);

// Exact domination check of the strategy with the given budget against every
// exercise time and path.
bool verify_superhedge(const Instance& inst, const SemiStaticStrategy& strategy,
                       const Rational& budget);

json strategy_to_json(const Instance& inst, const SemiStaticStrategy& strategy);

}  // namespace semistatic

#endif
