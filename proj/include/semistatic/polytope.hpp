#ifndef SEMISTATIC_POLYTOPE_HPP
#define SEMISTATIC_POLYTOPE_HPP

#include <vector>

#include "semistatic/market_tree.hpp"
#include "semistatic/rational.hpp"
#include "semistatic/stopping.hpp"

namespace semistatic {

// Size caps for the enumeration-based oracles.  Exceeding one throws
// GuardExceeded rather than running unbounded work.  SEMISTATIC_GUARD in the
// environment overrides the two size caps.
struct Guards {
  int max_leaves = 64;
  int max_nodes = 64;
  long enumeration_budget = 200000;  // basic solutions / rules / vertices
  static Guards from_env();
};

// All vertices of {x >= 0 : a x = b}, by enumeration of column bases of the
// row-reduced system.  Deterministic ascending order.  Throws GuardExceeded
// when the number of candidate bases exceeds the budget.
std::vector<RVector> enumerate_polytope_vertices(const RMatrix& a, const RVector& b,
                                                 long budget);

// Extreme points of the martingale-measure polytope, via products of vertex
// one-step kernels over reached nodes.  Exact and complete: a measure is
// extreme iff its kernel at every reached node is a vertex of the local
// kernel polytope.
std::vector<MartingaleMeasure> enumerate_martingale_vertices(const Instance& inst,
                                                             const Guards& guards = {});

// Vertices of the calibrated subset (martingale plus zero option cost), via
// basis enumeration over leaf weights.
std::vector<MartingaleMeasure> enumerate_calibrated_vertices(const Instance& inst,
                                                             const Guards& guards = {});

// Every deterministic stopping time, as 0/1 stopping rules in a fixed
// generation order.
std::vector<StoppingRule> enumerate_stopping_times(const Instance& inst,
                                                   const Guards& guards = {});

// Number of deterministic stopping times, clamped to `cap`.
long count_stopping_times(const Instance& inst, long cap);

}  // namespace semistatic

#endif
