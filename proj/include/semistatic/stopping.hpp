#ifndef SEMISTATIC_STOPPING_HPP
#define SEMISTATIC_STOPPING_HPP

#include <vector>

#include "semistatic/market_tree.hpp"
#include "semistatic/rational.hpp"

namespace semistatic {

// A martingale measure, stored as its leaf weights.  Node masses and one-step
// kernels are derived views.
struct MartingaleMeasure {
  RVector leaf_weights;
};

// Mass reaching each node: the sum of its leaves' weights.
RVector node_masses(const Instance& inst, const MartingaleMeasure& q);
// One-step kernel of q at every inner node (leaves keep an empty entry):
// mass ratios where the node is reached, else a deterministic feasible kernel
// so downstream recursions stay well defined.
std::vector<RVector> transition_kernels(const Instance& inst, const MartingaleMeasure& q);
// Exact check: nonnegative weights, total mass one, martingale stock.
bool is_martingale_measure(const Instance& inst, const MartingaleMeasure& q);
// E_Q[g], one entry per option.
RVector option_expectation(const Instance& inst, const MartingaleMeasure& q);

// Stopping rule as a per-node stop probability in [0, 1]; reached leaves must
// stop.  Deterministic rules use probabilities 0 and 1 only.
struct StoppingRule {
  RVector stop_probability;  // indexed by node
};

bool is_stopping_rule(const Instance& inst, const StoppingRule& rule);

struct SnellResult {
  Rational value;
  StoppingRule rule;        // first entry into {V = payoff}; ties stop
  RVector node_values;      // V per node
};

// Backward recursion V = max(payoff, E_Q[V | node]) under q.  Nodes the
// measure never reaches use a deterministic feasible kernel so the result is
// well defined and reproducible.
SnellResult snell_value(const Instance& inst, const MartingaleMeasure& q);

// Expected stopped payoff less the option leg: E_Q[payoff at rule] - h.E_Q[g].
Rational evaluate(const Instance& inst, const MartingaleMeasure& q, const StoppingRule& rule,
                  const RVector& h);

struct JointValue {
  Rational value;
  MartingaleMeasure measure;
  StoppingRule rule;
};

// sup over martingale measures of (Snell value - h.E_Q[g]), attained; the
// maximizing measure and rule are returned.  This is one backward pass with a
// one-step kernel program per node, never an enumeration.
JointValue joint_sup(const Instance& inst, const RVector& h);

}  // namespace semistatic

#endif
