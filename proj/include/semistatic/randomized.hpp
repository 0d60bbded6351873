#ifndef SEMISTATIC_RANDOMIZED_HPP
#define SEMISTATIC_RANDOMIZED_HPP

#include <vector>

#include "semistatic/dual.hpp"
#include "semistatic/market_tree.hpp"
#include "semistatic/stopping.hpp"

namespace semistatic {

// One node of the enlarged forest: a base-tree node tagged with the mixture
// component whose copy it lives in.
struct EnlargedNode {
  int base_node = 0;
  int component = 0;
};

// A market model on the product space (tree paths) x {components}.  The
// component label is drawn at time 0 with the given weights and is visible
// from time 0 on, so the enlarged tree is a forest of n copies of the base
// tree; the stock and the exercise payoff lift by projection.  Under the
// product measure (weight i times kernel i) the lifted stock is a martingale
// and the mixture prices every static option at zero.
struct RandomizedModel {
  Instance base;
  int n = 0;                               // number of components, >= 1
  RVector weights;                         // > 0 entrywise, sums to one
  std::vector<MartingaleMeasure> kernels;  // one measure per component
  std::vector<EnlargedNode> nodes;         // component-major copy layout
};

// Materializes the enlarged forest for a mixture.  Throws MarketError when
// the mixture fails its invariants.
RandomizedModel build_randomized_model(const Instance& inst, const MixtureModel& mix);

struct ConsistencyReport {
  bool weights_valid = false;        // n >= 1, weights > 0, summing to one
  bool kernels_valid = false;        // each kernel a probability on the leaves
  bool enlarged_martingale = false;  // node-wise balance at every charged node
  bool calibrated = false;           // weighted option expectation is zero
  // The reference family charges every tree path, so no path is negligible
  // and the null-set compatibility requirement never binds.
  bool polarity_vacuous = true;
  bool ok = false;
};

// Re-derives every model invariant from (base, weights, kernels), exactly.
ConsistencyReport check_consistency(const RandomizedModel& model);

// Value of the American option on the enlarged forest: a Snell pass over
// each copy with that copy's one-step kernels, mixed with the component
// weights.  Because the label is time-0 information this must equal the
// weighted sum of the per-component Snell values; both sides are computed
// and compared, and a mismatch is a hard internal error.
Rational phi_M(const RandomizedModel& model);

struct CorollaryReport {
  Rational pi;              // hedging price from the primal LP
  Rational sup_nature;      // occupation-measure LP value
  Rational sup_randomized;  // phi_M of the optimal mixture model
  bool equal = false;
};

// Builds the optimal mixture model and checks the full chain: hedging price,
// adversarial-model value, and randomized-model value all agree.
CorollaryReport verify_corollary(const Instance& inst);

// Serializes the forest with the instance node schema plus a "component"
// field per node.
json to_json(const RandomizedModel& model);

}  // namespace semistatic

#endif  // SEMISTATIC_RANDOMIZED_HPP
