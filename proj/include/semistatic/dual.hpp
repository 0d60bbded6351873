#ifndef SEMISTATIC_DUAL_HPP
#define SEMISTATIC_DUAL_HPP

#include <vector>

#include "semistatic/market_tree.hpp"
#include "semistatic/polytope.hpp"
#include "semistatic/rational.hpp"
#include "semistatic/stopping.hpp"

namespace semistatic {

struct SupportResult {
  Rational value;
  MartingaleMeasure measure;
};

// max direction.E_Q[g] over the martingale polytope, with a maximizer.
SupportResult support_function(const Instance& inst, const RVector& direction);

// Search box for the static position h.  payoff_bound dominates every
// reachable objective value; inradius is the smallest of the 2e axis support
// values of {E_Q[g]}, positive once redundant options are gone; the box
// radius 3 * payoff_bound / inradius then contains a minimizer.
struct CalibrationBox {
  Rational payoff_bound;
  Rational inradius;
  Rational radius;
};

CalibrationBox compute_box(const Instance& inst);

// Epigraph model of a convex function assembled from exact cuts
// (point, value, subgradient), minimized over a sup-norm box.
class CutModel {
 public:
  CutModel(int dim, Rational radius);

  void add_cut(const RVector& point, const Rational& value, const RVector& gradient);

  struct Master {
    Rational lower;  // exact minimum of the cut maximum over the box
    RVector point;   // a minimizer
  };
  // Requires at least one cut.
  Master minimize() const;

  // Every stored cut underestimates the function at every stored point.
  bool consistent() const;

  void double_radius() { radius_ = radius_ * 2; }

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(points_.size()); }
  const Rational& radius() const { return radius_; }
  const std::vector<RVector>& points() const { return points_; }
  const std::vector<Rational>& values() const { return values_; }
  const std::vector<RVector>& gradients() const { return gradients_; }

 private:
  int dim_;
  Rational radius_;
  std::vector<RVector> points_;
  std::vector<Rational> values_;
  std::vector<RVector> gradients_;
};

struct E1Result {
  Rational value;
  RVector h_star;  // indexed by the original options
  std::vector<Rational> lower_trace;  // master value per iteration
  std::vector<Rational> upper_trace;  // best oracle value so far, nonincreasing
  std::vector<RVector> queried;       // every oracle query point, embedded
  std::vector<Rational> queried_values;
  int iterations = 0;
  int box_doublings = 0;
};

// min over h of joint_sup(inst, h), by cutting planes over a box that is
// doubled whenever the certified minimizer touches its boundary.  Replicable
// options are dropped internally and h_star is re-embedded with zeros.
E1Result solve_e1(const Instance& inst);

struct MixtureComponent {
  Rational weight;  // strictly positive
  MartingaleMeasure measure;
  Rational snell;              // Snell value of the component measure
  RVector option_expectation;  // E[g] under the component, original options
};

// Weighted family of martingale measures whose option expectations cancel:
// weights sum to one and sum_i weight_i E_{Q_i}[g] = 0.
struct MixtureModel {
  std::vector<MixtureComponent> components;
};

bool mixture_valid(const Instance& inst, const MixtureModel& mix);

struct E2Result {
  Rational value;
  MixtureModel mixture;
  std::vector<Rational> master_trace;  // nondecreasing master objective
  int iterations = 0;
};

// max of sum_i c_i snell(Q_i) over mixtures, by column generation with
// joint_sup as the pricing oracle.  Replicable options are dropped
// internally; the returned mixture reports expectations for all options.
E2Result solve_e2(const Instance& inst);

struct NatureResult {
  Rational value;
  std::vector<Rational> stopped_mass;  // per node
  std::vector<Rational> pre_flow;      // in-flow before exercise, 1 at the root
  std::vector<Rational> post_flow;     // in-flow after exercise, 0 at the root
};

// Single occupation LP: pre-exercise flow splits into stopped mass and
// continuation, stopped mass keeps flowing as a separately-martingale
// post-exercise leg, and the combined leaf flow prices every option at zero.
NatureResult solve_nature_lp(const Instance& inst);

// max Snell value over the vertices of the calibrated measure polytope.  The
// objective is convex in the measure, so vertices suffice.
Rational model_sup_calibrated(const Instance& inst, const Guards& guards = {});

struct GapResult {
  Rational pi;
  Rational model_price;
  Rational gap;  // pi - model_price, nonnegative
};

GapResult duality_gap(const Instance& inst, const Guards& guards = {});

// Full comparison report: all four prices, the model price and gap, the
// optimal mixture, h_star, and the hedging strategy.
json full_report(const Instance& inst, const Guards& guards = {});

}  // namespace semistatic

#endif
