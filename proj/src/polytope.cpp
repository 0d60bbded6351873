#include "semistatic/polytope.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "semistatic/linalg.hpp"

namespace semistatic {

namespace {

void check_size_guards(const Instance& inst, const Guards& guards, const char* what) {
  if (static_cast<int>(inst.leaves().size()) > guards.max_leaves) {
    throw GuardExceeded(std::string(what) + ": instance has " +
                        std::to_string(inst.leaves().size()) + " leaves, guard is " +
                        std::to_string(guards.max_leaves));
  }
  if (inst.node_count() > guards.max_nodes) {
    throw GuardExceeded(std::string(what) + ": instance has " +
                        std::to_string(inst.node_count()) + " nodes, guard is " +
                        std::to_string(guards.max_nodes));
  }
}

long binomial_clamped(int n, int k, long cap) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long result = 1;
  for (int i = 1; i <= k; ++i) {
    // result * (n - k + i) / i stays integral at every step
    if (result > cap / (n - k + i) + 1) return cap + 1;
    result = result * (n - k + i) / i;
    if (result > cap) return cap + 1;
  }
  return result;
}

bool lexicographically_less(const RVector& a, const RVector& b) {
  for (Eigen::Index i = 0; i < a.size() && i < b.size(); ++i) {
    if (a(i) != b(i)) return a(i) < b(i);
  }
  return a.size() < b.size();
}

// Vertices of the one-step kernel polytope at an inner node: weights over the
// children, unit mass, zero expected stock increment.
std::vector<RVector> local_kernel_vertices(const Instance& inst, int v, long budget) {
  const auto& children = inst.node(v).children;
  const int nc = static_cast<int>(children.size());
  RMatrix a(1 + inst.stock_dim(), nc);
  RVector b = RVector::Zero(1 + inst.stock_dim());
  for (int c = 0; c < nc; ++c) a(0, c) = 1;
  b(0) = 1;
  for (int i = 0; i < inst.stock_dim(); ++i) {
    for (int c = 0; c < nc; ++c) a(1 + i, c) = inst.increment(children[c])(i);
  }
  std::vector<RVector> vertices = enumerate_polytope_vertices(a, b, budget);
  if (vertices.empty()) {
    throw MarketError("node " + inst.node(v).id +
                      " admits no one-step martingale kernel (local arbitrage)");
  }
  return vertices;
}

}  // namespace

Guards Guards::from_env() {
  Guards guards;
  if (const char* raw = std::getenv("SEMISTATIC_GUARD")) {
    const long value = std::strtol(raw, nullptr, 10);
    if (value > 0) {
      guards.max_leaves = static_cast<int>(value);
      guards.max_nodes = static_cast<int>(value);
    }
  }
  return guards;
}

std::vector<RVector> enumerate_polytope_vertices(const RMatrix& a, const RVector& b,
                                                 long budget) {
  const int cols = static_cast<int>(a.cols());
  RMatrix aug(a.rows(), a.cols() + 1);
  aug.leftCols(a.cols()) = a;
  aug.col(a.cols()) = b;
  const std::vector<int> pivots = row_reduce(aug);
  if (!pivots.empty() && pivots.back() == cols) return {};  // inconsistent system
  const int r = static_cast<int>(pivots.size());
  if (r == 0) {
    // Only x = 0 can be a vertex of {x >= 0 : 0 = 0}.
    return {RVector::Zero(cols)};
  }
  if (binomial_clamped(cols, r, budget) > budget) {
    throw GuardExceeded("vertex enumeration over " + std::to_string(cols) + " columns, rank " +
                        std::to_string(r) + ", exceeds the basis budget");
  }
  const RMatrix ar = aug.topLeftCorner(r, cols);
  const RVector br = aug.col(cols).head(r);

  std::vector<RVector> vertices;
  std::vector<int> subset;
  auto consider = [&]() {
    RMatrix basis(r, r);
    for (int i = 0; i < r; ++i) basis.col(i) = ar.col(subset[i]);
    RMatrix reduced = basis;
    if (static_cast<int>(row_reduce(reduced).size()) != r) return;  // not a basis
    const auto x_basis = solve_linear_system(basis, br);
    if (!x_basis) return;
    for (int i = 0; i < r; ++i) {
      if ((*x_basis)(i) < 0) return;
    }
    RVector x = RVector::Zero(cols);
    for (int i = 0; i < r; ++i) x(subset[i]) = (*x_basis)(i);
    vertices.push_back(std::move(x));
  };
  auto recurse = [&](auto&& self, int start) -> void {
    if (static_cast<int>(subset.size()) == r) {
      consider();
      return;
    }
    if (cols - start < r - static_cast<int>(subset.size())) return;
    for (int c = start; c < cols; ++c) {
      subset.push_back(c);
      self(self, c + 1);
      subset.pop_back();
    }
  };
  recurse(recurse, 0);

  std::sort(vertices.begin(), vertices.end(), lexicographically_less);
  vertices.erase(std::unique(vertices.begin(), vertices.end(),
                             [](const RVector& x, const RVector& y) {
                               return !lexicographically_less(x, y) &&
                                      !lexicographically_less(y, x);
                             }),
                 vertices.end());
  return vertices;
}

std::vector<MartingaleMeasure> enumerate_martingale_vertices(const Instance& inst,
                                                             const Guards& guards) {
  check_size_guards(inst, guards, "enumerate_martingale_vertices");
  const int n_leaves = static_cast<int>(inst.leaves().size());

  // Bottom-up: all extreme subtree measures per node, as global leaf weights.
  auto subtree = [&](auto&& self, int v) -> std::vector<RVector> {
    if (inst.is_leaf(v)) {
      RVector unit = RVector::Zero(n_leaves);
      unit(inst.leaf_ordinal(v)) = 1;
      return {unit};
    }
    std::vector<RVector> out;
    const auto& children = inst.node(v).children;
    std::vector<std::vector<RVector>> child_sets;
    child_sets.reserve(children.size());
    for (int c : children) child_sets.push_back(self(self, c));
    for (const RVector& kernel : local_kernel_vertices(inst, v, guards.enumeration_budget)) {
      std::vector<RVector> partial = {RVector::Zero(n_leaves)};
      for (std::size_t c = 0; c < children.size(); ++c) {
        if (kernel(c) == 0) continue;
        const std::vector<RVector>& below = child_sets[c];
        std::vector<RVector> next;
        if (static_cast<long>(partial.size()) * static_cast<long>(below.size()) >
            guards.enumeration_budget) {
          throw GuardExceeded("martingale vertex enumeration exceeds the budget");
        }
        for (const RVector& p : partial) {
          for (const RVector& e : below) next.push_back(p + kernel(c) * e);
        }
        partial = std::move(next);
      }
      for (RVector& p : partial) out.push_back(std::move(p));
      if (static_cast<long>(out.size()) > guards.enumeration_budget) {
        throw GuardExceeded("martingale vertex enumeration exceeds the budget");
      }
    }
    return out;
  };

  std::vector<RVector> weights = subtree(subtree, inst.root());
  std::sort(weights.begin(), weights.end(), lexicographically_less);
  std::vector<MartingaleMeasure> vertices;
  vertices.reserve(weights.size());
  for (RVector& w : weights) vertices.push_back({std::move(w)});
  return vertices;
}

std::vector<MartingaleMeasure> enumerate_calibrated_vertices(const Instance& inst,
                                                             const Guards& guards) {
  check_size_guards(inst, guards, "enumerate_calibrated_vertices");
  const int n_leaves = static_cast<int>(inst.leaves().size());
  const RMatrix mart = martingale_system(inst);
  const RMatrix calib = calibration_system(inst);
  RMatrix a(1 + mart.rows() + calib.rows(), n_leaves);
  for (int l = 0; l < n_leaves; ++l) a(0, l) = 1;
  a.middleRows(1, mart.rows()) = mart;
  a.bottomRows(calib.rows()) = calib;
  RVector b = RVector::Zero(a.rows());
  b(0) = 1;
  std::vector<MartingaleMeasure> vertices;
  for (RVector& w : enumerate_polytope_vertices(a, b, guards.enumeration_budget)) {
    vertices.push_back({std::move(w)});
  }
  return vertices;
}

long count_stopping_times(const Instance& inst, long cap) {
  auto count = [&](auto&& self, int v) -> long {
    if (inst.is_leaf(v)) return 1;
    long product = 1;
    for (int c : inst.node(v).children) {
      const long below = self(self, c);
      if (product > cap / below + 1) return cap + 1;
      product *= below;
      if (product > cap) return cap + 1;
    }
    return product >= cap ? cap + 1 : product + 1;
  };
  return count(count, inst.root());
}

std::vector<StoppingRule> enumerate_stopping_times(const Instance& inst, const Guards& guards) {
  check_size_guards(inst, guards, "enumerate_stopping_times");
  if (count_stopping_times(inst, guards.enumeration_budget) > guards.enumeration_budget) {
    throw GuardExceeded("stopping time enumeration exceeds the budget");
  }
  RVector current = RVector::Zero(inst.node_count());
  for (int leaf : inst.leaves()) current(leaf) = 1;

  std::vector<StoppingRule> rules;
  // Decide nodes front to back; a stop cuts the subtree off the pending list.
  auto generate = [&](auto&& self, std::vector<int> pending) -> void {
    if (pending.empty()) {
      rules.push_back({current});
      return;
    }
    const int v = pending.front();
    std::vector<int> rest(pending.begin() + 1, pending.end());
    if (inst.is_leaf(v)) {
      self(self, std::move(rest));
      return;
    }
    current(v) = 1;  // stop here
    self(self, rest);
    current(v) = 0;  // continue into the children
    std::vector<int> extended = rest;
    for (int c : inst.node(v).children) extended.push_back(c);
    self(self, std::move(extended));
  };
  generate(generate, {inst.root()});
  return rules;
}

}  // namespace semistatic
