#ifndef SEMISTATIC_LINALG_HPP
#define SEMISTATIC_LINALG_HPP

#include <optional>
#include <vector>

#include "semistatic/rational.hpp"

namespace semistatic {

// Exact Gauss-Jordan elimination.  Reduces m in place to reduced row echelon
// form and returns the pivot columns in order.  Pivot choice is the first
// nonzero entry in column order, so the result is deterministic.
std::vector<int> row_reduce(RMatrix& m);

int rank(const RMatrix& m);

// One exact solution of a*x = b, or nullopt when the system is inconsistent.
// Free coordinates are set to zero.
std::optional<RVector> solve_linear_system(const RMatrix& a, const RVector& b);

}  // namespace semistatic

#endif
