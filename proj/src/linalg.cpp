#include "semistatic/linalg.hpp"

namespace semistatic {

std::vector<int> row_reduce(RMatrix& m) {
  std::vector<int> pivots;
  const Eigen::Index rows = m.rows(), cols = m.cols();
  Eigen::Index r = 0;
  for (Eigen::Index c = 0; c < cols && r < rows; ++c) {
    Eigen::Index pivot = -1;
    for (Eigen::Index i = r; i < rows; ++i) {
      if (m(i, c) != 0) {
        pivot = i;
        break;
      }
    }
    if (pivot < 0) continue;
    m.row(r).swap(m.row(pivot));
    m.row(r) /= m(r, c);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (i != r && m(i, c) != 0) m.row(i) -= m(i, c) * m.row(r);
    }
    pivots.push_back(static_cast<int>(c));
    ++r;
  }
  return pivots;
}

int rank(const RMatrix& m) {
  RMatrix copy = m;
  return static_cast<int>(row_reduce(copy).size());
}

std::optional<RVector> solve_linear_system(const RMatrix& a, const RVector& b) {
  RMatrix aug(a.rows(), a.cols() + 1);
  aug.leftCols(a.cols()) = a;
  aug.col(a.cols()) = b;
  const std::vector<int> pivots = row_reduce(aug);
  if (!pivots.empty() && pivots.back() == static_cast<int>(a.cols())) {
    return std::nullopt;  // a pivot in the rhs column means 0 = 1
  }
  RVector x = RVector::Zero(a.cols());
  for (std::size_t i = 0; i < pivots.size(); ++i) {
    x(pivots[i]) = aug(static_cast<Eigen::Index>(i), a.cols());
  }
  return x;
}

}  // namespace semistatic
