#pragma once

#include <cmath>

#include "postsel/linalg.hpp"

namespace testing {

using namespace postsel;

inline Operator bell_state() {
  Matrix v = Matrix::Zero(4, 1);
  v(0, 0) = v(3, 0) = 1.0 / std::sqrt(2.0);
  return Operator(v, {2, 2}).projector();
}

inline double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

/// Singular values from the eigenvalues of m^dag m, summed.
inline double trace_norm_via_gram(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m.adjoint() * m);
  double s = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    s += std::sqrt(std::max(0.0, es.eigenvalues()(k)));
  }
  return s;
}

/// Swap of two d-dimensional factors, written out entry by entry.
inline Matrix swap_matrix(std::size_t d) {
  const auto D = static_cast<Eigen::Index>(d);
  Matrix s = Matrix::Zero(D * D, D * D);
  for (Eigen::Index i = 0; i < D; ++i) {
    for (Eigen::Index j = 0; j < D; ++j) s(i * D + j, j * D + i) = 1.0;
  }
  return s;
}

}  // namespace testing
