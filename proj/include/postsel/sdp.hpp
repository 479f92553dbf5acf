#pragma once

// Small dense semidefinite programs over complex Hermitian blocks:
//
//   (P)  min <C, X>   s.t.  <A_i, X> = b_i,  X >= 0
//   (D)  max b^T y    s.t.  Z = C - sum_i y_i A_i >= 0
//
// solved by a primal-dual interior-point method (HKM search direction,
// Mehrotra predictor-corrector). The dual iterate is kept exactly feasible:
// Z is always recomputed from y, so every iterate's y is a valid dual point.

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "postsel/linalg.hpp"

namespace postsel::sdp {

struct Entry {
  std::size_t block;
  std::size_t row;
  std::size_t col;
  cplx value;
};

/// Sparse Hermitian constraint matrix; both (r,c) and (c,r) entries of an
/// off-diagonal element must be listed.
using SparseHermitian = std::vector<Entry>;

struct Problem {
  std::vector<std::size_t> block_sizes;
  std::vector<Matrix> c;
  std::vector<SparseHermitian> a;
  RealVector b;
};

struct Iterate {
  std::vector<Matrix> x;
  std::vector<Matrix> z;
  RealVector y;
  int iteration = 0;
  double mu = 0.0;
  double primal_infeasibility = 0.0;
  double dual_objective = 0.0;
};

struct Options {
  int max_iterations = 80;
  double step_fraction = 0.95;
  /// Called after each iteration; returning true stops the solve as converged.
  std::function<bool(const Iterate&)> stop;
  /// Fallback stopping rule when no callback is given.
  double mu_tol = 1e-12;
};

struct Result {
  Iterate final;
  bool converged = false;
  std::string status;
};

/// y0 must be strictly dual feasible (C - A^*(y0) positive definite).
Result solve(const Problem& problem, const RealVector& y0, const Options& options);

/// C - sum y_i A_i, blockwise.
std::vector<Matrix> dual_slack(const Problem& problem, const RealVector& y);

}  // namespace postsel::sdp
