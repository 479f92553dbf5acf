#pragma once

// Diamond norm of Hermiticity-preserving maps.
//
// The certified upper bound comes from a dual-feasible point of
//
//   minimize  1/2 ||Tr_out Y0||_inf + 1/2 ||Tr_out Y1||_inf
//   s.t.      [[Y0, -J], [-J, Y1]] >= 0,
//
// restricted to Y0 = Y1 = P + N with P, N >= 0 and P - N = J (for Hermitian J
// this loses nothing). The lower bound is the best output trace norm found by
// seesaw ascent over pure inputs with reference dimension din.

#include <cstddef>
#include <vector>

#include "postsel/channels.hpp"
#include "postsel/sdp.hpp"

namespace postsel {

struct DiamondOptions {
  double tol = 1e-6;
  std::size_t restarts = 16;
  std::size_t seesaw_iterations = 500;
  double seesaw_improvement = 1e-9;
  int sdp_iterations = 80;
};

struct DiamondResult {
  double value = 0.0;  // = upper
  double lower = 0.0;
  double upper = 0.0;
  double gap = 0.0;
  bool converged = false;
  /// Pure input on input (x) reference (dims [din, din]) attaining lower.
  Operator witness;
  int sdp_iterations = 0;
  std::size_t seesaw_iterations = 0;
  std::size_t restarts = 0;
  /// Minimum eigenvalue of the reported block dual certificate (>= 0).
  double certificate_min_eigenvalue = 0.0;
  std::string status;
};

/// ||(m (x) id)(rho)||_1 for rho on input (x) reference (reference dimension
/// rho.rows() / din).
double output_trace_norm(const HPMap& m, const Operator& rho);

/// Same for a pure input given as a ket on input (x) reference. A reference
/// larger than din is first compressed by an isometry (trace norm invariant).
double output_trace_norm_pure(const HPMap& m, const Operator& ket);

/// ||(I (x) sqrt(rho)) J (I (x) sqrt(rho))||_1: the output trace norm for the
/// canonical purification of the input density rho (din x din).
double purified_output_trace_norm(const HPMap& m, const Matrix& rho);

struct SeesawTrace {
  std::vector<double> values;  // nondecreasing
  Operator best_ket;
};

/// Seesaw ascent from a starting ket on input (x) reference (dims din x din).
SeesawTrace seesaw(const HPMap& m, const Operator& start, std::size_t max_iterations,
                   double min_improvement);

/// Certified upper bound from an arbitrary Hermitian P (shifted to satisfy
/// P >= 0 and P >= J): lambda_max(Tr_out(2P - J)).
double certified_upper_bound(const HPMap& m, const Matrix& p, double* block_min_eig = nullptr);

DiamondResult diamond_norm(const HPMap& m, const DiamondOptions& options, Rng& rng);

/// 1/2 + 1/4 ||e - f||_diamond.
double distinguish_probability(const Channel& e, const Channel& f,
                               const DiamondOptions& options, Rng& rng);

}  // namespace postsel
