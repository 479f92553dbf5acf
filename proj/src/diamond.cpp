#include "postsel/diamond.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <unsupported/Eigen/KroneckerProduct>

namespace postsel {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void require_hermitian(const HPMap& m) {
  const double defect = m.choi.hermiticity_defect();
  if (defect > kHermitianTol) {
    throw NumericalError("map is not Hermiticity preserving (Choi defect " +
                         std::to_string(defect) + ")");
  }
}

Matrix trace_out_output(const Matrix& x, std::size_t din, std::size_t dout) {
  Matrix t = Matrix::Zero(idx(din), idx(din));
  for (std::size_t a = 0; a < dout; ++a) t += x.block(idx(a * din), idx(a * din), idx(din), idx(din));
  return t;
}

// Psi (din x dref) with Psi[i, r] = ket[i * dref + r].
Matrix ket_to_matrix(const Matrix& ket, std::size_t din) {
  const std::size_t dref = static_cast<std::size_t>(ket.rows()) / din;
  Matrix psi(idx(din), idx(dref));
  for (std::size_t i = 0; i < din; ++i) {
    for (std::size_t r = 0; r < dref; ++r) psi(idx(i), idx(r)) = ket(idx(i * dref + r), 0);
  }
  return psi;
}

Matrix matrix_to_ket(const Matrix& psi) {
  Matrix ket(psi.rows() * psi.cols(), 1);
  for (Eigen::Index i = 0; i < psi.rows(); ++i) {
    for (Eigen::Index r = 0; r < psi.cols(); ++r) ket(i * psi.cols() + r, 0) = psi(i, r);
  }
  return ket;
}

// (m (x) id)(|psi><psi|) = (I (x) Psi^T) J (I (x) conj(Psi)).
Matrix pure_output(const HPMap& m, const Matrix& psi) {
  const Matrix k = Eigen::kroneckerProduct(Matrix::Identity(idx(m.dout), idx(m.dout)),
                                           psi.transpose());
  Matrix x = k * m.choi.matrix() * k.adjoint();
  return 0.5 * (x + x.adjoint());
}

struct Helstrom {
  double value;
  Matrix observable;  // P_+ - P_-
};

Helstrom helstrom(const Matrix& x) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(x);
  const RealVector& ev = es.eigenvalues();
  RealVector sign = ev.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
  return {ev.cwiseAbs().sum(),
          es.eigenvectors() * sign.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint()};
}

// M with psi^dag M psi = tr(Pi (m (x) id)(|psi><psi|)) for reference dimension dref.
Matrix induced_operator(const HPMap& m, const Matrix& pi, std::size_t dref) {
  const std::size_t din = m.din;
  const Matrix& j = m.choi.matrix();
  Matrix out = Matrix::Zero(idx(din * dref), idx(din * dref));
  for (std::size_t a = 0; a < m.dout; ++a) {
    for (std::size_t b = 0; b < m.dout; ++b) {
      const Matrix jblk = j.block(idx(a * din), idx(b * din), idx(din), idx(din));
      const Matrix pblk = pi.block(idx(b * dref), idx(a * dref), idx(dref), idx(dref));
      out += Eigen::kroneckerProduct(jblk.transpose(), pblk);
    }
  }
  return 0.5 * (out + out.adjoint());
}

// -- SDP assembly ------------------------------------------------------------

struct DiamondSdp {
  sdp::Problem problem;
  std::size_t dim = 0;  // dout * din
};

// Hermitian basis on D x D: diagonal units, then (e_pq + e_qp), (i e_pq - i e_qp).
DiamondSdp build_sdp(const HPMap& m) {
  const std::size_t din = m.din, dout = m.dout, dim = din * dout;
  DiamondSdp out;
  out.dim = dim;
  auto& p = out.problem;
  p.block_sizes = {din, dim, dim};
  p.c = {trace_out_output(m.choi.matrix(), din, dout), Matrix::Zero(idx(dim), idx(dim)),
         -m.choi.matrix()};

  sdp::SparseHermitian at;
  for (std::size_t i = 0; i < din; ++i) at.push_back({0, i, i, -1.0});
  p.a.push_back(std::move(at));

  auto add_element = [&](const std::vector<std::tuple<std::size_t, std::size_t, cplx>>& entries) {
    sdp::SparseHermitian a;
    for (const auto& [r, c, v] : entries) {
      if (r / din == c / din) a.push_back({0, r % din, c % din, 2.0 * v});
      a.push_back({1, r, c, -v});
      a.push_back({2, r, c, -v});
    }
    p.a.push_back(std::move(a));
  };
  for (std::size_t q = 0; q < dim; ++q) add_element({{q, q, 1.0}});
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = r + 1; c < dim; ++c) {
      add_element({{r, c, 1.0}, {c, r, 1.0}});
      add_element({{r, c, cplx(0, 1)}, {c, r, cplx(0, -1)}});
    }
  }
  p.b = RealVector::Zero(idx(p.a.size()));
  p.b(0) = -1.0;
  return out;
}

Matrix p_from_y(const RealVector& y, std::size_t dim) {
  Matrix p = Matrix::Zero(idx(dim), idx(dim));
  Eigen::Index k = 1;
  for (std::size_t q = 0; q < dim; ++q) p(idx(q), idx(q)) = y(k++);
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = r + 1; c < dim; ++c) {
      const double re = y(k++);
      const double im = y(k++);
      p(idx(r), idx(c)) = cplx(re, im);
      p(idx(c), idx(r)) = cplx(re, -im);
    }
  }
  return p;
}

RealVector y_from_p(double t, const Matrix& p) {
  const auto dim = static_cast<std::size_t>(p.rows());
  RealVector y(idx(1 + dim * dim));
  y(0) = t;
  Eigen::Index k = 1;
  for (std::size_t q = 0; q < dim; ++q) y(k++) = p(idx(q), idx(q)).real();
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = r + 1; c < dim; ++c) {
      y(k++) = p(idx(r), idx(c)).real();
      y(k++) = p(idx(r), idx(c)).imag();
    }
  }
  return y;
}

Matrix density_from_block(const Matrix& x) {
  const auto [values, vectors] = eigh(Matrix(0.5 * (x + x.adjoint())));
  RealVector clipped = values.cwiseMax(0.0);
  const double tr = clipped.sum();
  if (tr <= 0.0) return Matrix::Identity(x.rows(), x.cols()) / static_cast<double>(x.rows());
  return vectors * (clipped / tr).cast<cplx>().asDiagonal() * vectors.adjoint();
}

}  // namespace

double output_trace_norm(const HPMap& m, const Operator& rho) {
  return trace_norm(apply_extended(m, rho));
}

double output_trace_norm_pure(const HPMap& m, const Operator& ket) {
  if (ket.cols() != 1 || ket.rows() % m.din != 0) {
    throw DimensionError("output_trace_norm_pure: ket dimension not a multiple of din");
  }
  Matrix psi = ket_to_matrix(ket.matrix(), m.din);
  if (psi.cols() > psi.rows()) {
    // Psi = U S V^dag; dropping the isometry V^dag on the reference leaves the
    // output trace norm unchanged.
    Eigen::BDCSVD<Matrix> svd(psi, Eigen::ComputeThinU);
    psi = svd.matrixU() * svd.singularValues().cast<cplx>().asDiagonal();
  }
  return trace_norm(pure_output(m, psi));
}

double purified_output_trace_norm(const HPMap& m, const Matrix& rho) {
  const Matrix root = psd_sqrt(rho);
  const Matrix k = Eigen::kroneckerProduct(Matrix::Identity(idx(m.dout), idx(m.dout)), root);
  return trace_norm(Matrix(k * m.choi.matrix() * k));
}

SeesawTrace seesaw(const HPMap& m, const Operator& start, std::size_t max_iterations,
                   double min_improvement) {
  if (start.cols() != 1 || start.rows() != m.din * m.din) {
    throw DimensionError("seesaw: start must be a ket on input (x) reference of size din^2");
  }
  SeesawTrace trace;
  Matrix ket = start.matrix() / start.matrix().norm();
  Helstrom h = helstrom(pure_output(m, ket_to_matrix(ket, m.din)));
  trace.values.push_back(h.value);
  Matrix best = ket;
  for (std::size_t it = 0; it < max_iterations; ++it) {
    const Matrix induced = induced_operator(m, h.observable, m.din);
    Eigen::SelfAdjointEigenSolver<Matrix> es(induced);
    ket = es.eigenvectors().col(es.eigenvectors().cols() - 1);
    Helstrom next = helstrom(pure_output(m, ket_to_matrix(ket, m.din)));
    const double gain = next.value - trace.values.back();
    if (gain > 0.0) best = ket;
    trace.values.push_back(std::max(next.value, trace.values.back()));
    h = std::move(next);
    if (gain < min_improvement) break;
  }
  trace.best_ket = Operator(best, Dims{m.din, m.din});
  return trace;
}

double certified_upper_bound(const HPMap& m, const Matrix& p_in, double* block_min_eig) {
  const Matrix& j = m.choi.matrix();
  Matrix p = 0.5 * (p_in + p_in.adjoint());
  const double shift = std::max({0.0, -min_eigenvalue(p), -min_eigenvalue(Matrix(p - j))});
  if (shift > 0.0) {
    // Slightly over-shift so rounding cannot leave a negative eigenvalue.
    p += (shift * (1.0 + 1e-12) + 1e-15) * Matrix::Identity(p.rows(), p.cols());
  }
  const Matrix y = 2.0 * p - j;  // = P + N with N = P - J
  if (block_min_eig != nullptr) {
    const Eigen::Index n = j.rows();
    Matrix block(2 * n, 2 * n);
    block << y, -j, -j.adjoint(), y;
    *block_min_eig = min_eigenvalue(block);
  }
  return std::max(0.0, max_eigenvalue(trace_out_output(y, m.din, m.dout)));
}

DiamondResult diamond_norm(const HPMap& m, const DiamondOptions& options, Rng& rng) {
  require_hermitian(m);
  const std::size_t din = m.din;
  DiamondResult result;
  result.restarts = options.restarts;

  if (m.choi.matrix().isZero(0.0)) {
    result.witness = Operator::ket(Dims{din, din}, 0);
    result.converged = true;
    result.status = "zero map";
    return result;
  }

  // Certified upper bound and a near-optimal input density from the SDP.
  const DiamondSdp sdp_problem = build_sdp(m);
  const Matrix& j = m.choi.matrix();
  const Eigen::SelfAdjointEigenSolver<Matrix> jes(0.5 * (j + j.adjoint()));
  const Matrix abs_j = jes.eigenvectors() * jes.eigenvalues().cwiseAbs().cast<cplx>().asDiagonal() *
                       jes.eigenvectors().adjoint();
  const Matrix p0 = abs_j + Matrix::Identity(j.rows(), j.cols());
  const double t0 = max_eigenvalue(trace_out_output(Matrix(2.0 * p0 - j), din, m.dout)) + 1.0;

  double best_upper = std::numeric_limits<double>::infinity();
  Matrix best_p = p0;
  double sdp_lower = 0.0;
  Matrix best_rho = Matrix::Identity(idx(din), idx(din)) / static_cast<double>(din);

  sdp::Options sopt;
  sopt.max_iterations = options.sdp_iterations;
  sopt.stop = [&](const sdp::Iterate& it) {
    const Matrix p = p_from_y(it.y, sdp_problem.dim);
    const double upper = certified_upper_bound(m, p);
    if (upper < best_upper) {
      best_upper = upper;
      best_p = p;
    }
    const Matrix rho = density_from_block(it.x[0]);
    const double lower = purified_output_trace_norm(m, rho);
    if (lower > sdp_lower) {
      sdp_lower = lower;
      best_rho = rho;
    }
    return best_upper - sdp_lower <= 0.25 * options.tol;
  };
  const sdp::Result sres = sdp::solve(sdp_problem.problem, y_from_p(t0, p0), sopt);
  result.sdp_iterations = sres.final.iteration;
  if (!std::isfinite(best_upper)) best_upper = certified_upper_bound(m, p0);
  result.upper = certified_upper_bound(m, best_p, &result.certificate_min_eigenvalue);

  // Seesaw: warm start from the SDP input, then Haar-random restarts.
  const Matrix warm = matrix_to_ket(psd_sqrt(best_rho).conjugate());
  SeesawTrace best = seesaw(m, Operator(warm, Dims{din, din}), options.seesaw_iterations,
                            options.seesaw_improvement);
  result.seesaw_iterations = best.values.size() - 1;
  for (std::size_t r = 0; r < options.restarts; ++r) {
    Rng sub = rng.split(r);
    const Operator start = sample_haar_ket(din * din, sub).with_dims(Dims{din, din});
    SeesawTrace t = seesaw(m, start, options.seesaw_iterations, options.seesaw_improvement);
    result.seesaw_iterations += t.values.size() - 1;
    if (t.values.back() > best.values.back()) best = std::move(t);
  }
  result.lower = best.values.back();
  result.witness = best.best_ket;
  result.value = result.upper;
  result.gap = result.upper - result.lower;
  result.converged = result.gap <= options.tol;
  result.status = result.converged ? "converged"
                                   : "gap " + std::to_string(result.gap) + " above tolerance (" +
                                         sres.status + ")";
  return result;
}

double distinguish_probability(const Channel& e, const Channel& f,
                               const DiamondOptions& options, Rng& rng) {
  return 0.5 + 0.25 * diamond_norm(subtract(e, f), options, rng).value;
}

}  // namespace postsel
