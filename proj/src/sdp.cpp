#include "postsel/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace postsel::sdp {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

// Re tr(A_i K) for every constraint, K given blockwise.
RealVector apply_a(const Problem& p, const std::vector<Matrix>& k) {
  RealVector out(static_cast<Eigen::Index>(p.a.size()));
  for (std::size_t i = 0; i < p.a.size(); ++i) {
    cplx acc = 0.0;
    for (const auto& e : p.a[i]) acc += e.value * k[e.block](idx(e.col), idx(e.row));
    out(idx(i)) = acc.real();
  }
  return out;
}

std::vector<Matrix> apply_a_adjoint(const Problem& p, const RealVector& y) {
  std::vector<Matrix> out;
  for (auto n : p.block_sizes) out.push_back(Matrix::Zero(idx(n), idx(n)));
  for (std::size_t i = 0; i < p.a.size(); ++i) {
    const double yi = y(idx(i));
    if (yi == 0.0) continue;
    for (const auto& e : p.a[i]) out[e.block](idx(e.row), idx(e.col)) += yi * e.value;
  }
  return out;
}

double inner(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += (a[k].adjoint() * b[k]).trace().real();
  return acc;
}

// Largest alpha in (0, 1] with m + alpha*dm >= 0, scaled by fraction.
double max_step(const Matrix& m, const Matrix& dm, double fraction) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) return 0.0;
  const Matrix l = llt.matrixL();
  const Matrix linv = l.triangularView<Eigen::Lower>().solve(
      Matrix::Identity(m.rows(), m.cols()));
  const Matrix w = hermitian_part(linv * dm * linv.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(w, Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin >= 0.0) return 1.0;
  return std::min(1.0, -fraction / lmin);
}

Matrix inverse_pd(const Matrix& m, bool& ok) {
  Eigen::LLT<Matrix> llt(m);
  ok = llt.info() == Eigen::Success;
  return llt.solve(Matrix::Identity(m.rows(), m.cols()));
}

}  // namespace

std::vector<Matrix> dual_slack(const Problem& problem, const RealVector& y) {
  auto aty = apply_a_adjoint(problem, y);
  std::vector<Matrix> z;
  for (std::size_t k = 0; k < problem.c.size(); ++k) z.push_back(hermitian_part(problem.c[k] - aty[k]));
  return z;
}

Result solve(const Problem& p, const RealVector& y0, const Options& options) {
  const std::size_t nblocks = p.block_sizes.size();
  const auto m = static_cast<Eigen::Index>(p.a.size());
  double total_dim = 0.0;
  for (auto n : p.block_sizes) total_dim += static_cast<double>(n);

  Result result;
  Iterate& it = result.final;
  it.y = y0;
  it.z = dual_slack(p, it.y);
  for (auto n : p.block_sizes) it.x.push_back(Matrix::Identity(idx(n), idx(n)));

  for (const auto& zk : it.z) {
    Eigen::LLT<Matrix> llt(zk);
    if (llt.info() != Eigen::Success) {
      result.status = "initial dual point is not strictly feasible";
      return result;
    }
  }

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    std::vector<Matrix> zinv(nblocks);
    for (std::size_t k = 0; k < nblocks; ++k) {
      bool ok = true;
      zinv[k] = inverse_pd(it.z[k], ok);
      if (!ok) {
        result.status = "dual slack lost definiteness";
        return result;
      }
    }
    const double mu = inner(it.x, it.z) / total_dim;

    // Schur complement M_ij = Re tr(A_i X A_j Z^-1) = Re tr(A_j W_i), W_i = Z^-1 A_i X.
    Eigen::MatrixXd schur(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      std::vector<Matrix> w(nblocks);
      std::vector<bool> touched(nblocks, false);
      for (const auto& e : p.a[static_cast<std::size_t>(i)]) {
        if (!touched[e.block]) {
          w[e.block] = Matrix::Zero(idx(p.block_sizes[e.block]), idx(p.block_sizes[e.block]));
          touched[e.block] = true;
        }
        w[e.block].noalias() +=
            zinv[e.block].col(idx(e.row)) * (e.value * it.x[e.block].row(idx(e.col)));
      }
      for (Eigen::Index j = i; j < m; ++j) {
        cplx acc = 0.0;
        for (const auto& e : p.a[static_cast<std::size_t>(j)]) {
          if (touched[e.block]) acc += e.value * w[e.block](idx(e.col), idx(e.row));
        }
        schur(i, j) = acc.real();
        schur(j, i) = acc.real();
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(schur);
    if (ldlt.info() != Eigen::Success) {
      result.status = "Schur complement factorization failed";
      return result;
    }

    auto direction = [&](const RealVector& rhs, double target,
                         const std::vector<Matrix>* corr_x, const std::vector<Matrix>* corr_z,
                         RealVector& dy, std::vector<Matrix>& dx, std::vector<Matrix>& dz) {
      dy = ldlt.solve(rhs);
      const auto aty = apply_a_adjoint(p, dy);
      dx.resize(nblocks);
      dz.resize(nblocks);
      for (std::size_t k = 0; k < nblocks; ++k) {
        dz[k] = -aty[k];
        Matrix step = target * zinv[k] - it.x[k] - hermitian_part(it.x[k] * dz[k] * zinv[k]);
        if (corr_x != nullptr) step -= hermitian_part((*corr_x)[k] * (*corr_z)[k] * zinv[k]);
        dx[k] = hermitian_part(step);
      }
    };

    // Predictor.
    RealVector dy_p;
    std::vector<Matrix> dx_p, dz_p;
    direction(p.b, 0.0, nullptr, nullptr, dy_p, dx_p, dz_p);
    double ap = 1.0, ad = 1.0;
    for (std::size_t k = 0; k < nblocks; ++k) {
      ap = std::min(ap, max_step(it.x[k], dx_p[k], 1.0));
      ad = std::min(ad, max_step(it.z[k], dz_p[k], 1.0));
    }
    std::vector<Matrix> xt(nblocks), zt(nblocks);
    for (std::size_t k = 0; k < nblocks; ++k) {
      xt[k] = it.x[k] + ap * dx_p[k];
      zt[k] = it.z[k] + ad * dz_p[k];
    }
    const double ratio = std::max(0.0, inner(xt, zt)) / (mu * total_dim);
    const double sigma = std::clamp(ratio * ratio * ratio, 0.0, 1.0);

    // Corrector.
    std::vector<Matrix> cz(nblocks);
    for (std::size_t k = 0; k < nblocks; ++k) cz[k] = dx_p[k] * dz_p[k] * zinv[k];
    RealVector rhs = p.b - sigma * mu * apply_a(p, zinv) + apply_a(p, cz);
    RealVector dy;
    std::vector<Matrix> dx, dz;
    direction(rhs, sigma * mu, &dx_p, &dz_p, dy, dx, dz);

    ap = 1.0;
    ad = 1.0;
    for (std::size_t k = 0; k < nblocks; ++k) {
      ap = std::min(ap, max_step(it.x[k], dx[k], options.step_fraction));
      ad = std::min(ad, max_step(it.z[k], dz[k], options.step_fraction));
    }
    for (std::size_t k = 0; k < nblocks; ++k) it.x[k] = hermitian_part(it.x[k] + ap * dx[k]);
    it.y += ad * dy;
    it.z = dual_slack(p, it.y);

    it.iteration = iter;
    it.mu = inner(it.x, it.z) / total_dim;
    it.primal_infeasibility = (p.b - apply_a(p, it.x)).norm();
    it.dual_objective = p.b.dot(it.y);

    if (options.stop ? options.stop(it)
                     : (it.mu < options.mu_tol && it.primal_infeasibility < options.mu_tol)) {
      result.converged = true;
      result.status = "converged";
      return result;
    }
    if (ap < 1e-12 && ad < 1e-12) {
      result.status = "stalled";
      return result;
    }
  }
  result.status = "iteration limit reached";
  return result;
}

}  // namespace postsel::sdp
