#include "postsel/channels.hpp"

#include <cmath>

#include <unsupported/Eigen/KroneckerProduct>

#include "postsel/permutation.hpp"

namespace postsel {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

Matrix partial_trace_output(const Matrix& choi, std::size_t din, std::size_t dout) {
  Matrix t = Matrix::Zero(idx(din), idx(din));
  for (std::size_t a = 0; a < dout; ++a) {
    t += choi.block(idx(a * din), idx(a * din), idx(din), idx(din));
  }
  return t;
}

// Choi of m o pi for a real permutation matrix given as an index image map.
Matrix precompose_permutation(const Matrix& choi, std::size_t din, std::size_t dout,
                              const std::vector<std::size_t>& image) {
  // J'[(a,i),(b,j)] = J[(a,P i),(b,P j)]
  Matrix out(choi.rows(), choi.cols());
  const std::size_t n = din * dout;
  std::vector<std::size_t> map(n);
  for (std::size_t a = 0; a < dout; ++a) {
    for (std::size_t i = 0; i < din; ++i) map[a * din + i] = a * din + image[i];
  }
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < n; ++r) out(idx(r), idx(c)) = choi(idx(map[r]), idx(map[c]));
  }
  return out;
}

}  // namespace

Channel Channel::from_choi(std::size_t din, std::size_t dout, Matrix choi, double tol) {
  Channel c = make_map<Channel>(din, dout, std::move(choi));
  const auto report = is_cptp(c, tol);
  if (!report.cp || !report.tp) {
    throw NumericalError("Choi matrix is not CPTP: min eigenvalue " +
                         std::to_string(report.min_choi_eigenvalue) + ", TP deviation " +
                         std::to_string(report.tp_deviation));
  }
  return c;
}

Channel channel_from_kraus(const std::vector<Matrix>& kraus) {
  if (kraus.empty()) throw DimensionError("channel_from_kraus: no Kraus operators");
  const auto dout = static_cast<std::size_t>(kraus.front().rows());
  const auto din = static_cast<std::size_t>(kraus.front().cols());
  Matrix completeness = Matrix::Zero(idx(din), idx(din));
  Matrix choi = Matrix::Zero(idx(din * dout), idx(din * dout));
  for (const auto& k : kraus) {
    if (static_cast<std::size_t>(k.rows()) != dout || static_cast<std::size_t>(k.cols()) != din) {
      throw DimensionError("channel_from_kraus: Kraus operators differ in shape");
    }
    completeness += k.adjoint() * k;
    // |K>> with entry (a,i) = K_ai
    Vector v(idx(din * dout));
    for (std::size_t a = 0; a < dout; ++a) {
      for (std::size_t i = 0; i < din; ++i) v(idx(a * din + i)) = k(idx(a), idx(i));
    }
    choi += v * v.adjoint();
  }
  const double deviation =
      (completeness - Matrix::Identity(idx(din), idx(din))).cwiseAbs().maxCoeff();
  if (deviation > 1e-9) {
    throw NumericalError("channel_from_kraus: completeness violated, max deviation " +
                         std::to_string(deviation));
  }
  return make_map<Channel>(din, dout, std::move(choi));
}

std::vector<Matrix> kraus_from_choi(const Channel& c) {
  const auto [values, vectors] = eigh(c.choi);
  std::vector<Matrix> kraus;
  for (Eigen::Index k = values.size(); k-- > 0;) {
    if (values(k) < 1e-11) continue;
    Matrix op(idx(c.dout), idx(c.din));
    const double s = std::sqrt(values(k));
    for (std::size_t a = 0; a < c.dout; ++a) {
      for (std::size_t i = 0; i < c.din; ++i) op(idx(a), idx(i)) = s * vectors(idx(a * c.din + i), k);
    }
    kraus.push_back(std::move(op));
  }
  return kraus;
}

Channel identity_channel(std::size_t d) {
  return channel_from_kraus({Matrix::Identity(idx(d), idx(d))});
}

Channel unitary_channel(const Matrix& u) { return channel_from_kraus({u}); }

Channel depolarizing(std::size_t d, double p) {
  // completely positive for 0 <= p <= d^2/(d^2-1)
  const double d2 = static_cast<double>(d * d);
  if (d == 0 || p < 0.0 || (d > 1 && p > d2 / (d2 - 1.0))) {
    throw NumericalError("depolarizing: parameter out of range");
  }
  Vector phi = Vector::Zero(idx(d * d));
  for (std::size_t i = 0; i < d; ++i) phi(idx(i * d + i)) = 1.0;
  Matrix choi = (1.0 - p) * phi * phi.adjoint() +
                (p / static_cast<double>(d)) * Matrix::Identity(idx(d * d), idx(d * d));
  return make_map<Channel>(d, d, std::move(choi));
}

Channel depolarizing_qubit_kraus(double p) {
  Matrix x(2, 2), y(2, 2), z(2, 2);
  x << 0, 1, 1, 0;
  y << 0, cplx(0, -1), cplx(0, 1), 0;
  z << 1, 0, 0, -1;
  const Matrix id = Matrix::Identity(2, 2);
  return channel_from_kraus({std::sqrt(1.0 - 3.0 * p / 4.0) * id, std::sqrt(p / 4.0) * x,
                             std::sqrt(p / 4.0) * y, std::sqrt(p / 4.0) * z});
}

Channel reset_channel(std::size_t d, std::size_t k) {
  if (k >= d) throw DimensionError("reset_channel: target state out of range");
  std::vector<Matrix> kraus;
  for (std::size_t j = 0; j < d; ++j) {
    Matrix op = Matrix::Zero(idx(d), idx(d));
    op(idx(k), idx(j)) = 1.0;
    kraus.push_back(std::move(op));
  }
  return channel_from_kraus(kraus);
}

HPMap transpose_map(std::size_t d) {
  Matrix choi = Matrix::Zero(idx(d * d), idx(d * d));
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) choi(idx(j * d + i), idx(i * d + j)) = 1.0;
  }
  return make_map<HPMap>(d, d, std::move(choi));
}

Channel random_channel(std::size_t din, std::size_t dout, std::size_t rank, Rng& rng) {
  if (rank == 0 || rank * dout < din) {
    throw DimensionError("random_channel: rank * dout must be at least din");
  }
  const Matrix g = ginibre(din * dout, rank, rng);
  const Matrix w = g * g.adjoint();
  const Matrix t = partial_trace_output(w, din, dout);
  const Matrix t_inv_sqrt =
      hermitian_function(t, [](double x) { return 1.0 / std::sqrt(x); });
  const Matrix lift = Eigen::kroneckerProduct(Matrix::Identity(idx(dout), idx(dout)), t_inv_sqrt);
  Matrix choi = lift * w * lift;
  choi = 0.5 * (choi + choi.adjoint()).eval();
  return make_map<Channel>(din, dout, std::move(choi));
}

Operator apply_choi(const Operator& choi, std::size_t din, std::size_t dout,
                    const Operator& rho) {
  if (!rho.is_square() || rho.rows() != din) {
    throw DimensionError("apply: input has dimension " + std::to_string(rho.rows()) +
                         ", map expects " + std::to_string(din));
  }
  Matrix out(idx(dout), idx(dout));
  const Matrix& j = choi.matrix();
  const Matrix& r = rho.matrix();
  for (std::size_t b = 0; b < dout; ++b) {
    for (std::size_t a = 0; a < dout; ++a) {
      out(idx(a), idx(b)) =
          j.block(idx(a * din), idx(b * din), idx(din), idx(din)).cwiseProduct(r).sum();
    }
  }
  return Operator(std::move(out));
}

Operator apply_extended_choi(const Operator& choi, std::size_t din, std::size_t dout,
                             const Operator& rho) {
  if (!rho.is_square() || rho.rows() % din != 0) {
    throw DimensionError("apply_extended: input dimension not a multiple of din");
  }
  const std::size_t dref = rho.rows() / din;
  const Matrix& j = choi.matrix();
  const Matrix& r = rho.matrix();
  Matrix out = Matrix::Zero(idx(dout * dref), idx(dout * dref));
  for (std::size_t b = 0; b < dout; ++b) {
    for (std::size_t a = 0; a < dout; ++a) {
      auto block = out.block(idx(a * dref), idx(b * dref), idx(dref), idx(dref));
      for (std::size_t jj = 0; jj < din; ++jj) {
        for (std::size_t ii = 0; ii < din; ++ii) {
          const cplx w = j(idx(a * din + ii), idx(b * din + jj));
          if (w == cplx(0.0)) continue;
          block += w * r.block(idx(ii * dref), idx(jj * dref), idx(dref), idx(dref));
        }
      }
    }
  }
  return {std::move(out), Dims{dout, dref}};
}

CptpReport is_cptp(const Operator& choi, std::size_t din, std::size_t dout, double tol) {
  CptpReport report;
  report.hermiticity_defect = choi.hermiticity_defect();
  report.min_choi_eigenvalue = min_eigenvalue(choi.matrix());
  const Matrix t = partial_trace_output(choi.matrix(), din, dout);
  report.tp_deviation = (t - Matrix::Identity(idx(din), idx(din))).cwiseAbs().maxCoeff();
  report.cp = report.hermiticity_defect <= tol && report.min_choi_eigenvalue >= -tol;
  report.tp = report.tp_deviation <= tol;
  return report;
}

Matrix tensor_with_identity_choi(const Matrix& choi, std::size_t din, std::size_t dout,
                                 std::size_t dref) {
  const std::size_t in2 = din * dref;
  const std::size_t n = dout * dref * in2;
  Matrix out = Matrix::Zero(idx(n), idx(n));
  for (std::size_t a = 0; a < dout; ++a) {
    for (std::size_t i = 0; i < din; ++i) {
      for (std::size_t b = 0; b < dout; ++b) {
        for (std::size_t j = 0; j < din; ++j) {
          const cplx w = choi(idx(a * din + i), idx(b * din + j));
          if (w == cplx(0.0)) continue;
          for (std::size_t r = 0; r < dref; ++r) {
            for (std::size_t s = 0; s < dref; ++s) {
              const std::size_t row = (a * dref + r) * in2 + i * dref + r;
              const std::size_t col = (b * dref + s) * in2 + j * dref + s;
              out(idx(row), idx(col)) = w;
            }
          }
        }
      }
    }
  }
  return out;
}

Matrix compose_choi(const Operator& f, std::size_t f_din, std::size_t f_dout,
                    const Operator& e, std::size_t e_din, std::size_t e_dout) {
  if (f_din != e_dout) throw DimensionError("compose: inner dimensions do not match");
  const std::size_t mid = e_dout;
  Matrix out = Matrix::Zero(idx(f_dout * e_din), idx(f_dout * e_din));
  const Matrix& je = e.matrix();
  const Matrix& jf = f.matrix();
  // J_fe[(c,i),(d,j)] = sum_ab J_e[(a,i),(b,j)] J_f[(c,a),(d,b)]
  for (std::size_t a = 0; a < mid; ++a) {
    for (std::size_t b = 0; b < mid; ++b) {
      const Matrix e_block = je.block(idx(a * e_din), idx(b * e_din), idx(e_din), idx(e_din));
      if (e_block.isZero(0.0)) continue;
      for (std::size_t c = 0; c < f_dout; ++c) {
        for (std::size_t d = 0; d < f_dout; ++d) {
          const cplx w = jf(idx(c * mid + a), idx(d * mid + b));
          if (w == cplx(0.0)) continue;
          out.block(idx(c * e_din), idx(d * e_din), idx(e_din), idx(e_din)) += w * e_block;
        }
      }
    }
  }
  return out;
}

Matrix precompose_unitary_choi(const Operator& choi, std::size_t din, std::size_t dout,
                               const Matrix& u) {
  if (static_cast<std::size_t>(u.rows()) != din || u.rows() != u.cols()) {
    throw DimensionError("precompose_unitary: unitary does not match din");
  }
  const Matrix lift =
      Eigen::kroneckerProduct(Matrix::Identity(idx(dout), idx(dout)), u.transpose());
  return lift * choi.matrix() * lift.adjoint();
}

Matrix postcompose_unitary_choi(const Operator& choi, std::size_t din, std::size_t dout,
                                const Matrix& v) {
  if (static_cast<std::size_t>(v.rows()) != dout || v.rows() != v.cols()) {
    throw DimensionError("postcompose_unitary: unitary does not match dout");
  }
  const Matrix lift = Eigen::kroneckerProduct(v, Matrix::Identity(idx(din), idx(din)));
  return lift * choi.matrix() * lift.adjoint();
}

std::size_t copies_for(std::size_t din, std::size_t dlocal) {
  if (dlocal < 1) throw DimensionError("local dimension must be positive");
  if (dlocal == 1) {
    if (din == 1) return 1;
    throw DimensionError("din is not a power of the local dimension");
  }
  std::size_t n = 0;
  std::size_t acc = 1;
  while (acc < din) {
    acc *= dlocal;
    ++n;
  }
  if (acc != din || n == 0) {
    throw DimensionError("din " + std::to_string(din) + " is not a perfect power of " +
                         std::to_string(dlocal));
  }
  return n;
}

namespace {

void check_twirl_shape(std::size_t din, std::size_t n, std::size_t dlocal, std::size_t cap) {
  if (n == 0) throw DimensionError("twirl: n must be positive");
  if (n > cap) {
    throw DimensionError("twirl: n = " + std::to_string(n) + " exceeds the cap of " +
                         std::to_string(cap) + " copies");
  }
  std::size_t expect = 1;
  for (std::size_t k = 0; k < n; ++k) expect *= dlocal;
  if (expect != din) {
    throw DimensionError("twirl: din " + std::to_string(din) + " is not " +
                         std::to_string(dlocal) + "^" + std::to_string(n));
  }
}

}  // namespace

Matrix twirl_permutation_choi(const Operator& choi, std::size_t din, std::size_t dout,
                              std::size_t n, std::size_t dlocal) {
  check_twirl_shape(din, n, dlocal, kMaxTwirlCopies);
  const auto perms = all_permutations(n);
  Matrix acc = Matrix::Zero(choi.matrix().rows(), choi.matrix().cols());
  for (const auto& pi : perms) {
    acc += precompose_permutation(choi.matrix(), din, dout, perm_index_map(n, dlocal, pi));
  }
  acc /= static_cast<double>(perms.size());
  return acc;
}

Matrix twirl_with_transcript_choi(const Operator& choi, std::size_t din, std::size_t dout,
                                  std::size_t n, std::size_t dlocal) {
  check_twirl_shape(din, n, dlocal, kMaxTranscriptCopies);
  const auto perms = all_permutations(n);
  const std::size_t reg = perms.size();
  const std::size_t big_out = dout * reg;
  Matrix out = Matrix::Zero(idx(big_out * din), idx(big_out * din));
  const double w = 1.0 / static_cast<double>(reg);
  for (std::size_t p = 0; p < reg; ++p) {
    const Matrix jp = precompose_permutation(choi.matrix(), din, dout,
                                             perm_index_map(n, dlocal, perms[p]));
    // output index (a, p) -> a * reg + p
    for (std::size_t a = 0; a < dout; ++a) {
      for (std::size_t b = 0; b < dout; ++b) {
        out.block(idx((a * reg + p) * din), idx((b * reg + p) * din), idx(din), idx(din)) =
            w * jp.block(idx(a * din), idx(b * din), idx(din), idx(din));
      }
    }
  }
  return out;
}

Channel transcript_relabeling(std::size_t dbase, std::size_t n, std::size_t perm_index) {
  const auto perms = all_permutations(n);
  if (perm_index >= perms.size()) throw DimensionError("transcript_relabeling: bad index");
  const Permutation pinv = inverse(perms[perm_index]);
  const std::size_t reg = perms.size();
  Matrix u = Matrix::Zero(idx(dbase * reg), idx(dbase * reg));
  for (std::size_t s = 0; s < reg; ++s) {
    const std::size_t target = permutation_index(compose(perms[s], pinv));
    for (std::size_t a = 0; a < dbase; ++a) u(idx(a * reg + target), idx(a * reg + s)) = 1.0;
  }
  return unitary_channel(u);
}

}  // namespace postsel
