#include "postsel/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace postsel {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void require_square(const Operator& m, const char* what) {
  if (!m.is_square()) {
    throw DimensionError(std::string(what) + ": operator must be square");
  }
}

void check_permutation(const std::vector<std::size_t>& perm, std::size_t n) {
  if (perm.size() != n) {
    throw DimensionError("permutation length " + std::to_string(perm.size()) +
                         " does not match factor count " + std::to_string(n));
  }
  std::vector<bool> seen(n, false);
  for (auto p : perm) {
    if (p >= n || seen[p]) throw DimensionError("malformed permutation");
    seen[p] = true;
  }
}

// For each flat index of the reordered space, the flat index in the original.
std::vector<std::size_t> reorder_index_map(const Dims& dims,
                                           const std::vector<std::size_t>& perm) {
  const std::size_t k = dims.size();
  const std::size_t total = product(dims);
  std::vector<std::size_t> old_stride(k, 1);
  for (std::size_t f = k; f-- > 1;) old_stride[f - 1] = old_stride[f] * dims[f];

  std::vector<std::size_t> map(total);
  std::vector<std::size_t> digits(k, 0);  // digits in new ordering
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t old_flat = 0;
    for (std::size_t f = 0; f < k; ++f) old_flat += digits[f] * old_stride[perm[f]];
    map[flat] = old_flat;
    for (std::size_t f = k; f-- > 0;) {
      if (++digits[f] < dims[perm[f]]) break;
      digits[f] = 0;
    }
  }
  return map;
}

}  // namespace

std::size_t product(std::span<const std::size_t> dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         std::multiplies<>());
}

Operator::Operator(Matrix m, Dims dims) : m_(std::move(m)), dims_(std::move(dims)) {
  if (dims_.empty()) dims_ = {static_cast<std::size_t>(m_.rows())};
  for (auto d : dims_) {
    if (d == 0) throw DimensionError("tensor factor of dimension 0");
  }
  if (product(dims_) != static_cast<std::size_t>(m_.rows())) {
    throw DimensionError("dims product " + std::to_string(product(dims_)) +
                         " does not match row count " + std::to_string(m_.rows()));
  }
}

Operator::Operator(Matrix m) : Operator(std::move(m), Dims{}) {}

Operator Operator::identity(const Dims& dims) {
  const auto n = idx(product(dims));
  return {Matrix::Identity(n, n), dims};
}

Operator Operator::zero(const Dims& dims) {
  const auto n = idx(product(dims));
  return {Matrix::Zero(n, n), dims};
}

Operator Operator::basis_projector(const Dims& dims, std::size_t index) {
  Operator p = zero(dims);
  if (index >= p.rows()) throw DimensionError("basis index out of range");
  p.m_(idx(index), idx(index)) = 1.0;
  return p;
}

Operator Operator::ket(const Dims& dims, std::size_t index) {
  const std::size_t n = product(dims);
  if (index >= n) throw DimensionError("basis index out of range");
  Matrix v = Matrix::Zero(idx(n), 1);
  v(idx(index), 0) = 1.0;
  return {std::move(v), dims};
}

Operator Operator::diagonal(const std::vector<double>& diag) {
  Matrix m = Matrix::Zero(idx(diag.size()), idx(diag.size()));
  for (std::size_t i = 0; i < diag.size(); ++i) m(idx(i), idx(i)) = diag[i];
  return Operator(std::move(m));
}

Operator Operator::projector() const {
  if (cols() != 1) throw DimensionError("projector: operand is not a ket");
  return {m_ * m_.adjoint(), dims_};
}

double Operator::hermiticity_defect() const {
  if (!is_square()) return std::numeric_limits<double>::infinity();
  if (m_.size() == 0) return 0.0;
  return (m_ - m_.adjoint()).cwiseAbs().maxCoeff();
}

bool Operator::is_hermitian(double tol) const { return hermiticity_defect() <= tol; }

bool Operator::is_density(double tol) const {
  if (!is_hermitian(tol)) return false;
  if (std::abs(trace() - 1.0) > tol) return false;
  return min_eigenvalue(m_) >= -tol;
}

Operator& Operator::operator+=(const Operator& o) {
  if (o.m_.rows() != m_.rows() || o.m_.cols() != m_.cols()) {
    throw DimensionError("operator sum: shape mismatch");
  }
  m_ += o.m_;
  return *this;
}

Operator& Operator::operator-=(const Operator& o) {
  if (o.m_.rows() != m_.rows() || o.m_.cols() != m_.cols()) {
    throw DimensionError("operator difference: shape mismatch");
  }
  m_ -= o.m_;
  return *this;
}

Operator& Operator::operator*=(cplx s) {
  m_ *= s;
  return *this;
}

Operator operator+(Operator a, const Operator& b) { return a += b; }
Operator operator-(Operator a, const Operator& b) { return a -= b; }
Operator operator*(cplx s, Operator a) { return a *= s; }

Operator operator*(const Operator& a, const Operator& b) {
  if (a.cols() != b.rows()) throw DimensionError("operator product: inner dimension mismatch");
  return {a.matrix() * b.matrix(), a.dims()};
}

Operator kron(const Operator& a, const Operator& b) {
  const auto ar = a.matrix().rows(), ac = a.matrix().cols();
  const auto br = b.matrix().rows(), bc = b.matrix().cols();
  Matrix out(ar * br, ac * bc);
  for (Eigen::Index i = 0; i < ar; ++i) {
    for (Eigen::Index j = 0; j < ac; ++j) {
      out.block(i * br, j * bc, br, bc) = a.matrix()(i, j) * b.matrix();
    }
  }
  Dims dims = a.dims();
  dims.insert(dims.end(), b.dims().begin(), b.dims().end());
  return {std::move(out), std::move(dims)};
}

Operator kron_power(const Operator& a, std::size_t n) {
  if (n == 0) throw DimensionError("kron_power: n must be positive");
  Operator out = a;
  for (std::size_t i = 1; i < n; ++i) out = kron(out, a);
  return out;
}

std::vector<std::size_t> inverse_permutation(const std::vector<std::size_t>& perm) {
  check_permutation(perm, perm.size());
  std::vector<std::size_t> inv(perm.size());
  for (std::size_t k = 0; k < perm.size(); ++k) inv[perm[k]] = k;
  return inv;
}

Operator reorder_factors(const Operator& m, const std::vector<std::size_t>& perm) {
  const Dims& dims = m.dims();
  check_permutation(perm, dims.size());
  Dims new_dims(dims.size());
  for (std::size_t k = 0; k < perm.size(); ++k) new_dims[k] = dims[perm[k]];

  const auto map = reorder_index_map(dims, perm);
  const std::size_t n = map.size();
  if (m.cols() == 1) {
    Matrix out(idx(n), 1);
    for (std::size_t a = 0; a < n; ++a) out(idx(a), 0) = m.matrix()(idx(map[a]), 0);
    return {std::move(out), std::move(new_dims)};
  }
  require_square(m, "reorder_factors");
  Matrix out(idx(n), idx(n));
  for (std::size_t b = 0; b < n; ++b) {
    for (std::size_t a = 0; a < n; ++a) {
      out(idx(a), idx(b)) = m.matrix()(idx(map[a]), idx(map[b]));
    }
  }
  return {std::move(out), std::move(new_dims)};
}

Operator partial_trace(const Operator& m, const std::vector<std::size_t>& keep) {
  require_square(m, "partial_trace");
  const Dims& dims = m.dims();
  for (std::size_t i = 0; i < keep.size(); ++i) {
    if (keep[i] >= dims.size()) {
      throw DimensionError("partial_trace: factor index " + std::to_string(keep[i]) +
                           " out of range");
    }
    if (i > 0 && keep[i] <= keep[i - 1]) {
      throw DimensionError("partial_trace: keep must be strictly increasing");
    }
  }
  std::vector<std::size_t> perm = keep;
  Dims kept_dims;
  for (auto k : keep) kept_dims.push_back(dims[k]);
  for (std::size_t f = 0; f < dims.size(); ++f) {
    if (!std::binary_search(keep.begin(), keep.end(), f)) perm.push_back(f);
  }
  const std::size_t dk = product(kept_dims);
  const std::size_t dt = m.rows() / dk;
  if (keep.empty()) {
    Matrix out(1, 1);
    out(0, 0) = m.trace();
    return {std::move(out), Dims{1}};
  }
  const Operator r = reorder_factors(m, perm);
  Matrix out = Matrix::Zero(idx(dk), idx(dk));
  for (std::size_t t = 0; t < dt; ++t) {
    for (std::size_t j = 0; j < dk; ++j) {
      for (std::size_t i = 0; i < dk; ++i) {
        out(idx(i), idx(j)) += r.matrix()(idx(i * dt + t), idx(j * dt + t));
      }
    }
  }
  return {std::move(out), std::move(kept_dims)};
}

double trace_norm(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("trace_norm: operator must be square");
  if (m.size() == 0) return 0.0;
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() <= 1e-13 * scale) {
    Matrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
  }
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues().sum();
}

double trace_norm(const Operator& m) {
  require_square(m, "trace_norm");
  return trace_norm(m.matrix());
}

double frobenius_distance(const Operator& a, const Operator& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("frobenius_distance: shape mismatch");
  }
  return (a.matrix() - b.matrix()).norm();
}

double max_abs_distance(const Operator& a, const Operator& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("max_abs_distance: shape mismatch");
  }
  if (a.matrix().size() == 0) return 0.0;
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

EigenDecomposition eigh(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("eigh: operator must be square");
  if (m.size() > 0) {
    const double defect = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (defect > kHermitianTol) {
      throw NumericalError("eigh: input not Hermitian (defect " + std::to_string(defect) + ")");
    }
  }
  Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  return {es.eigenvalues(), es.eigenvectors()};
}

EigenDecomposition eigh(const Operator& m) { return eigh(m.matrix()); }

double min_eigenvalue(const Matrix& hermitian) {
  Matrix h = 0.5 * (hermitian + hermitian.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double max_eigenvalue(const Matrix& hermitian) {
  Matrix h = 0.5 * (hermitian + hermitian.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

Matrix hermitian_function(const Matrix& m, double (*f)(double)) {
  const auto [values, vectors] = eigh(m);
  RealVector fv = values.unaryExpr([f](double x) { return f(x); });
  return vectors * fv.cast<cplx>().asDiagonal() * vectors.adjoint();
}

Matrix psd_sqrt(const Matrix& m) {
  return hermitian_function(m, [](double x) { return std::sqrt(std::max(x, 0.0)); });
}

Matrix ginibre(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix g(idx(rows), idx(cols));
  for (Eigen::Index j = 0; j < g.cols(); ++j) {
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      g(i, j) = cplx(re, im);
    }
  }
  return g;
}

Operator sample_hs_density(std::size_t d, Rng& rng) {
  if (d == 0) throw DimensionError("sample_hs_density: d must be positive");
  const Matrix g = ginibre(d, d, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return Operator(std::move(rho));
}

Operator sample_haar_ket(std::size_t dim, Rng& rng) {
  if (dim == 0) throw DimensionError("sample_haar_ket: dimension must be positive");
  Matrix v = ginibre(dim, 1, rng);
  v /= v.norm();
  return Operator(std::move(v));
}

Operator sample_haar_pure(std::size_t dim, Rng& rng) {
  return sample_haar_ket(dim, rng).projector();
}

Matrix sample_haar_unitary(std::size_t dim, Rng& rng) {
  const Matrix g = ginibre(dim, dim, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    const cplx rjj = r(j, j);
    const double a = std::abs(rjj);
    if (a > 0) q.col(j) *= rjj / a;
  }
  return q;
}

Matrix sample_hermitian(std::size_t dim, Rng& rng) {
  const Matrix g = ginibre(dim, dim, rng);
  return 0.5 * (g + g.adjoint());
}

}  // namespace postsel
