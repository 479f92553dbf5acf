#pragma once

// Dense complex linear algebra over multi-factor Hilbert spaces.
//
// Tensor-factor convention: for dims [d0, d1, ..., dk-1] the flat index of
// |i0 i1 ... ik-1> is i0*d1*...*dk-1 + ... + ik-1 (first factor most
// significant), which is the convention of the Kronecker product.

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "postsel/random.hpp"

namespace postsel {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Dims = std::vector<std::size_t>;

/// Raised for shape, dimension and index errors.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when an input violates a numerical precondition (Hermiticity,
/// positivity, normalization, support).
class NumericalError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kHermitianTol = 1e-9;
inline constexpr double kPsdTol = 1e-9;

std::size_t product(std::span<const std::size_t> dims);

/// Dense complex matrix carrying the tensor factorization of its row space.
/// When square, the column space carries the same factorization. Column
/// vectors (kets) have cols() == 1.
class Operator {
 public:
  Operator() = default;
  /// dims must multiply to m.rows().
  Operator(Matrix m, Dims dims);
  /// Single-factor operator (dims = {rows}).
  explicit Operator(Matrix m);

  static Operator identity(const Dims& dims);
  static Operator zero(const Dims& dims);
  /// |i><i| on the space with the given dims.
  static Operator basis_projector(const Dims& dims, std::size_t index);
  static Operator ket(const Dims& dims, std::size_t index);
  static Operator diagonal(const std::vector<double>& diag);

  std::size_t rows() const { return static_cast<std::size_t>(m_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(m_.cols()); }
  bool is_square() const { return m_.rows() == m_.cols(); }
  const Dims& dims() const { return dims_; }
  const Matrix& matrix() const { return m_; }
  Matrix& matrix() { return m_; }

  cplx operator()(std::size_t r, std::size_t c) const {
    return m_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }

  cplx trace() const { return m_.trace(); }
  Operator adjoint() const { return {m_.adjoint(), dims_}; }
  /// Same entries, new factorization; product must match.
  Operator with_dims(Dims dims) const { return {m_, std::move(dims)}; }
  /// |v><v| for a ket.
  Operator projector() const;

  /// Max-abs entry of m - m^dagger.
  double hermiticity_defect() const;
  bool is_hermitian(double tol = kHermitianTol) const;
  bool is_density(double tol = kPsdTol) const;

  Operator& operator+=(const Operator& o);
  Operator& operator-=(const Operator& o);
  Operator& operator*=(cplx s);

 private:
  Matrix m_;
  Dims dims_;
};

Operator operator+(Operator a, const Operator& b);
Operator operator-(Operator a, const Operator& b);
Operator operator*(cplx s, Operator a);
/// Matrix product; result takes the row dims of a.
Operator operator*(const Operator& a, const Operator& b);

Operator kron(const Operator& a, const Operator& b);
Operator kron_power(const Operator& a, std::size_t n);

/// Trace out every factor not listed in keep. Result dims follow the order
/// of keep, which must be strictly increasing.
Operator partial_trace(const Operator& m, const std::vector<std::size_t>& keep);

/// Conjugate (or, for kets, multiply) by the unitary that permutes tensor
/// factors so that factor k of the result is factor perm[k] of the input.
Operator reorder_factors(const Operator& m, const std::vector<std::size_t>& perm);
std::vector<std::size_t> inverse_permutation(const std::vector<std::size_t>& perm);

/// Sum of singular values. Hermitian inputs take the eigenvalue route.
double trace_norm(const Operator& m);
double trace_norm(const Matrix& m);
double frobenius_distance(const Operator& a, const Operator& b);
double max_abs_distance(const Operator& a, const Operator& b);

struct EigenDecomposition {
  RealVector values;  // ascending
  Matrix vectors;     // orthonormal columns
};

/// Spectral decomposition of a Hermitian operator; throws NumericalError
/// when the input is not Hermitian within kHermitianTol.
EigenDecomposition eigh(const Operator& m);
EigenDecomposition eigh(const Matrix& m);
double min_eigenvalue(const Matrix& hermitian);
double max_eigenvalue(const Matrix& hermitian);

/// f applied to the spectrum of a Hermitian matrix.
Matrix hermitian_function(const Matrix& m, double (*f)(double));
/// Principal square root of a PSD matrix; eigenvalues below zero clamp to 0.
Matrix psd_sqrt(const Matrix& m);

/// d x d matrix of independent standard complex Gaussians.
Matrix ginibre(std::size_t rows, std::size_t cols, Rng& rng);
/// Density operator distributed by the Hilbert-Schmidt measure: GG^dag/tr.
Operator sample_hs_density(std::size_t d, Rng& rng);
/// Normalized standard complex Gaussian vector (Haar-random pure state).
Operator sample_haar_ket(std::size_t dim, Rng& rng);
Operator sample_haar_pure(std::size_t dim, Rng& rng);
/// Haar-random unitary via QR of a Ginibre matrix with phase correction.
Matrix sample_haar_unitary(std::size_t dim, Rng& rng);
/// Random Hermitian matrix with Gaussian entries.
Matrix sample_hermitian(std::size_t dim, Rng& rng);

}  // namespace postsel
