#pragma once

// Linear maps on operators represented by their Choi matrix
//
//   J(E) = sum_{ij} E(|i><j|) (x) |i><j|      (output (x) input, unnormalized)
//
// so J[(a,i),(b,j)] = <a|E(|i><j|)|b> and E(rho) = Tr_in[J (1 (x) rho^T)].
// This one convention is used throughout the library.

#include <concepts>
#include <cstddef>
#include <functional>
#include <vector>

#include "postsel/linalg.hpp"

namespace postsel {

/// Hermiticity-preserving linear map (typically a difference of channels).
struct HPMap {
  std::size_t din = 1;
  std::size_t dout = 1;
  Operator choi;
};

/// Completely positive trace-preserving map. Factories establish the
/// invariants; the struct itself does not re-check them.
struct Channel {
  std::size_t din = 1;
  std::size_t dout = 1;
  Operator choi;

  /// Validated construction from a Choi matrix; throws NumericalError when
  /// the map is not CPTP within tol.
  static Channel from_choi(std::size_t din, std::size_t dout, Matrix choi,
                           double tol = kPsdTol);

  HPMap as_hp() const { return {din, dout, choi}; }
};

template <typename M>
concept ChoiMap = std::same_as<M, Channel> || std::same_as<M, HPMap>;

/// Wraps a Choi matrix with din/dout and the [dout, din] factor layout.
template <ChoiMap M>
M make_map(std::size_t din, std::size_t dout, Matrix choi) {
  if (static_cast<std::size_t>(choi.rows()) != din * dout || choi.rows() != choi.cols()) {
    throw DimensionError("Choi matrix shape does not match din * dout");
  }
  return M{din, dout, Operator(std::move(choi), Dims{dout, din})};
}

// -- construction -----------------------------------------------------------

/// All Kraus operators must share a dout x din shape and satisfy
/// sum K^dag K = I within 1e-9.
Channel channel_from_kraus(const std::vector<Matrix>& kraus);
/// Kraus operators from the Choi eigendecomposition; eigenvalues below
/// 1e-11 are discarded.
std::vector<Matrix> kraus_from_choi(const Channel& c);

Channel identity_channel(std::size_t d);
Channel unitary_channel(const Matrix& u);
/// rho -> (1-p) rho + p tr(rho) I/d.
Channel depolarizing(std::size_t d, double p);
/// Four-Kraus qubit depolarizing channel (same map as depolarizing(2, p)).
Channel depolarizing_qubit_kraus(double p);
/// rho -> tr(rho) |k><k|.
Channel reset_channel(std::size_t d, std::size_t k);
/// rho -> rho^T; positive but not completely positive.
HPMap transpose_map(std::size_t d);
/// Random CPTP map from normalizing a Ginibre-distributed Choi matrix.
Channel random_channel(std::size_t din, std::size_t dout, std::size_t rank, Rng& rng);

// -- action and algebra -----------------------------------------------------

Operator apply_choi(const Operator& choi, std::size_t din, std::size_t dout,
                    const Operator& rho);

template <ChoiMap M>
Operator apply(const M& m, const Operator& rho) {
  return apply_choi(m.choi, m.din, m.dout, rho);
}

/// (m (x) id_ref)(rho) for rho on input (x) reference with reference
/// dimension rho.rows()/din, computed without assembling the extended Choi.
/// The result has dims [dout, dref].
Operator apply_extended_choi(const Operator& choi, std::size_t din, std::size_t dout,
                             const Operator& rho);

template <ChoiMap M>
Operator apply_extended(const M& m, const Operator& rho) {
  return apply_extended_choi(m.choi, m.din, m.dout, rho);
}

struct CptpReport {
  bool cp = false;
  bool tp = false;
  double min_choi_eigenvalue = 0.0;
  /// ||Tr_out J - I||_inf (max-abs entry)
  double tp_deviation = 0.0;
  double hermiticity_defect = 0.0;
};

CptpReport is_cptp(const Operator& choi, std::size_t din, std::size_t dout, double tol = kPsdTol);

template <ChoiMap M>
CptpReport is_cptp(const M& m, double tol = kPsdTol) {
  return is_cptp(m.choi, m.din, m.dout, tol);
}

Matrix tensor_with_identity_choi(const Matrix& choi, std::size_t din, std::size_t dout,
                                 std::size_t dref);

template <ChoiMap M>
M tensor_with_identity(const M& m, std::size_t dref) {
  if (dref == 0) throw DimensionError("tensor_with_identity: dref must be positive");
  if (dref == 1) return m;
  return make_map<M>(m.din * dref, m.dout * dref,
                     tensor_with_identity_choi(m.choi.matrix(), m.din, m.dout, dref));
}

/// Choi matrix of f o e.
Matrix compose_choi(const Operator& f, std::size_t f_din, std::size_t f_dout,
                    const Operator& e, std::size_t e_din, std::size_t e_dout);

template <ChoiMap F, ChoiMap E>
auto compose(const F& f, const E& e) {
  if (f.din != e.dout) throw DimensionError("compose: inner dimensions do not match");
  Matrix j = compose_choi(f.choi, f.din, f.dout, e.choi, e.din, e.dout);
  if constexpr (std::same_as<F, Channel> && std::same_as<E, Channel>) {
    return make_map<Channel>(e.din, f.dout, std::move(j));
  } else {
    return make_map<HPMap>(e.din, f.dout, std::move(j));
  }
}

template <ChoiMap A, ChoiMap B>
HPMap subtract(const A& e, const B& f) {
  if (e.din != f.din || e.dout != f.dout) throw DimensionError("subtract: shape mismatch");
  return make_map<HPMap>(e.din, e.dout, e.choi.matrix() - f.choi.matrix());
}

template <ChoiMap A, ChoiMap B>
HPMap add(const A& e, const B& f) {
  if (e.din != f.din || e.dout != f.dout) throw DimensionError("add: shape mismatch");
  return make_map<HPMap>(e.din, e.dout, e.choi.matrix() + f.choi.matrix());
}

template <ChoiMap A>
HPMap scale(const A& e, double s) {
  return make_map<HPMap>(e.din, e.dout, s * e.choi.matrix());
}

/// Choi of rho -> m(U rho U^dag).
Matrix precompose_unitary_choi(const Operator& choi, std::size_t din, std::size_t dout,
                               const Matrix& u);
/// Choi of rho -> V m(rho) V^dag.
Matrix postcompose_unitary_choi(const Operator& choi, std::size_t din, std::size_t dout,
                                const Matrix& v);

template <ChoiMap M>
M precompose_unitary(const M& m, const Matrix& u) {
  return make_map<M>(m.din, m.dout, precompose_unitary_choi(m.choi, m.din, m.dout, u));
}

template <ChoiMap M>
M postcompose_unitary(const M& m, const Matrix& v) {
  return make_map<M>(m.din, m.dout, postcompose_unitary_choi(m.choi, m.din, m.dout, v));
}

// -- permutation symmetry ---------------------------------------------------

inline constexpr std::size_t kMaxTwirlCopies = 6;
inline constexpr std::size_t kMaxTranscriptCopies = 5;

/// n such that dlocal^n == din; throws DimensionError otherwise.
std::size_t copies_for(std::size_t din, std::size_t dlocal);

Matrix twirl_permutation_choi(const Operator& choi, std::size_t din, std::size_t dout,
                              std::size_t n, std::size_t dlocal);

/// rho -> (1/n!) sum_pi m(pi rho pi^-1). Requires din == dlocal^n, n <= 6.
template <ChoiMap M>
M twirl_permutation(const M& m, std::size_t n, std::size_t dlocal) {
  return make_map<M>(m.din, m.dout,
                     twirl_permutation_choi(m.choi, m.din, m.dout, n, dlocal));
}

Matrix twirl_with_transcript_choi(const Operator& choi, std::size_t din, std::size_t dout,
                                  std::size_t n, std::size_t dlocal);

/// rho -> (1/n!) sum_pi m(pi rho pi^-1) (x) |pi><pi| with an n!-dimensional
/// classical register appended as the last output factor. Permutations are
/// indexed in lexicographic order (see symmetric.hpp). Requires n <= 5.
template <ChoiMap M>
M twirl_with_transcript(const M& m, std::size_t n, std::size_t dlocal) {
  const std::size_t reg = [&] {
    std::size_t f = 1;
    for (std::size_t k = 2; k <= n; ++k) f *= k;
    return f;
  }();
  return make_map<M>(m.din, m.dout * reg,
                     twirl_with_transcript_choi(m.choi, m.din, m.dout, n, dlocal));
}

/// Register relabeling K_pi for the transcript twirl: |sigma> -> |sigma o pi^-1>
/// on the register, identity on the first dbase output dimensions. With it,
/// out o pi == K_pi o out.
Channel transcript_relabeling(std::size_t dbase, std::size_t n, std::size_t perm_index);

}  // namespace postsel
