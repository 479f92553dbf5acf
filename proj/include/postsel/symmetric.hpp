#pragma once

// Symmetric-subspace machinery and the de Finetti state family.
//
// Layout: objects on Sym^n(H (x) K) live on (H (x) K)^{(x) n} in interleaved
// factor order [H_0, K_0, H_1, K_1, ...], each factor of dimension d. Use
// block_to_interleaved()/interleaved_to_block() for the [H_0..H_{n-1},
// K_0..K_{n-1}] order.

#include <cstdint>
#include <optional>
#include <vector>

#include "postsel/linalg.hpp"
#include "postsel/permutation.hpp"

namespace postsel {

/// Sym^n(C^D) with its occupation-number basis. Basis vector k is the
/// normalized uniform superposition of all strings whose occupation
/// numbers (m_0, ..., m_{D-1}) equal occupations[k]; occupations are in
/// ascending lexicographic order.
struct SymSpace {
  std::size_t n = 0;
  std::size_t local_dim = 0;
  std::size_t dim = 0;
  std::vector<std::vector<std::size_t>> occupations;
  /// D^n x dim matrix with orthonormal columns.
  Operator basis;

  /// basis * basis^dag.
  Operator projector() const;
};

SymSpace sym_space(std::size_t n, std::size_t local_dim);

/// Projector onto Sym^n(C^D) by explicit averaging over all n! permutation
/// operators.
Operator sym_projector_by_averaging(std::size_t n, std::size_t local_dim);

/// binom(n + d^2 - 1, n) with its polynomial bound (n+1)^(d^2-1).
struct GnD {
  std::uint64_t g = 0;
  /// Exact bound when representable, std::nullopt on overflow.
  std::optional<std::uint64_t> bound;
  double log2_g = 0.0;
  double log2_bound = 0.0;
};

/// Exact binomial with overflow detection (throws std::overflow_error).
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);
GnD g_nd(std::size_t n, std::size_t d);

/// Dense-storage guard for tau_family: (d^2)^n * g must not exceed this.
inline constexpr std::size_t kTauSizeGuard = 200000;

struct TauFamily {
  std::size_t n = 0;
  std::size_t d = 0;
  std::uint64_t g = 0;
  /// tau on H^{(x) n}
  Operator tau_reduced;
  /// P_Sym / g on (H (x) K)^{(x) n}, interleaved layout.
  Operator tau_full;
  /// |Psi> = g^{-1/2} sum_k |e_k> (x) |k>_N, dims [d, d, ..., d, g].
  Operator purification_ket;
  SymSpace sym;

  /// The rank-1 state |Psi><Psi|.
  Operator tau_purification() const { return purification_ket.projector(); }
};

/// Throws DimensionError when the size guard is exceeded (unless
/// size_guard is raised by the caller).
TauFamily tau_family(std::size_t n, std::size_t d, std::size_t size_guard = kTauSizeGuard);

/// Empirical mean of sigma^{(x) n} over Hilbert-Schmidt samples sigma.
Operator tau_monte_carlo(std::size_t n, std::size_t d, std::size_t samples, Rng& rng);

/// Measurement operator 0 <= M <= I on N such that
///   g * (id (x) T_M)(|Psi><Psi|) = rho,   T_M(sigma) = tr(sigma M).
/// With the canonical purification M is the transpose of rho in the Sym basis.
/// rho must be a density operator on (H (x) K)^{(x) n} (interleaved) with
/// tr(rho P_Sym) >= 1 - 1e-9.
Operator postselect_measurement(const Operator& rho, const TauFamily& tau);

/// (id (x) T_M)(x) = Tr_N[x (1 (x) M)] for N the last factor of x.
Operator apply_functional_on_last(const Operator& x, const Operator& m);

/// Canonical purification (sqrt(rho) (x) 1)|Phi>, |Phi> = sum_i |i>_{H^n}|i>_{K^n},
/// returned as a ket in interleaved layout. rho must be invariant under the
/// adjacent transpositions within 1e-9 Frobenius.
Operator purify_to_sym_ket(const Operator& rho, std::size_t n, std::size_t d);
Operator purify_to_sym(const Operator& rho, std::size_t n, std::size_t d);

/// Worst Frobenius deviation ||P rho P^dag - rho|| over adjacent
/// transpositions of the first n factors (dimension d each).
double permutation_defect(const Operator& rho, std::size_t n, std::size_t d);

/// (1/n!) sum_pi (pi (x) id)(rho) (x) |pi><pi| for rho on H^{(x) n} (x) R'.
/// The first n factors of rho.dims() must all equal d. The n!-dimensional
/// register is appended as the last factor. Requires n <= 5.
Operator symmetrize_state(const Operator& rho, std::size_t n, std::size_t d);

/// Factor orders between [H_0, K_0, ..., H_{n-1}, K_{n-1}] and
/// [H_0, ..., H_{n-1}, K_0, ..., K_{n-1}] (plus trailing factors kept in
/// place), in the reorder_factors convention.
std::vector<std::size_t> interleaved_to_block(std::size_t n, std::size_t trailing = 0);
std::vector<std::size_t> block_to_interleaved(std::size_t n, std::size_t trailing = 0);

}  // namespace postsel
