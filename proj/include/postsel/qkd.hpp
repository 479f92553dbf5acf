#pragma once

// Security-parameter arithmetic for the collective-to-general reduction, and
// a desk-scale toy key distribution protocol run through the channel formalism.

#include <cstdint>
#include <optional>
#include <string>

#include "postsel/diamond.hpp"
#include "postsel/permutation.hpp"
#include "postsel/postselect.hpp"

namespace postsel {

struct SecurityParams {
  std::size_t n = 0;
  std::size_t d = 0;
  double eps = 0.0;
  double eps_bar = 0.0;
  /// Exact log2 values; finite even when eps or eps_bar leave the double range.
  double log2_eps = 0.0;
  double log2_eps_bar = 0.0;
  /// eps > 1: the general-attack statement says nothing.
  bool vacuous = false;
  std::optional<double> delta;
  std::optional<double> c;
  double key_penalty_bits = 0.0;
};

/// Fills the missing one of (eps, eps_bar) from eps_bar = eps (n+1)^{-(d^2-1)}.
/// Exactly one of the two must be given, in (0, 2]; n >= 1, d >= 2.
SecurityParams eps_reduction(std::optional<double> eps, std::optional<double> eps_bar,
                             std::size_t n, std::size_t d);

struct KeyPenalty {
  double exact_bits = 0.0;  // 2 log2 g_{n,d}
  double bound_bits = 0.0;  // 2 (d^2-1) log2(n+1)
};

KeyPenalty key_penalty(std::uint64_t n, std::uint64_t d);

struct GeneralBound {
  double exponent = 0.0;  // -c delta^2 n + (d^2-1) log2(n+1)
  double bound = 0.0;     // min(1, 2^exponent)
  bool vacuous = false;   // exponent > 0, bound clamped to 1
};

/// Exponent as a long double, for callers that need the raw value.
long double general_exponent(double c, double delta, long double n, std::uint64_t d);

GeneralBound general_bound(double c, double delta, std::uint64_t n, std::uint64_t d);

inline constexpr std::uint64_t kCrossoverCap = std::uint64_t{1} << 63;

/// Smallest n >= 1 with general bound <= target, or nullopt when no n up to
/// 2^63 reaches the target.
std::optional<std::uint64_t> crossover_n(double c, double delta, std::uint64_t d, double target);

// -- toy protocol -----------------------------------------------------------

/// Each signal is a qubit pair (A, B), measured in the computational basis on
/// both sides. The public flag announces whether the two n-bit strings agree;
/// on agreement they become the keys (S_A, S_B), otherwise both keys are zero.
/// Output registers: flag (2) (x) S_A (2^n) (x) S_B (2^n), all classical.
struct ToyProtocol {
  std::size_t n = 0;
  std::size_t signal_dim = 4;
  std::size_t key_bits = 0;
  Dims output_dims;
  Channel e;
  /// Ideal key replacement on the output registers.
  Channel s;
  /// s o e.
  Channel f;
};

inline constexpr std::size_t kToyMaxSignals = 2;

ToyProtocol build_toy_protocol(std::size_t n);

/// Output index of (flag, key_a, key_b).
std::size_t toy_output_index(const ToyProtocol& tp, std::size_t flag, std::size_t key_a,
                             std::size_t key_b);

/// K_pi for the toy: permutes the bits of both keys like pi permutes signals.
Channel toy_kpi(const ToyProtocol& tp, const Permutation& pi);

HPMap toy_difference(const ToyProtocol& tp);

/// ||(m (x) id)(|psi><psi|)|| for a map whose Choi has no coherences between
/// distinct output basis states; sum of per-outcome trace norms.
double classical_output_trace_norm(const HPMap& m, const Operator& ket);

enum class ToyMode { kCollective, kPostselection };

std::string to_string(ToyMode mode);
ToyMode toy_mode_from_string(const std::string& s);

struct ToyEvalOptions {
  DiamondOptions diamond;
  std::size_t product_restarts = 8;
  std::size_t product_steps = 400;
};

struct ToyReport {
  std::size_t n = 0;
  std::size_t d = 4;
  ToyMode mode = ToyMode::kCollective;
  /// Maximum over pure sigma on H (x) K of ||((E-F) (x) id)(sigma^{(x) n})||_1.
  /// n = 1: the certified diamond norm (reference of input size suffices).
  /// n = 2: best value of a restarted local search (a lower estimate).
  double collective = 0.0;
  double collective_lower = 0.0;
  bool collective_certified = false;
  Operator collective_witness;
  /// ||((E-F) (x) id_{K^n})(tau_{H^n K^n})||_1 for the de Finetti mixture.
  double mixture_value = 0.0;
  /// mixture_value <= collective + 1e-9.
  bool mixture_le_max = false;
  // Post-selection mode only.
  std::uint64_t g = 0;
  double tau_value = 0.0;  // purified tau
  double rhs = 0.0;        // g * tau_value
  double implied_eps = 0.0;
  double implied_log2_eps = 0.0;
  /// E differs from its ideal version on some input.
  bool insecure = false;
};

inline constexpr double kMixtureTol = 1e-9;

ToyReport toy_security_eval(const ToyProtocol& tp, ToyMode mode, const ToyEvalOptions& options,
                            Rng& rng);

}  // namespace postsel
