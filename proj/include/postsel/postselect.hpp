#pragma once

// Post-selection bound for permutation-covariant maps:
//
//   ||Delta||_diamond <= g_{n,d} ||(Delta (x) id)(tau_{H^n R})||_1
//
// whenever Delta o pi = K_pi o Delta for CPTP maps K_pi. The purification is
// the one from tau_family, with R = K^{(x) n} (x) N.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "postsel/diamond.hpp"
#include "postsel/permutation.hpp"
#include "postsel/symmetric.hpp"

namespace postsel {

enum class CovarianceKind { kStrict, kTranscript, kCustom };

std::string to_string(CovarianceKind kind);
CovarianceKind covariance_kind_from_string(const std::string& s);

/// Caller-supplied K_pi for the custom kind.
using KpiFamily = std::function<Channel(const Permutation&)>;

inline constexpr double kCovarianceTol = 1e-9;
inline constexpr double kSlackTol = 1e-7;

class CovarianceError : public NumericalError {
 public:
  CovarianceError(const std::string& what, std::size_t generator, double deviation)
      : NumericalError(what), generator_(generator), deviation_(deviation) {}
  std::size_t generator() const { return generator_; }
  double deviation() const { return deviation_; }

 private:
  std::size_t generator_;
  double deviation_;
};

struct CovariantMap {
  HPMap delta;
  std::size_t n = 1;
  std::size_t d = 1;
  CovarianceKind kind = CovarianceKind::kStrict;
  /// Largest Choi Frobenius deviation ||Delta o pi - K_pi o Delta|| over the
  /// adjacent transpositions.
  double max_deviation = 0.0;
};

/// Deviation of Delta o pi from K_pi o Delta (Choi Frobenius norm).
double covariance_deviation(const HPMap& delta, std::size_t n, std::size_t d,
                            const Permutation& pi, const Channel& kpi);

/// Verifies the covariance hypothesis on the adjacent transpositions. Throws
/// CovarianceError naming the worst generator when the deviation exceeds 1e-9.
CovariantMap check_covariance(const HPMap& delta, std::size_t n, std::size_t d,
                              CovarianceKind kind, const KpiFamily& kpi = {});

struct PostSelectionReport {
  std::size_t n = 0;
  std::size_t d = 0;
  std::uint64_t g = 0;
  DiamondResult lhs;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs.value
  bool holds = false;  // lhs.upper <= rhs + 1e-7
  double tau_trace_norm = 0.0;
};

/// ||(Delta (x) id)(tau_pur)||_1 for the canonical purification in tau.
double tau_output_trace_norm(const HPMap& delta, const TauFamily& tau);

double theorem1_rhs(const CovariantMap& cm, std::size_t size_guard = kTauSizeGuard);

PostSelectionReport theorem1_check(const CovariantMap& cm, const DiamondOptions& options,
                                   Rng& rng, std::size_t size_guard = kTauSizeGuard);

// -- batch certification ----------------------------------------------------

struct BatchRow {
  std::uint64_t seed = 0;
  std::size_t index = 0;
  std::size_t n = 0;
  std::size_t d = 0;
  double lhs = 0.0;
  double lhs_lower = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool holds = false;
  bool converged = false;
};

/// Output dimension used for random batch instances: d^min(n, 2).
std::size_t batch_output_dim(std::size_t n, std::size_t d);

/// Difference of two independently twirled random channels (C^d)^{(x) n} ->
/// C^{dout}, drawn from rng.
HPMap random_twirled_difference(std::size_t n, std::size_t d, std::size_t dout, Rng& rng);

/// Instance i uses Rng(seed).split(i) for both the map and the solver.
std::vector<BatchRow> certify_batch(std::size_t n, std::size_t d, std::size_t count,
                                    std::uint64_t seed, const DiamondOptions& options);

}  // namespace postsel
