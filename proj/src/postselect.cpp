#include "postsel/postselect.hpp"

#include <algorithm>

namespace postsel {

namespace {

Channel kpi_for(const HPMap& delta, std::size_t n, CovarianceKind kind, const Permutation& pi,
                const KpiFamily& family) {
  switch (kind) {
    case CovarianceKind::kStrict:
      return identity_channel(delta.dout);
    case CovarianceKind::kTranscript: {
      const std::size_t reg = factorial(n);
      if (delta.dout % reg != 0) {
        throw DimensionError("transcript covariance: dout is not a multiple of n!");
      }
      return transcript_relabeling(delta.dout / reg, n, permutation_index(pi));
    }
    case CovarianceKind::kCustom:
      if (!family) throw DimensionError("custom covariance requires a K_pi family");
      return family(pi);
  }
  throw DimensionError("unknown covariance kind");
}

}  // namespace

std::string to_string(CovarianceKind kind) {
  switch (kind) {
    case CovarianceKind::kStrict:
      return "strict";
    case CovarianceKind::kTranscript:
      return "transcript";
    case CovarianceKind::kCustom:
      return "custom";
  }
  return "unknown";
}

CovarianceKind covariance_kind_from_string(const std::string& s) {
  if (s == "strict") return CovarianceKind::kStrict;
  if (s == "transcript") return CovarianceKind::kTranscript;
  if (s == "custom") return CovarianceKind::kCustom;
  throw std::invalid_argument("unknown covariance kind '" + s + "'");
}

double covariance_deviation(const HPMap& delta, std::size_t n, std::size_t d,
                            const Permutation& pi, const Channel& kpi) {
  if (kpi.din != delta.dout || kpi.dout != delta.dout) {
    throw DimensionError("K_pi must act on the output space of Delta");
  }
  const Matrix lhs =
      precompose_unitary_choi(delta.choi, delta.din, delta.dout, perm_operator(n, d, pi).matrix());
  const HPMap rhs = compose(kpi, delta);
  return (lhs - rhs.choi.matrix()).norm();
}

CovariantMap check_covariance(const HPMap& delta, std::size_t n, std::size_t d,
                              CovarianceKind kind, const KpiFamily& kpi) {
  if (copies_for(delta.din, d) != n) {
    throw DimensionError("check_covariance: din is not d^n");
  }
  CovariantMap cm{delta, n, d, kind, 0.0};
  std::size_t worst = 0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Permutation pi = adjacent_transposition(n, k);
    const double dev = covariance_deviation(delta, n, d, pi, kpi_for(delta, n, kind, pi, kpi));
    if (dev > cm.max_deviation) {
      cm.max_deviation = dev;
      worst = k;
    }
  }
  if (cm.max_deviation > kCovarianceTol) {
    throw CovarianceError("covariance violated for transposition (" + std::to_string(worst) +
                              " " + std::to_string(worst + 1) + "): deviation " +
                              std::to_string(cm.max_deviation),
                          worst, cm.max_deviation);
  }
  return cm;
}

double tau_output_trace_norm(const HPMap& delta, const TauFamily& tau) {
  std::size_t din = 1;
  for (std::size_t k = 0; k < tau.n; ++k) din *= tau.d;
  if (delta.din != din) throw DimensionError("tau_output_trace_norm: din is not d^n");
  // [H_0, K_0, ..., N] -> [H_0..H_{n-1}, K_0..K_{n-1}, N]: input first, reference after.
  const Operator ket = reorder_factors(tau.purification_ket, interleaved_to_block(tau.n, 1));
  return output_trace_norm_pure(delta, ket);
}

double theorem1_rhs(const CovariantMap& cm, std::size_t size_guard) {
  const TauFamily tau = tau_family(cm.n, cm.d, size_guard);
  return static_cast<double>(tau.g) * tau_output_trace_norm(cm.delta, tau);
}

PostSelectionReport theorem1_check(const CovariantMap& cm, const DiamondOptions& options,
                                   Rng& rng, std::size_t size_guard) {
  const TauFamily tau = tau_family(cm.n, cm.d, size_guard);
  PostSelectionReport report;
  report.n = cm.n;
  report.d = cm.d;
  report.g = tau.g;
  report.tau_trace_norm = tau_output_trace_norm(cm.delta, tau);
  report.rhs = static_cast<double>(tau.g) * report.tau_trace_norm;
  report.lhs = diamond_norm(cm.delta, options, rng);
  report.slack = report.rhs - report.lhs.value;
  report.holds = report.lhs.upper <= report.rhs + kSlackTol;
  return report;
}

std::size_t batch_output_dim(std::size_t n, std::size_t d) {
  return n >= 2 ? d * d : d;
}

HPMap random_twirled_difference(std::size_t n, std::size_t d, std::size_t dout, Rng& rng) {
  std::size_t din = 1;
  for (std::size_t k = 0; k < n; ++k) din *= d;
  // Full-rank Tr_out needs rank * dout >= din.
  const std::size_t min_rank = (din + dout - 1) / dout;
  const auto rank = [&] { return min_rank + static_cast<std::size_t>(rng.uniform() * 4.0) % 4; };
  const std::size_t re = rank();
  const Channel e = random_channel(din, dout, re, rng);
  const std::size_t rf = rank();
  const Channel f = random_channel(din, dout, rf, rng);
  return subtract(twirl_permutation(e, n, d), twirl_permutation(f, n, d));
}

std::vector<BatchRow> certify_batch(std::size_t n, std::size_t d, std::size_t count,
                                    std::uint64_t seed, const DiamondOptions& options) {
  const Rng root(seed);
  const std::size_t dout = batch_output_dim(n, d);
  std::vector<BatchRow> rows;
  rows.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = root.split(i);
    const HPMap delta = random_twirled_difference(n, d, dout, rng);
    const CovariantMap cm = check_covariance(delta, n, d, CovarianceKind::kStrict);
    const PostSelectionReport rep = theorem1_check(cm, options, rng);
    rows.push_back({seed, i, n, d, rep.lhs.value, rep.lhs.lower, rep.rhs, rep.slack, rep.holds,
                    rep.lhs.converged});
  }
  return rows;
}

}  // namespace postsel
