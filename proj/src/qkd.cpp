#include "postsel/qkd.hpp"

#include <cmath>
#include <stdexcept>

#include <unsupported/Eigen/KroneckerProduct>

namespace postsel {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void check_nd(std::uint64_t n, std::uint64_t d) {
  if (n < 1) throw std::invalid_argument("n must be at least 1");
  if (d < 2) throw std::invalid_argument("d must be at least 2");
}

long double log2_factor(std::uint64_t n, std::uint64_t d) {
  return static_cast<long double>(d * d - 1) * std::log2(static_cast<long double>(n) + 1.0L);
}

std::size_t pow_size(std::size_t base, std::size_t e) {
  std::size_t r = 1;
  for (std::size_t k = 0; k < e; ++k) r *= base;
  return r;
}

// Sum of per-outcome trace norms; no check of the classical-output structure.
double block_output_norm(const HPMap& m, const Matrix& psi) {
  double total = 0.0;
  const auto din = idx(m.din);
  for (std::size_t c = 0; c < m.dout; ++c) {
    const auto off = idx(c * m.din);
    const Matrix jcc = m.choi.matrix().block(off, off, din, din);
    const Matrix x = psi.transpose() * jcc * psi.conjugate();
    total += trace_norm(Matrix(0.5 * (x + x.adjoint())));
  }
  return total;
}

Matrix ket_matrix(const Operator& ket, std::size_t din) {
  const std::size_t dref = static_cast<std::size_t>(ket.rows()) / din;
  Matrix psi(idx(din), idx(dref));
  for (std::size_t i = 0; i < din; ++i) {
    for (std::size_t r = 0; r < dref; ++r) psi(idx(i), idx(r)) = ket(i * dref + r, 0);
  }
  return psi;
}

void require_classical_output(const HPMap& m) {
  const Matrix& j = m.choi.matrix();
  for (std::size_t a = 0; a < m.dout; ++a) {
    for (std::size_t b = 0; b < m.dout; ++b) {
      if (a == b) continue;
      const double off =
          j.block(idx(a * m.din), idx(b * m.din), idx(m.din), idx(m.din)).cwiseAbs().maxCoeff();
      if (off > 1e-12) throw DimensionError("map output is not classical");
    }
  }
}

Operator product_input(const Operator& sigma, std::size_t n) {
  Operator ket = sigma;
  for (std::size_t k = 1; k < n; ++k) ket = kron(ket, sigma);
  return reorder_factors(ket, interleaved_to_block(n));
}

Operator normalized(Matrix v, std::size_t d) {
  v /= v.norm();
  return Operator(std::move(v), Dims{d, d});
}

}  // namespace

SecurityParams eps_reduction(std::optional<double> eps, std::optional<double> eps_bar,
                             std::size_t n, std::size_t d) {
  check_nd(n, d);
  if (eps.has_value() == eps_bar.has_value()) {
    throw std::invalid_argument("give exactly one of eps and eps_bar");
  }
  const double given = eps ? *eps : *eps_bar;
  if (!(given > 0.0 && given <= 2.0)) {
    throw std::invalid_argument("security parameter must lie in (0, 2]");
  }
  const long double lf = log2_factor(n, d);
  const long double factor =
      std::pow(static_cast<long double>(n) + 1.0L, static_cast<long double>(d * d - 1));
  SecurityParams p;
  p.n = n;
  p.d = d;
  if (eps) {
    p.eps = *eps;
    p.eps_bar = static_cast<double>(static_cast<long double>(*eps) / factor);
    p.log2_eps = std::log2(*eps);
    p.log2_eps_bar = static_cast<double>(std::log2(static_cast<long double>(*eps)) - lf);
  } else {
    p.eps_bar = *eps_bar;
    p.eps = static_cast<double>(static_cast<long double>(*eps_bar) * factor);
    p.log2_eps_bar = std::log2(*eps_bar);
    p.log2_eps = static_cast<double>(std::log2(static_cast<long double>(*eps_bar)) + lf);
  }
  p.vacuous = p.log2_eps > 0.0;
  p.key_penalty_bits = static_cast<double>(2.0L * lf);
  return p;
}

KeyPenalty key_penalty(std::uint64_t n, std::uint64_t d) {
  check_nd(n, d);
  const std::uint64_t k = d * d - 1;
  long double exact = 0.0L;
  for (std::uint64_t i = 1; i <= k; ++i) {
    exact += std::log2((static_cast<long double>(n) + static_cast<long double>(i)) /
                       static_cast<long double>(i));
  }
  KeyPenalty kp;
  kp.exact_bits = static_cast<double>(2.0L * exact);
  kp.bound_bits = static_cast<double>(2.0L * log2_factor(n, d));
  if (kp.exact_bits > kp.bound_bits) {
    throw std::logic_error("key penalty exceeds its bound");
  }
  return kp;
}

long double general_exponent(double c, double delta, long double n, std::uint64_t d) {
  const long double cd = static_cast<long double>(c) * delta * delta;
  return -cd * n + static_cast<long double>(d * d - 1) * std::log2(n + 1.0L);
}

GeneralBound general_bound(double c, double delta, std::uint64_t n, std::uint64_t d) {
  check_nd(n, d);
  if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  GeneralBound gb;
  const long double e = general_exponent(c, delta, static_cast<long double>(n), d);
  gb.exponent = static_cast<double>(e);
  gb.vacuous = e > 0.0L;
  gb.bound = gb.vacuous ? 1.0 : static_cast<double>(std::exp2(e));
  return gb;
}

std::optional<std::uint64_t> crossover_n(double c, double delta, std::uint64_t d, double target) {
  general_bound(c, delta, 1, d);  // argument checks
  if (!(target > 0.0)) throw std::invalid_argument("target must be positive");
  const long double t = std::log2(static_cast<long double>(target));
  // The exponent is concave in n, so beyond the first n where the bound is
  // above target, the set where it is below target is a half-line.
  const auto ok = [&](std::uint64_t n) {
    return general_exponent(c, delta, static_cast<long double>(n), d) <= t;
  };
  if (ok(1)) return 1;
  std::uint64_t lo = 1, hi = 2;
  while (!ok(hi)) {
    if (hi == kCrossoverCap) return std::nullopt;
    lo = hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  return hi;
}

// -- toy protocol -----------------------------------------------------------

std::size_t toy_output_index(const ToyProtocol& tp, std::size_t flag, std::size_t key_a,
                             std::size_t key_b) {
  const std::size_t keys = std::size_t{1} << tp.key_bits;
  return (flag * keys + key_a) * keys + key_b;
}

ToyProtocol build_toy_protocol(std::size_t n) {
  if (n < 1 || n > kToyMaxSignals) {
    throw DimensionError("toy protocol supports n = 1 or 2 signals");
  }
  ToyProtocol tp;
  tp.n = n;
  tp.key_bits = n;
  const std::size_t keys = std::size_t{1} << n;
  tp.output_dims = {2, keys, keys};
  const std::size_t din = pow_size(tp.signal_dim, n);
  const std::size_t dout = 2 * keys * keys;

  Matrix je = Matrix::Zero(idx(din * dout), idx(din * dout));
  for (std::size_t i = 0; i < din; ++i) {
    std::size_t xa = 0, xb = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t digit = (i / pow_size(4, n - 1 - k)) % 4;
      xa = 2 * xa + digit / 2;
      xb = 2 * xb + digit % 2;
    }
    const std::size_t out =
        xa == xb ? toy_output_index(tp, 1, xa, xb) : toy_output_index(tp, 0, 0, 0);
    je(idx(out * din + i), idx(out * din + i)) = 1.0;
  }
  tp.e = Channel::from_choi(din, dout, std::move(je));

  Matrix js = Matrix::Zero(idx(dout * dout), idx(dout * dout));
  for (std::size_t c = 0; c < dout; ++c) {
    const std::size_t flag = c / (keys * keys);
    if (flag == 1) {
      for (std::size_t k = 0; k < keys; ++k) {
        const std::size_t o = toy_output_index(tp, 1, k, k);
        js(idx(o * dout + c), idx(o * dout + c)) = 1.0 / static_cast<double>(keys);
      }
    } else {
      js(idx(c * dout + c), idx(c * dout + c)) = 1.0;
    }
  }
  tp.s = Channel::from_choi(dout, dout, std::move(js));
  tp.f = compose(tp.s, tp.e);
  return tp;
}

Channel toy_kpi(const ToyProtocol& tp, const Permutation& pi) {
  const Matrix p = perm_operator(tp.key_bits, 2, pi).matrix();
  Matrix u = Eigen::kroneckerProduct(Matrix::Identity(2, 2), Eigen::kroneckerProduct(p, p).eval());
  return unitary_channel(u);
}

HPMap toy_difference(const ToyProtocol& tp) { return subtract(tp.e, tp.f); }

double classical_output_trace_norm(const HPMap& m, const Operator& ket) {
  if (ket.cols() != 1 || static_cast<std::size_t>(ket.rows()) % m.din != 0) {
    throw DimensionError("classical_output_trace_norm: ket dimension not a multiple of din");
  }
  require_classical_output(m);
  return block_output_norm(m, ket_matrix(ket, m.din));
}

std::string to_string(ToyMode mode) {
  return mode == ToyMode::kCollective ? "collective" : "postselection";
}

ToyMode toy_mode_from_string(const std::string& s) {
  if (s == "collective") return ToyMode::kCollective;
  if (s == "postselection") return ToyMode::kPostselection;
  throw std::invalid_argument("unknown toy mode '" + s + "'");
}

ToyReport toy_security_eval(const ToyProtocol& tp, ToyMode mode, const ToyEvalOptions& options,
                            Rng& rng) {
  if (mode == ToyMode::kPostselection && tp.n != 1) {
    throw DimensionError("post-selection mode is limited to n = 1 (size guard)");
  }
  const HPMap delta = toy_difference(tp);
  require_classical_output(delta);
  const std::size_t d = tp.signal_dim;

  ToyReport r;
  r.n = tp.n;
  r.d = d;
  r.mode = mode;

  if (tp.n == 1) {
    const DiamondResult dr = diamond_norm(delta, options.diamond, rng);
    r.collective = dr.value;
    r.collective_lower = dr.lower;
    r.collective_certified = dr.converged;
    r.collective_witness = dr.witness;
  } else {
    const auto value = [&](const Operator& sigma) {
      const Operator in = product_input(sigma, tp.n);
      return block_output_norm(delta, ket_matrix(in, delta.din));
    };
    // One start from the single-signal optimum, the rest Haar random.
    const ToyProtocol single = build_toy_protocol(1);
    Rng seed_rng = rng.split(0);
    const SeesawTrace st =
        seesaw(toy_difference(single), sample_haar_ket(d * d, seed_rng).with_dims({d, d}),
               options.diamond.seesaw_iterations, options.diamond.seesaw_improvement);
    double best = -1.0;
    Operator best_sigma;
    for (std::size_t rs = 0; rs <= options.product_restarts; ++rs) {
      Rng local = rng.split(rs + 1);
      Operator sigma = rs == 0 ? st.best_ket.with_dims({d, d})
                               : sample_haar_ket(d * d, local).with_dims({d, d});
      double v = value(sigma);
      double step = 0.3;
      for (std::size_t it = 0; it < options.product_steps && step > 1e-6; ++it) {
        Matrix trial = sigma.matrix();
        for (Eigen::Index k = 0; k < trial.rows(); ++k) {
          trial(k, 0) += step * cplx(local.normal(), local.normal());
        }
        Operator cand = normalized(std::move(trial), d);
        const double cv = value(cand);
        if (cv > v) {
          v = cv;
          sigma = std::move(cand);
        } else {
          step *= 0.95;
        }
      }
      if (v > best) {
        best = v;
        best_sigma = sigma;
      }
    }
    r.collective = best;
    r.collective_lower = best;
    r.collective_certified = false;
    r.collective_witness = product_input(best_sigma, tp.n);
  }

  const TauFamily tau = tau_family(tp.n, d);
  const Operator mix = reorder_factors(tau.tau_full, interleaved_to_block(tp.n));
  r.mixture_value = output_trace_norm(delta, mix);
  r.mixture_le_max = r.mixture_value <= r.collective + kMixtureTol;

  if (mode == ToyMode::kPostselection) {
    r.g = tau.g;
    r.tau_value = tau_output_trace_norm(delta, tau);
    r.rhs = static_cast<double>(tau.g) * r.tau_value;
    const long double lf = log2_factor(tp.n, d);
    if (r.tau_value > 0.0) {
      r.implied_log2_eps = static_cast<double>(std::log2(static_cast<long double>(r.tau_value)) + lf);
      r.implied_eps = static_cast<double>(r.tau_value * std::exp2(lf));
    } else {
      r.implied_log2_eps = -HUGE_VAL;
      r.implied_eps = 0.0;
    }
  }
  r.insecure = r.collective > options.diamond.tol;
  return r;
}

}  // namespace postsel
