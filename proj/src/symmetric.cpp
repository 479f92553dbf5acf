#include "postsel/symmetric.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace postsel {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

// All occupation tuples of length D summing to n, ascending lexicographic.
void enumerate_occupations(std::size_t n, std::size_t slots, std::vector<std::size_t>& cur,
                           std::vector<std::vector<std::size_t>>& out) {
  if (cur.size() + 1 == slots) {
    cur.push_back(n);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (std::size_t m = 0; m <= n; ++m) {
    cur.push_back(m);
    enumerate_occupations(n - m, slots, cur, out);
    cur.pop_back();
  }
}

// Permutation acting on the first n factors only, as a reorder_factors argument.
std::vector<std::size_t> lifted_reorder(const Permutation& pi, std::size_t total_factors) {
  std::vector<std::size_t> perm(total_factors);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  const Permutation inv = inverse(pi);
  for (std::size_t k = 0; k < pi.size(); ++k) perm[k] = inv[k];
  return perm;
}

}  // namespace

Operator SymSpace::projector() const {
  return {basis.matrix() * basis.matrix().adjoint(), basis.dims()};
}

SymSpace sym_space(std::size_t n, std::size_t local_dim) {
  if (n == 0 || local_dim == 0) throw DimensionError("sym_space: n and D must be positive");
  SymSpace s;
  s.n = n;
  s.local_dim = local_dim;
  std::vector<std::size_t> cur;
  enumerate_occupations(n, local_dim, cur, s.occupations);
  s.dim = s.occupations.size();

  std::map<std::vector<std::size_t>, std::size_t> lookup;
  for (std::size_t k = 0; k < s.dim; ++k) lookup.emplace(s.occupations[k], k);

  std::size_t total = 1;
  for (std::size_t i = 0; i < n; ++i) total *= local_dim;
  Matrix b = Matrix::Zero(idx(total), idx(s.dim));
  std::vector<std::size_t> digits(n, 0);
  std::vector<std::size_t> occ(local_dim);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::fill(occ.begin(), occ.end(), 0);
    for (auto dgt : digits) ++occ[dgt];
    b(idx(flat), idx(lookup.at(occ))) = 1.0;
    for (std::size_t f = n; f-- > 0;) {
      if (++digits[f] < local_dim) break;
      digits[f] = 0;
    }
  }
  for (Eigen::Index k = 0; k < b.cols(); ++k) b.col(k).normalize();
  s.basis = Operator(std::move(b), Dims(n, local_dim));
  return s;
}

Operator sym_projector_by_averaging(std::size_t n, std::size_t local_dim) {
  const auto perms = all_permutations(n);
  Operator acc = perm_operator(n, local_dim, perms.front());
  for (std::size_t p = 1; p < perms.size(); ++p) acc += perm_operator(n, local_dim, perms[p]);
  acc *= 1.0 / static_cast<double>(perms.size());
  return acc;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 acc = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // acc * (n - k + i) / i stays integral at every step
    acc = acc * (n - k + i) / i;
    if (acc > std::numeric_limits<std::uint64_t>::max()) {
      throw std::overflow_error("binomial coefficient exceeds 64 bits");
    }
  }
  return static_cast<std::uint64_t>(acc);
}

GnD g_nd(std::size_t n, std::size_t d) {
  if (n == 0 || d == 0) throw DimensionError("g_nd: n and d must be positive");
  const std::uint64_t k = static_cast<std::uint64_t>(d) * d - 1;
  GnD out;
  out.g = binomial(n + k, n);
  out.log2_bound = static_cast<double>(k) * std::log2(static_cast<double>(n) + 1.0);
  out.log2_g = std::log2(static_cast<double>(out.g));
  unsigned __int128 bound = 1;
  bool overflow = false;
  for (std::uint64_t i = 0; i < k && !overflow; ++i) {
    bound *= (n + 1);
    overflow = bound > std::numeric_limits<std::uint64_t>::max();
  }
  if (!overflow) {
    out.bound = static_cast<std::uint64_t>(bound);
    if (out.g > *out.bound) throw std::logic_error("g_nd exceeds its polynomial bound");
  }
  return out;
}

TauFamily tau_family(std::size_t n, std::size_t d, std::size_t size_guard) {
  if (n == 0 || d == 0) throw DimensionError("tau_family: n and d must be positive");
  const auto gnd = g_nd(n, d);
  std::size_t full_dim = 1;
  for (std::size_t i = 0; i < n; ++i) full_dim *= d * d;
  if (static_cast<double>(full_dim) * static_cast<double>(gnd.g) > static_cast<double>(size_guard)) {
    throw DimensionError("tau_family: (d^2)^n * g = " +
                         std::to_string(full_dim * gnd.g) + " exceeds the size guard " +
                         std::to_string(size_guard));
  }
  TauFamily t;
  t.n = n;
  t.d = d;
  t.g = gnd.g;
  t.sym = sym_space(n, d * d);
  if (t.sym.dim != t.g) throw std::logic_error("Sym^n(H (x) K) dimension differs from g_nd");

  const Dims interleaved(2 * n, d);
  const Matrix& b = t.sym.basis.matrix();
  t.tau_full = Operator(b * b.adjoint() / static_cast<double>(t.g), interleaved);

  std::vector<std::size_t> h_factors;
  for (std::size_t k = 0; k < n; ++k) h_factors.push_back(2 * k);
  t.tau_reduced = partial_trace(t.tau_full, h_factors);

  Matrix psi(idx(full_dim * t.g), 1);
  const double norm = 1.0 / std::sqrt(static_cast<double>(t.g));
  for (std::size_t x = 0; x < full_dim; ++x) {
    for (std::size_t k = 0; k < t.g; ++k) psi(idx(x * t.g + k), 0) = norm * b(idx(x), idx(k));
  }
  Dims pdims = interleaved;
  pdims.push_back(t.g);
  t.purification_ket = Operator(std::move(psi), std::move(pdims));
  return t;
}

Operator tau_monte_carlo(std::size_t n, std::size_t d, std::size_t samples, Rng& rng) {
  if (samples == 0) throw DimensionError("tau_monte_carlo: samples must be positive");
  Operator acc = Operator::zero(Dims(n, d));
  for (std::size_t s = 0; s < samples; ++s) {
    const Operator sigma = sample_hs_density(d, rng);
    acc += kron_power(sigma, n);
  }
  acc *= 1.0 / static_cast<double>(samples);
  return acc;
}

Operator postselect_measurement(const Operator& rho, const TauFamily& tau) {
  const Matrix& b = tau.sym.basis.matrix();
  if (rho.rows() != static_cast<std::size_t>(b.rows()) || !rho.is_square()) {
    throw DimensionError("postselect_measurement: rho must live on (H (x) K)^n");
  }
  if (!rho.is_density(kPsdTol)) {
    throw NumericalError("postselect_measurement: input is not a density operator");
  }
  const double support = (b.adjoint() * rho.matrix() * b).trace().real();
  if (support < 1.0 - 1e-9) {
    throw NumericalError("postselect_measurement: support outside Sym^n(H (x) K), weight " +
                         std::to_string(support));
  }
  Matrix r = b.adjoint() * rho.matrix() * b;
  r = 0.5 * (r + r.adjoint()).eval();
  return Operator(r.transpose());
}

Operator apply_functional_on_last(const Operator& x, const Operator& m) {
  const std::size_t g = m.rows();
  if (!x.is_square() || x.dims().empty() || x.dims().back() != g) {
    throw DimensionError("apply_functional_on_last: last factor does not match M");
  }
  const std::size_t rest = x.rows() / g;
  Matrix out = Matrix::Zero(idx(rest), idx(rest));
  for (std::size_t k = 0; k < g; ++k) {
    for (std::size_t l = 0; l < g; ++l) {
      const cplx w = m(l, k);
      if (w == cplx(0.0)) continue;
      for (std::size_t j = 0; j < rest; ++j) {
        for (std::size_t i = 0; i < rest; ++i) {
          out(idx(i), idx(j)) += w * x(i * g + k, j * g + l);
        }
      }
    }
  }
  Dims dims(x.dims().begin(), x.dims().end() - 1);
  if (dims.empty()) dims = {1};
  return {std::move(out), std::move(dims)};
}

double permutation_defect(const Operator& rho, std::size_t n, std::size_t d) {
  if (rho.dims().size() < n) throw DimensionError("permutation_defect: too few factors");
  for (std::size_t k = 0; k < n; ++k) {
    if (rho.dims()[k] != d) throw DimensionError("permutation_defect: factor dimension mismatch");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const auto perm = lifted_reorder(adjacent_transposition(n, k), rho.dims().size());
    worst = std::max(worst, frobenius_distance(reorder_factors(rho, perm), rho));
  }
  return worst;
}

Operator purify_to_sym_ket(const Operator& rho, std::size_t n, std::size_t d) {
  const Operator shaped = rho.with_dims(Dims(n, d));
  const double defect = permutation_defect(shaped, n, d);
  if (defect > 1e-9) {
    throw NumericalError("purify_to_sym: input not permutation invariant (defect " +
                         std::to_string(defect) + ")");
  }
  const Matrix root = psd_sqrt(shaped.matrix());
  const std::size_t dim = rho.rows();
  Matrix psi(idx(dim * dim), 1);
  // (sqrt(rho) (x) 1) sum_i |i>|i>  has amplitude sqrt(rho)[j, i] on |j>|i>
  for (std::size_t j = 0; j < dim; ++j) {
    for (std::size_t i = 0; i < dim; ++i) psi(idx(j * dim + i), 0) = root(idx(j), idx(i));
  }
  const Operator block(std::move(psi), Dims(2 * n, d));
  return reorder_factors(block, block_to_interleaved(n));
}

Operator purify_to_sym(const Operator& rho, std::size_t n, std::size_t d) {
  return purify_to_sym_ket(rho, n, d).projector();
}

Operator symmetrize_state(const Operator& rho, std::size_t n, std::size_t d) {
  if (n == 0 || n > 5) throw DimensionError("symmetrize_state: n must be in [1, 5]");
  if (rho.dims().size() < n) throw DimensionError("symmetrize_state: too few factors");
  for (std::size_t k = 0; k < n; ++k) {
    if (rho.dims()[k] != d) throw DimensionError("symmetrize_state: factor dimension mismatch");
  }
  const auto perms = all_permutations(n);
  const Dims reg_dims{perms.size()};
  Dims out_dims = rho.dims();
  out_dims.push_back(perms.size());
  Operator acc = Operator::zero(out_dims);
  for (std::size_t p = 0; p < perms.size(); ++p) {
    const Operator moved = reorder_factors(rho, lifted_reorder(perms[p], rho.dims().size()));
    acc += kron(moved, Operator::basis_projector(reg_dims, p));
  }
  acc *= 1.0 / static_cast<double>(perms.size());
  return acc;
}

std::vector<std::size_t> interleaved_to_block(std::size_t n, std::size_t trailing) {
  std::vector<std::size_t> perm(2 * n + trailing);
  for (std::size_t k = 0; k < n; ++k) {
    perm[k] = 2 * k;
    perm[n + k] = 2 * k + 1;
  }
  for (std::size_t t = 0; t < trailing; ++t) perm[2 * n + t] = 2 * n + t;
  return perm;
}

std::vector<std::size_t> block_to_interleaved(std::size_t n, std::size_t trailing) {
  return inverse_permutation(interleaved_to_block(n, trailing));
}

}  // namespace postsel
