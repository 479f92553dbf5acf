#include "doctest.h"
#include "helpers.hpp"
#include "postsel/symmetric.hpp"

#include <algorithm>

using namespace postsel;
using testing::max_abs;

namespace {

// Random state on H^{(x) n} that commutes with every permutation.
Operator random_invariant_state(std::size_t n, std::size_t d, Rng& rng) {
  Operator base(sample_hs_density(static_cast<std::size_t>(std::pow(d, n)), rng).matrix(), Dims(n, d));
  Operator acc = Operator::zero(Dims(n, d));
  const auto perms = all_permutations(n);
  for (const auto& pi : perms) {
    const Operator p = perm_operator(n, d, pi);
    acc += p * base * p.adjoint();
  }
  acc *= 1.0 / static_cast<double>(perms.size());
  return acc;
}

}  // namespace

TEST_CASE("permutation operators form a representation") {
  const auto perms = all_permutations(3);
  CHECK(perms.size() == 6);
  CHECK(perms.front() == Permutation{0, 1, 2});
  CHECK(perms.back() == Permutation{2, 1, 0});
  for (std::size_t i = 0; i < perms.size(); ++i) CHECK(permutation_index(perms[i]) == i);

  for (const auto& s : perms) {
    const Operator ps = perm_operator(3, 2, s);
    CHECK(max_abs(ps.matrix() * ps.matrix().adjoint() - Matrix::Identity(8, 8)) == 0.0);
    for (const auto& t : perms) {
      const Operator pst = perm_operator(3, 2, compose(s, t));
      const Operator prod = ps * perm_operator(3, 2, t);
      CHECK(max_abs(pst.matrix() - prod.matrix()) == 0.0);
    }
  }
  // The factor at position 0 moves to position 1 under (0 1).
  const Operator swap = perm_operator(2, 3, {1, 0});
  CHECK(max_abs(swap.matrix() - testing::swap_matrix(3)) == 0.0);
  CHECK(max_abs((perm_operator(3, 2, {1, 2, 0}) * Operator::ket({2, 2, 2}, 4)).matrix() -
                Operator::ket({2, 2, 2}, 2).matrix()) == 0.0);
}

TEST_CASE("symmetric subspace") {
  CHECK(sym_space(2, 2).dim == 3);
  CHECK(sym_space(2, 4).dim == 10);
  CHECK(sym_space(3, 2).dim == 4);
  CHECK(sym_space(1, 5).dim == 5);

  for (auto [n, dl] : {std::pair<std::size_t, std::size_t>{2, 2}, {2, 4}, {3, 2}, {3, 3}}) {
    const SymSpace s = sym_space(n, dl);
    const Matrix& b = s.basis.matrix();
    CHECK(max_abs(b.adjoint() * b - Matrix::Identity(b.cols(), b.cols())) < 1e-12);
    const Operator p = s.projector();
    CHECK(max_abs(p.matrix() - sym_projector_by_averaging(n, dl).matrix()) < 1e-12);
    CHECK(max_abs(p.matrix() * p.matrix() - p.matrix()) < 1e-12);
    CHECK(std::abs(p.trace().real() - static_cast<double>(s.dim)) < 1e-12);
  }
  CHECK_THROWS_AS(sym_space(0, 2), DimensionError);
}

TEST_CASE("g_nd") {
  const GnD a = g_nd(1, 2);
  CHECK(a.g == 4);
  CHECK(a.bound.value() == 8);
  const GnD b = g_nd(2, 2);
  CHECK(b.g == 10);
  CHECK(b.bound.value() == 27);
  const GnD c = g_nd(3, 2);
  CHECK(c.g == 20);
  CHECK(c.bound.value() == 64);
  CHECK(g_nd(1, 4).g == 16);

  for (std::size_t n = 1; n <= 40; ++n) {
    for (std::size_t d = 2; d <= 4; ++d) {
      const GnD x = g_nd(n, d);
      if (x.bound) CHECK(x.g <= *x.bound);
      CHECK(x.log2_g <= x.log2_bound + 1e-12);
    }
  }
  CHECK(binomial(10, 3) == 120);
  CHECK(binomial(5, 0) == 1);
  CHECK_THROWS_AS(binomial(200, 100), std::overflow_error);
  CHECK_FALSE(g_nd(3000000, 2).bound.has_value());
  CHECK_THROWS_AS(g_nd(100000, 4), std::overflow_error);
}

TEST_CASE("tau family for n = 1") {
  const TauFamily t = tau_family(1, 2);
  CHECK(t.g == 4);
  CHECK(max_abs(t.tau_full.matrix() - Matrix::Identity(4, 4) / 4.0) < 1e-14);
  CHECK(max_abs(t.tau_reduced.matrix() - Matrix::Identity(2, 2) / 2.0) < 1e-14);
}

TEST_CASE("tau family for n = 2, d = 2") {
  const TauFamily t = tau_family(2, 2);
  CHECK(t.g == 10);
  CHECK(t.tau_full.dims() == Dims{2, 2, 2, 2});
  CHECK(t.purification_ket.dims() == Dims{2, 2, 2, 2, 10});

  // Independent construction: (I + SWAP)/2 on (H K)^{(x) 2}, normalized by g.
  const Matrix sym = (Matrix::Identity(16, 16) + testing::swap_matrix(4)) / 2.0;
  const Operator tau_full(sym / 10.0, {2, 2, 2, 2});
  CHECK(max_abs(tau_full.matrix() - t.tau_full.matrix()) < 1e-14);
  const Operator reduced = partial_trace(tau_full, {0, 2});
  CHECK(max_abs(reduced.matrix() - t.tau_reduced.matrix()) < 1e-14);

  auto ev = eigh(t.tau_reduced).values;
  CHECK(ev(0) == doctest::Approx(0.1).epsilon(1e-12));
  for (int k = 1; k < 4; ++k) CHECK(ev(k) == doctest::Approx(0.3).epsilon(1e-12));

  const Operator from_pur = partial_trace(t.tau_purification(), {0, 1, 2, 3});
  CHECK(max_abs(from_pur.matrix() - t.tau_full.matrix()) < 1e-14);
  CHECK(std::abs((t.tau_reduced.matrix() * testing::swap_matrix(2)).trace().real() - 0.8) < 1e-12);
}

TEST_CASE("tau family structural properties") {
  for (auto [n, d] : {std::pair<std::size_t, std::size_t>{1, 3}, {2, 3}, {3, 2}}) {
    const TauFamily t = tau_family(n, d);
    CHECK(std::abs(t.tau_reduced.trace() - cplx(1.0)) < 1e-12);
    CHECK(t.tau_reduced.is_density());
    CHECK(permutation_defect(t.tau_reduced, n, d) < 1e-12);
    CHECK(std::abs(t.purification_ket.matrix().norm() - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(tau_family(5, 3), DimensionError);
  CHECK_NOTHROW(tau_family(3, 3, 10000000));
}

TEST_CASE("tau is the Hilbert-Schmidt mixture of product states") {
  Rng rng(17);
  const TauFamily t1 = tau_family(1, 2);
  const Operator m1 = tau_monte_carlo(1, 2, 100000, rng);
  CHECK(0.5 * trace_norm(m1 - t1.tau_reduced) < 0.01);

  const TauFamily t2 = tau_family(2, 2);
  const Operator m2 = tau_monte_carlo(2, 2, 100000, rng);
  CHECK(0.5 * trace_norm(m2 - t2.tau_reduced) < 0.02);

  // Error shrinks with the sample count (roughly 1/sqrt(N)).
  Rng a(3), b(3);
  const double small = trace_norm(tau_monte_carlo(2, 2, 1000, a) - t2.tau_reduced);
  const double large = trace_norm(tau_monte_carlo(2, 2, 64000, b) - t2.tau_reduced);
  CHECK(large < small);
}

TEST_CASE("post-selection measurement recovers symmetric states") {
  const TauFamily t = tau_family(2, 2);
  // Product of a pure state on H (x) K lies in the symmetric subspace.
  Rng rng(23);
  for (int k = 0; k < 50; ++k) {
    Operator rho;
    if (k % 2 == 0) {
      const Operator v = sample_haar_pure(4, rng);
      rho = kron(v, v).with_dims({2, 2, 2, 2});
    } else {
      rho = purify_to_sym(random_invariant_state(2, 2, rng), 2, 2);
    }
    const Operator m = postselect_measurement(rho, t);
    const auto ev = eigh(m).values;
    CHECK(ev.minCoeff() > -1e-12);
    CHECK(ev.maxCoeff() < 1.0 + 1e-12);
    const Operator back = apply_functional_on_last(t.tau_purification(), m);
    CHECK(max_abs(cplx(static_cast<double>(t.g)) * back.matrix() - rho.matrix()) < 1e-12);
  }

  const Operator outside = kron(Operator::ket({2, 2}, 1).projector(), Operator::ket({2, 2}, 2).projector())
                               .with_dims({2, 2, 2, 2});
  CHECK_THROWS_AS(postselect_measurement(outside, t), NumericalError);
  CHECK_THROWS_AS(postselect_measurement(Operator::identity({2, 2}), t), DimensionError);
}

TEST_CASE("purification into the symmetric subspace") {
  Rng rng(29);
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 2 + k % 2;
    const Operator rho = random_invariant_state(n, 2, rng);
    const Operator ket = purify_to_sym_ket(rho, n, 2);
    const Operator psi = ket.projector();
    std::vector<std::size_t> h;
    for (std::size_t j = 0; j < n; ++j) h.push_back(2 * j);
    CHECK(max_abs(partial_trace(psi, h).matrix() - rho.matrix()) < 1e-10);
    const Operator p = sym_space(n, 4).projector();
    CHECK(std::abs((p * ket).matrix().norm() - 1.0) < 1e-10);
  }
  const Operator skew = kron(Operator::basis_projector({2}, 0), Operator::basis_projector({2}, 1));
  CHECK_THROWS_AS(purify_to_sym_ket(skew, 2, 2), NumericalError);
}

TEST_CASE("symmetrize state") {
  Rng rng(31);
  const Operator rho(sample_hs_density(8, rng).matrix(), {2, 2, 2});
  const Operator s = symmetrize_state(rho, 2, 2);
  CHECK(s.dims() == Dims{2, 2, 2, 2});
  CHECK(s.is_density());
  // Reduced on the first two factors: the permutation average.
  const Operator reduced = partial_trace(s, {0, 1});
  const Operator r2 = partial_trace(rho, {0, 1});
  const Operator sw = perm_operator(2, 2, {1, 0});
  const Operator avg = cplx(0.5) * (r2 + sw * r2 * sw.adjoint());
  CHECK(max_abs(reduced.matrix() - avg.matrix()) < 1e-12);
  CHECK(permutation_defect(reduced, 2, 2) < 1e-12);
  CHECK_THROWS_AS(symmetrize_state(rho, 6, 2), DimensionError);
}

TEST_CASE("layout helpers") {
  CHECK(interleaved_to_block(2) == std::vector<std::size_t>{0, 2, 1, 3});
  CHECK(interleaved_to_block(2, 1) == std::vector<std::size_t>{0, 2, 1, 3, 4});
  for (std::size_t n = 1; n <= 4; ++n) {
    CHECK(inverse_permutation(interleaved_to_block(n, 1)) == block_to_interleaved(n, 1));
  }
}
