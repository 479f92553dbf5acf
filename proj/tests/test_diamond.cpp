#include "doctest.h"
#include "helpers.hpp"
#include "postsel/diamond.hpp"

using namespace postsel;
using testing::bell_state;
using testing::max_abs;

namespace {

DiamondOptions quick() {
  DiamondOptions o;
  o.restarts = 4;
  return o;
}

Operator schmidt_ket(double theta) {
  Matrix v = Matrix::Zero(4, 1);
  v(0, 0) = std::cos(theta);
  v(3, 0) = std::sin(theta);
  return Operator(v, {2, 2});
}

}  // namespace

TEST_CASE("zero map") {
  Rng rng(1);
  const HPMap zero = subtract(identity_channel(2), identity_channel(2));
  const DiamondResult r = diamond_norm(zero, DiamondOptions{}, rng);
  CHECK(r.value == 0.0);
  CHECK(r.converged);
}

TEST_CASE("identity minus depolarizing") {
  Rng rng(2);
  const HPMap d1 = subtract(identity_channel(2), depolarizing(2, 1.0));
  CHECK(std::abs(output_trace_norm(d1, bell_state()) - 1.5) < 1e-12);

  const DiamondResult r = diamond_norm(d1, DiamondOptions{}, rng);
  CHECK(r.converged);
  CHECK(std::abs(r.value - 1.5) < 1e-6);
  CHECK(r.lower <= r.upper + 1e-12);
  CHECK(r.certificate_min_eigenvalue >= 0.0);
  CHECK(std::abs(output_trace_norm(d1, r.witness.projector()) - r.lower) < 1e-9);

  for (double p : {0.0, 0.1, 0.25, 0.5, 0.9}) {
    const HPMap m = subtract(identity_channel(2), depolarizing(2, p));
    const DiamondResult rp = diamond_norm(m, quick(), rng);
    CHECK(std::abs(rp.value - 1.5 * p) < 1e-6);
  }
}

TEST_CASE("Schmidt-coefficient inputs stay below the diamond norm") {
  Rng rng(3);
  const double p = 0.6;
  const HPMap m = subtract(identity_channel(2), depolarizing(2, p));
  const double value = diamond_norm(m, DiamondOptions{}, rng).value;
  double best = 0.0;
  for (int k = 0; k <= 32; ++k) {
    const double theta = k * M_PI / 64.0;
    const Matrix u = kron(Operator(sample_haar_unitary(2, rng)), Operator(sample_haar_unitary(2, rng))).matrix();
    const Operator ket(u * schmidt_ket(theta).matrix(), {2, 2});
    const double t = output_trace_norm_pure(m, ket);
    CHECK(t <= value + 1e-9);
    best = std::max(best, t);
  }
  // The maximally entangled input (theta = pi/4) attains 3p/2.
  CHECK(std::abs(best - 1.5 * p) < 1e-9);
}

TEST_CASE("reset channel and distinguishability") {
  Rng rng(4);
  const HPMap r = subtract(identity_channel(2), reset_channel(2, 0));
  CHECK(std::abs(diamond_norm(r, DiamondOptions{}, rng).value - 2.0) < 1e-6);

  CHECK(std::abs(distinguish_probability(identity_channel(2), reset_channel(2, 0), quick(), rng) - 1.0) < 1e-6);
  CHECK(std::abs(distinguish_probability(identity_channel(2), identity_channel(2), quick(), rng) - 0.5) < 1e-12);
  CHECK(std::abs(distinguish_probability(identity_channel(2), depolarizing(2, 1.0), quick(), rng) - 0.875) < 1e-6);
}

TEST_CASE("transpose map") {
  Rng rng(5);
  const DiamondResult r = diamond_norm(transpose_map(2), DiamondOptions{}, rng);
  CHECK(std::abs(r.value - 2.0) < 1e-6);
}

TEST_CASE("diamond norm bounds every output trace norm") {
  Rng rng(6);
  for (int k = 0; k < 10; ++k) {
    const HPMap m = subtract(random_channel(2, 3, 2, rng), random_channel(2, 3, 3, rng));
    const DiamondResult r = diamond_norm(m, quick(), rng);
    CHECK(r.lower <= r.upper + 1e-12);
    CHECK(r.value <= 2.0 + 1e-6);
    for (int s = 0; s < 5; ++s) {
      CHECK(output_trace_norm(m, sample_haar_pure(4, rng).with_dims({2, 2})) <= r.value + 1e-9);
      CHECK(output_trace_norm(m, sample_hs_density(2, rng)) <= r.value + 1e-9);
      CHECK(purified_output_trace_norm(m, sample_hs_density(2, rng).matrix()) <= r.value + 1e-9);
    }
  }
}

TEST_CASE("triangle inequality and unitary invariance") {
  Rng rng(7);
  for (int k = 0; k < 5; ++k) {
    const Channel a = random_channel(2, 2, 2, rng);
    const Channel b = random_channel(2, 2, 2, rng);
    const Channel c = random_channel(2, 2, 2, rng);
    const double ac = diamond_norm(subtract(a, c), quick(), rng).value;
    const double ab = diamond_norm(subtract(a, b), quick(), rng).value;
    const double bc = diamond_norm(subtract(b, c), quick(), rng).value;
    CHECK(ac <= ab + bc + 2e-6);

    const HPMap m = subtract(a, b);
    const Matrix u = sample_haar_unitary(2, rng);
    const Matrix v = sample_haar_unitary(2, rng);
    const double rotated = diamond_norm(postcompose_unitary(precompose_unitary(m, u), v), quick(), rng).value;
    CHECK(std::abs(rotated - ab) < 2e-6);
  }
}

TEST_CASE("seesaw is monotone") {
  Rng rng(8);
  for (int k = 0; k < 10; ++k) {
    const HPMap m = subtract(random_channel(3, 2, 2, rng), random_channel(3, 2, 2, rng));
    const SeesawTrace t = seesaw(m, sample_haar_ket(9, rng).with_dims({3, 3}), 200, 0.0);
    REQUIRE_FALSE(t.values.empty());
    for (std::size_t i = 1; i < t.values.size(); ++i) CHECK(t.values[i] >= t.values[i - 1] - 1e-12);
    CHECK(std::abs(output_trace_norm_pure(m, t.best_ket) - t.values.back()) < 1e-9);
  }
}

TEST_CASE("certified upper bound") {
  Rng rng(9);
  const HPMap m = subtract(identity_channel(2), depolarizing(2, 0.4));
  const DiamondResult r = diamond_norm(m, quick(), rng);
  // Any Hermitian P gives a valid bound after the shift.
  for (int k = 0; k < 10; ++k) {
    const double bound = certified_upper_bound(m, sample_hermitian(4, rng));
    CHECK(bound >= r.lower - 1e-9);
  }
  double block_min = -1.0;
  const double tight = certified_upper_bound(m, Matrix::Zero(4, 4), &block_min);
  CHECK(tight >= r.lower - 1e-9);
  CHECK(block_min >= -1e-12);
}

TEST_CASE("differences of channels stay within 2") {
  Rng rng(10);
  for (int k = 0; k < 10; ++k) {
    const HPMap m = subtract(random_channel(2, 2, 1, rng), random_channel(2, 2, 1, rng));
    const DiamondResult r = diamond_norm(m, quick(), rng);
    CHECK(r.value <= 2.0 + 1e-6);
    CHECK(r.gap <= 1e-6);
  }
}

TEST_CASE("input validation") {
  Rng rng(11);
  Matrix bad = Matrix::Zero(4, 4);
  bad(0, 1) = 1.0;
  CHECK_THROWS_AS(diamond_norm(make_map<HPMap>(2, 2, bad), quick(), rng), NumericalError);
  CHECK_THROWS_AS(output_trace_norm_pure(transpose_map(2), Operator::ket({3}, 0)), DimensionError);
}
