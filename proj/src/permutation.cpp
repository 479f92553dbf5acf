#include "postsel/permutation.hpp"

#include <algorithm>
#include <numeric>

namespace postsel {

std::size_t factorial(std::size_t n) {
  std::size_t f = 1;
  for (std::size_t k = 2; k <= n; ++k) f *= k;
  return f;
}

std::vector<Permutation> all_permutations(std::size_t n) {
  Permutation p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::vector<Permutation> out;
  out.reserve(factorial(n));
  do {
    out.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  return out;
}

bool is_permutation(const Permutation& pi) {
  std::vector<bool> seen(pi.size(), false);
  for (auto v : pi) {
    if (v >= pi.size() || seen[v]) return false;
    seen[v] = true;
  }
  return true;
}

std::size_t permutation_index(const Permutation& pi) {
  if (!is_permutation(pi)) throw DimensionError("malformed permutation");
  // Lehmer code in lexicographic order.
  const std::size_t n = pi.size();
  std::size_t index = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t smaller = 0;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (pi[j] < pi[i]) ++smaller;
    }
    index += smaller * factorial(n - 1 - i);
  }
  return index;
}

Permutation compose(const Permutation& a, const Permutation& b) {
  if (a.size() != b.size()) throw DimensionError("compose: permutation sizes differ");
  Permutation out(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[b[j]];
  return out;
}

Permutation inverse(const Permutation& pi) {
  if (!is_permutation(pi)) throw DimensionError("malformed permutation");
  Permutation inv(pi.size());
  for (std::size_t j = 0; j < pi.size(); ++j) inv[pi[j]] = j;
  return inv;
}

Permutation adjacent_transposition(std::size_t n, std::size_t k) {
  if (k + 1 >= n) throw DimensionError("adjacent_transposition: index out of range");
  Permutation p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  std::swap(p[k], p[k + 1]);
  return p;
}

std::vector<std::size_t> perm_index_map(std::size_t n, std::size_t d, const Permutation& pi) {
  if (pi.size() != n || !is_permutation(pi)) throw DimensionError("malformed permutation");
  std::size_t total = 1;
  for (std::size_t k = 0; k < n; ++k) total *= d;
  std::vector<std::size_t> stride(n, 1);
  for (std::size_t f = n; f-- > 1;) stride[f - 1] = stride[f] * d;

  std::vector<std::size_t> image(total);
  std::vector<std::size_t> digits(n, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t target = 0;
    for (std::size_t j = 0; j < n; ++j) target += digits[j] * stride[pi[j]];
    image[flat] = target;
    for (std::size_t f = n; f-- > 0;) {
      if (++digits[f] < d) break;
      digits[f] = 0;
    }
  }
  return image;
}

Operator perm_operator(std::size_t n, std::size_t d, const Permutation& pi) {
  const auto image = perm_index_map(n, d, pi);
  const auto total = static_cast<Eigen::Index>(image.size());
  Matrix p = Matrix::Zero(total, total);
  for (std::size_t i = 0; i < image.size(); ++i) {
    p(static_cast<Eigen::Index>(image[i]), static_cast<Eigen::Index>(i)) = 1.0;
  }
  return {std::move(p), Dims(n, d)};
}

}  // namespace postsel
