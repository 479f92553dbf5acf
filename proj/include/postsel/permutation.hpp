#pragma once

#include <cstddef>
#include <vector>

#include "postsel/linalg.hpp"

namespace postsel {

/// Zero-based permutation of {0..n-1}; pi[j] is the image of j.
using Permutation = std::vector<std::size_t>;

std::size_t factorial(std::size_t n);
/// All permutations of n elements in lexicographic order. Index positions
/// in this list label the classical permutation registers.
std::vector<Permutation> all_permutations(std::size_t n);
/// Position of pi in all_permutations(pi.size()).
std::size_t permutation_index(const Permutation& pi);
/// (a o b)(j) = a(b(j)).
Permutation compose(const Permutation& a, const Permutation& b);
Permutation inverse(const Permutation& pi);
/// The adjacent transposition (k, k+1) on n elements.
Permutation adjacent_transposition(std::size_t n, std::size_t k);
bool is_permutation(const Permutation& pi);

/// Unitary permuting the tensor factors of (C^d)^{(x) n}:
///   P |i_0 ... i_{n-1}> = |i_{pi^-1(0)} ... i_{pi^-1(n-1)}>,
/// i.e. the factor at position j moves to position pi(j). Then
/// perm_operator(sigma o tau) = perm_operator(sigma) * perm_operator(tau).
Operator perm_operator(std::size_t n, std::size_t d, const Permutation& pi);
/// Same operator as a real permutation matrix in flat-index form:
/// image[flat] is the flat index that |flat> is sent to.
std::vector<std::size_t> perm_index_map(std::size_t n, std::size_t d, const Permutation& pi);

}  // namespace postsel
