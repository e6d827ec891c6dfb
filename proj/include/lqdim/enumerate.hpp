#ifndef LQDIM_ENUMERATE_HPP
#define LQDIM_ENUMERATE_HPP

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "lqdim/ifs.hpp"
#include "lqdim/parallel.hpp"

namespace lqdim {

/// Default cap on the number of words enumerated at a single level.
inline constexpr std::uint64_t kDefaultWordBudget = std::uint64_t{1} << 23;

/// N^k, or max() on overflow.
inline std::uint64_t word_count(std::size_t alphabet, std::size_t length) {
  std::uint64_t n = 1;
  for (std::size_t i = 0; i < length; ++i) {
    if (n > std::numeric_limits<std::uint64_t>::max() / alphabet) return std::numeric_limits<std::uint64_t>::max();
    n *= alphabet;
  }
  return n;
}

inline void check_budget(std::size_t alphabet, std::size_t length, std::uint64_t budget,
                         const char* what) {
  if (word_count(alphabet, length) > budget) {
    throw ResourceError(std::string(what) + ": " + std::to_string(alphabet) + "^" +
                        std::to_string(length) + " words exceeds the enumeration budget of " +
                        std::to_string(budget));
  }
}

/// Prefix length used to split a depth-`length` word tree into independent
/// subtrees. Depends only on the tree shape, so reductions merged in subtree
/// order are identical for every worker count.
inline std::size_t split_depth(std::size_t alphabet, std::size_t length) {
  std::size_t p = 0;
  while (p < length && word_count(alphabet, p) < 64) ++p;
  return p;
}

/// Depth-first walk of all words of length `length`, visiting leaves in
/// lexicographic order. `leaf(index, map)` receives the lexicographic rank
/// and the composition T_w. Subtrees run in parallel.
template <typename Scalar, typename Leaf>
void for_each_word(const IfsSystem<Scalar>& ifs, std::size_t length, Leaf&& leaf) {
  const std::size_t n = ifs.size();
  const std::size_t p = split_depth(n, length);
  const std::uint64_t subtrees = word_count(n, p);
  const std::uint64_t per_subtree = word_count(n, length - p);

  parallel_for(subtrees, [&](std::size_t task) {
    const Word head = Word::from_index(task, p, n);
    std::vector<AffineMap<Scalar>> stack;
    stack.reserve(length + 1);
    stack.push_back(compose(ifs, head));
    std::vector<Symbol> digits(length - p, 0);
    const std::size_t rest = length - p;
    if (rest == 0) {
      leaf(static_cast<std::uint64_t>(task), stack.back());
      return;
    }
    // Iterative odometer over the remaining digits.
    for (std::size_t i = 0; i < rest; ++i) stack.push_back(stack.back() * ifs[0]);
    std::uint64_t index = task * per_subtree;
    while (true) {
      leaf(index++, stack.back());
      std::size_t pos = rest;
      while (pos > 0 && digits[pos - 1] + 1 == n) --pos;
      if (pos == 0) break;
      ++digits[pos - 1];
      stack.erase(stack.begin() + static_cast<std::ptrdiff_t>(pos), stack.end());
      stack.push_back(stack.back() * ifs[digits[pos - 1]]);
      for (std::size_t i = pos; i < rest; ++i) {
        digits[i] = 0;
        stack.push_back(stack.back() * ifs[0]);
      }
    }
  });
}

}  // namespace lqdim

#endif  // LQDIM_ENUMERATE_HPP
