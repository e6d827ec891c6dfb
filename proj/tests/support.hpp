#ifndef LQDIM_TESTS_SUPPORT_HPP
#define LQDIM_TESTS_SUPPORT_HPP

#include <random>

#include "lqdim/ifs.hpp"

namespace test_support {

using namespace lqdim;

inline Map affine(double a, double b, double c, double d, double tx = 0, double ty = 0) {
  Matrix2<double> m;
  m << a, b, c, d;
  return Map(m, Vector2<double>(tx, ty));
}

/// Random contraction with α₁ ≤ 0.9; positive entries when `positive`.
inline Map random_map(std::mt19937_64& rng, bool positive = false) {
  std::uniform_real_distribution<double> u(positive ? 0.05 : -1.0, 1.0), t(-1.0, 1.0);
  while (true) {
    Matrix2<double> m;
    m << u(rng), u(rng), u(rng), u(rng);
    const double det = m.determinant();
    if (std::fabs(det) < 1e-3) continue;
    const double a1 = singular_values(m).alpha1;
    m *= std::uniform_real_distribution<double>(0.2, 0.9)(rng) / a1;
    return Map(m, Vector2<double>(t(rng), t(rng)));
  }
}

inline Ifs random_ifs(std::mt19937_64& rng, std::size_t n, bool positive = false) {
  std::vector<Map> maps;
  for (std::size_t i = 0; i < n; ++i) maps.push_back(random_map(rng, positive));
  return Ifs(std::move(maps));
}

inline Word random_word(std::mt19937_64& rng, std::size_t n, std::size_t len) {
  std::uniform_int_distribution<Symbol> c(0, static_cast<Symbol>(n - 1));
  std::vector<Symbol> s(len);
  for (auto& x : s) x = c(rng);
  return Word(std::move(s));
}

inline bool rel_close(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max(std::fabs(a), std::fabs(b));
}

}  // namespace test_support

#endif  // LQDIM_TESTS_SUPPORT_HPP
