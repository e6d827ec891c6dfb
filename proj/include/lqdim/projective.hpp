#ifndef LQDIM_PROJECTIVE_HPP
#define LQDIM_PROJECTIVE_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "lqdim/enumerate.hpp"
#include "lqdim/ifs.hpp"

namespace lqdim {

/// Closed arc of the projective line, stored in a lift: lo in [-π/2, π/2),
/// hi = lo + length with 0 <= length < π.
class Arc {
 public:
  Arc(double lo_lift, double hi_lift);

  /// Directions [-π/2, 0]: lines through the second and fourth quadrants.
  static Arc negative_quadrant();
  /// Directions [0, π/2].
  static Arc positive_quadrant();

  double lo_lift() const { return lo_; }
  double hi_lift() const { return lo_ + length_; }
  double length() const { return length_; }
  Angle lo() const { return Angle(lo_); }
  Angle hi() const { return Angle(lo_ + length_); }

  bool contains(Angle theta, double tol = 0.0) const;
  bool contains(const Arc& other, double tol = 0.0) const;

  /// Gap between two arcs on the projective line, 0 if they meet.
  friend double arc_gap(const Arc& a, const Arc& b);

 private:
  double lo_;
  double length_;
};

/// φ(θ): the direction of m⁻¹u(θ).
template <typename Derived>
Angle proj_map(const Eigen::MatrixBase<Derived>& m, Angle theta) {
  using Scalar = typename Derived::Scalar;
  const Scalar a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
  if (detail::det2<Scalar>(a, b, c, d) == 0) throw DomainError("projective map of a singular matrix");
  // The adjugate is m⁻¹ up to a scalar, which does not move lines.
  const Vector2<double> u = theta.direction();
  return Angle::of(Vector2<double>(static_cast<double>(d) * u(0) - static_cast<double>(b) * u(1),
                                   -static_cast<double>(c) * u(0) + static_cast<double>(a) * u(1)));
}

/// Image of an arc under φ. Endpoint order follows the sign of det m.
template <typename Derived>
Arc proj_image(const Eigen::MatrixBase<Derived>& m, const Arc& arc) {
  const Angle lo = proj_map(m, arc.lo());
  const Angle hi = proj_map(m, arc.hi());
  const double det = static_cast<double>(detail::det2(m(0, 0), m(0, 1), m(1, 0), m(1, 1)));
  auto forward = [](Angle from, Angle to) {
    double len = to.radians() - from.radians();
    // A tiny negative length is rounding on a collapsed arc, not a wrap.
    if (len < 0) len = len > -1e-12 ? 0.0 : len + std::numbers::pi;
    return Arc(from.radians(), from.radians() + len);
  };
  if (arc.length() == 0) return Arc(lo.radians(), lo.radians());
  return det > 0 ? forward(lo, hi) : forward(hi, lo);
}

/// Largest number of closed arcs sharing a point. Endpoint ties count.
std::size_t max_overlap(std::span<const Arc> arcs);

struct GammaLevel {
  std::size_t depth = 0;
  std::uint64_t max_overlap = 0;
  double gamma_hat = 1.0;
  /// Shortest arc above kArcResolution. Unresolved levels may overcount, which
  /// keeps gamma_hat an upper bound but voids exact overlap comparisons.
  bool resolved = true;
};

inline constexpr double kArcResolution = 1e-12;

struct GammaReport {
  std::vector<GammaLevel> per_level;
  double certified_upper = 1.0;
  bool separated = false;
  bool submultiplicative = true;  // N_{m+n} ≤ N_m·N_n over all resolved pairs
};

/// Thrown when a level would exceed the budget; carries the levels done so far.
struct GammaBudgetError : ResourceError {
  GammaBudgetError(const std::string& what, GammaReport partial)
      : ResourceError(what), partial(std::move(partial)) {}
  GammaReport partial;
};

struct ProjectiveSeparation {
  bool separated = false;
  double gap = 0.0;  // smallest gap between level-1 images of the negative quadrant
};

/// Level-1 arcs φ_i(Q₂) for every map.
std::vector<Arc> first_level_arcs(const Ifs& ifs);

ProjectiveSeparation projective_separation(const Ifs& ifs);

/// Certified upper bound min_n N_n^{1/n} for the overlap growth rate γ, where
/// N_n is the largest number of arcs φ_{c_n}∘…∘φ_{c_1}(Q₂) sharing a direction.
GammaReport gamma_bound(const Ifs& ifs, std::size_t max_depth,
                        std::uint64_t budget = kDefaultWordBudget);

/// All level-n arcs in lexicographic order of c₁…c_n.
std::vector<Arc> level_arcs(const Ifs& ifs, std::size_t depth);

}  // namespace lqdim

#endif  // LQDIM_PROJECTIVE_HPP
