#ifndef LQDIM_IFS_HPP
#define LQDIM_IFS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "lqdim/errors.hpp"

namespace lqdim {

template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;
template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;

using Symbol = std::uint32_t;

/// Finite word over the symbol alphabet 0..N-1. The empty word is allowed.
class Word {
 public:
  Word() = default;
  Word(std::initializer_list<Symbol> symbols) : symbols_(symbols) {}
  explicit Word(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {}

  static Word repeat(Symbol symbol, std::size_t length) {
    return Word(std::vector<Symbol>(length, symbol));
  }

  /// Word of the given length whose lexicographic rank among all words of
  /// that length is `index` (first symbol most significant).
  static Word from_index(std::uint64_t index, std::size_t length, std::size_t alphabet) {
    std::vector<Symbol> s(length);
    for (std::size_t i = length; i-- > 0;) {
      s[i] = static_cast<Symbol>(index % alphabet);
      index /= alphabet;
    }
    return Word(std::move(s));
  }

  std::size_t size() const { return symbols_.size(); }
  bool empty() const { return symbols_.empty(); }
  Symbol operator[](std::size_t i) const { return symbols_[i]; }
  const std::vector<Symbol>& symbols() const { return symbols_; }
  auto begin() const { return symbols_.begin(); }
  auto end() const { return symbols_.end(); }

  void push_back(Symbol s) { symbols_.push_back(s); }

  Word prefix(std::size_t k) const {
    k = std::min(k, size());
    return Word(std::vector<Symbol>(symbols_.begin(), symbols_.begin() + static_cast<std::ptrdiff_t>(k)));
  }

  /// The shifted word σ^k(w).
  Word suffix_from(std::size_t k) const {
    k = std::min(k, size());
    return Word(std::vector<Symbol>(symbols_.begin() + static_cast<std::ptrdiff_t>(k), symbols_.end()));
  }

  Word reversed() const { return Word(std::vector<Symbol>(symbols_.rbegin(), symbols_.rend())); }

  void validate(std::size_t alphabet) const {
    for (std::size_t i = 0; i < size(); ++i) {
      if (symbols_[i] >= alphabet) {
        throw InputError("word symbol " + std::to_string(symbols_[i]) + " at position " +
                         std::to_string(i) + " out of range for " + std::to_string(alphabet) +
                         " maps");
      }
    }
  }

  friend Word operator+(const Word& a, const Word& b) {
    std::vector<Symbol> s = a.symbols_;
    s.insert(s.end(), b.symbols_.begin(), b.symbols_.end());
    return Word(std::move(s));
  }
  friend bool operator==(const Word&, const Word&) = default;

 private:
  std::vector<Symbol> symbols_;
};

/// A point of the projective line, stored as its representative in (-π/2, π/2].
class Angle {
 public:
  Angle() = default;
  explicit Angle(double theta) : theta_(canonical(theta)) {}

  template <typename Derived>
  static Angle of(const Eigen::MatrixBase<Derived>& v) {
    return Angle(std::atan2(static_cast<double>(v(1)), static_cast<double>(v(0))));
  }

  static double canonical(double theta) {
    constexpr double pi = std::numbers::pi;
    double r = theta - pi * std::floor((theta + pi / 2) / pi);
    if (r <= -pi / 2) r += pi;
    if (r > pi / 2) r -= pi;
    return r;
  }

  double radians() const { return theta_; }
  Vector2<double> direction() const {
    if (theta_ == 0.0) return {1.0, 0.0};
    if (theta_ == std::numbers::pi / 2) return {0.0, 1.0};
    return {std::cos(theta_), std::sin(theta_)};
  }

  /// Distance on the projective line (a circle of length π).
  friend double projective_distance(Angle a, Angle b) {
    double d = std::fabs(a.theta_ - b.theta_);
    return std::min(d, std::numbers::pi - d);
  }
  friend bool operator==(Angle, Angle) = default;

 private:
  double theta_ = 0.0;
};

template <typename Scalar>
struct SingularPair {
  Scalar alpha1{};
  Scalar alpha2{};
  Scalar log_alpha1{};
  Scalar log_alpha2{};
  Angle major_axis;  // direction of the image of the leading right singular vector
};

namespace detail {

// Kahan's fma determinant, accurate even when ad ≈ bc.
template <typename Scalar>
Scalar det2(Scalar a, Scalar b, Scalar c, Scalar d) {
  Scalar w = b * c;
  Scalar e = std::fma(-b, c, w);
  Scalar f = std::fma(a, d, -w);
  return f + e;
}

template <typename Scalar>
void require_finite(const Matrix2<Scalar>& m) {
  if (!m.allFinite()) throw DomainError("matrix has non-finite entries");
}

}  // namespace detail

/// Closed-form singular values of a 2x2 matrix scaled by exp(log_scale).
/// α₂ is recovered as |det|/α₁, which stays accurate when α₂ ≪ α₁.
template <typename Derived>
SingularPair<typename Derived::Scalar> singular_values(const Eigen::MatrixBase<Derived>& m,
                                                       typename Derived::Scalar log_scale,
                                                       typename Derived::Scalar log_abs_det) {
  using Scalar = typename Derived::Scalar;
  const Scalar a = m(0, 0), b = m(0, 1), c = m(1, 0), d = m(1, 1);
  const Scalar e = (a + d) / 2, f = (a - d) / 2, g = (c + b) / 2, h = (c - b) / 2;
  const Scalar q = std::hypot(e, h), r = std::hypot(f, g);
  const Scalar s1 = q + r;
  if (!(s1 > 0) || !std::isfinite(log_abs_det)) throw DomainError("singular matrix");

  SingularPair<Scalar> out;
  out.log_alpha1 = std::log(s1) + log_scale;
  out.log_alpha2 = log_abs_det - out.log_alpha1;
  out.alpha1 = std::exp(out.log_alpha1);
  out.alpha2 = std::exp(out.log_alpha2);
  out.major_axis = Angle(0.5 * static_cast<double>(std::atan2(g, f) + std::atan2(h, e)));
  return out;
}

template <typename Derived>
SingularPair<typename Derived::Scalar> singular_values(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const Scalar det = detail::det2<Scalar>(m(0, 0), m(0, 1), m(1, 0), m(1, 1));
  if (det == 0 || !std::isfinite(det)) throw DomainError("singular matrix");
  return singular_values(m, Scalar(0), std::log(std::fabs(det)));
}

/// log φ^s from a singular pair.
template <typename Scalar>
Scalar log_svf(const SingularPair<Scalar>& a, Scalar s) {
  return s <= 1 ? s * a.log_alpha1 : a.log_alpha1 + (s - 1) * a.log_alpha2;
}

/// T(x) = A x + t. Compositions keep the linear part as exp(log_scale)·M with
/// M rescaled whenever its magnitude drifts, and carry log|det| exactly.
template <typename Scalar>
class AffineMap {
 public:
  using Mat = Matrix2<Scalar>;
  using Vec = Vector2<Scalar>;

  AffineMap(const Mat& linear, const Vec& translation) : linear_(linear), translation_(translation) {
    detail::require_finite(linear);
    if (!translation.allFinite()) throw DomainError("translation has non-finite entries");
    const Scalar det = detail::det2<Scalar>(linear(0, 0), linear(0, 1), linear(1, 0), linear(1, 1));
    if (det == 0) throw DomainError("linear part is singular");
    log_abs_det_ = std::log(std::fabs(det));
    det_sign_ = det > 0 ? 1 : -1;
    if (!(lqdim::singular_values(linear).alpha1 < 1)) throw DomainError("linear part is not a contraction");
  }

  /// Identity, flagged as the empty composition.
  static AffineMap identity() {
    AffineMap m;
    m.empty_ = true;
    return m;
  }

  Mat linear() const { return std::exp(log_scale_) * linear_; }
  const Mat& normalized_linear() const { return linear_; }
  Scalar log_scale() const { return log_scale_; }
  Scalar log_abs_det() const { return log_abs_det_; }
  int det_sign() const { return det_sign_; }
  const Vec& translation() const { return translation_; }
  bool is_empty_composition() const { return empty_; }

  Vec operator()(const Vec& x) const { return std::exp(log_scale_) * (linear_ * x) + translation_; }

  SingularPair<Scalar> singular_values() const {
    return lqdim::singular_values(linear_, log_scale_, log_abs_det_);
  }

  /// f * g is the composition f∘g.
  friend AffineMap operator*(const AffineMap& f, const AffineMap& g) {
    AffineMap out;
    out.linear_ = f.linear_ * g.linear_;
    out.log_scale_ = f.log_scale_ + g.log_scale_;
    out.translation_ = std::exp(f.log_scale_) * (f.linear_ * g.translation_) + f.translation_;
    out.log_abs_det_ = f.log_abs_det_ + g.log_abs_det_;
    out.det_sign_ = f.det_sign_ * g.det_sign_;
    out.empty_ = f.empty_ && g.empty_;
    out.rescale();
    return out;
  }

 private:
  AffineMap() = default;

  void rescale() {
    const Scalar m = linear_.cwiseAbs().maxCoeff();
    if (m < Scalar(0x1p-64) || m > Scalar(0x1p64)) {
      linear_ /= m;
      log_scale_ += std::log(m);
    }
  }

  Mat linear_ = Mat::Identity();
  Vec translation_ = Vec::Zero();
  Scalar log_scale_ = 0;
  Scalar log_abs_det_ = 0;
  int det_sign_ = 1;
  bool empty_ = false;
};

template <typename Scalar>
class IfsSystem {
 public:
  using Map = AffineMap<Scalar>;

  explicit IfsSystem(std::vector<Map> maps) : maps_(std::move(maps)) {
    if (maps_.empty()) throw InputError("an IFS needs at least one map");
    for (const auto& m : maps_) {
      if (m.is_empty_composition()) throw InputError("an IFS map cannot be the empty composition");
    }
  }

  std::size_t size() const { return maps_.size(); }
  const Map& operator[](Symbol i) const { return maps_[i]; }
  const std::vector<Map>& maps() const { return maps_; }
  auto begin() const { return maps_.begin(); }
  auto end() const { return maps_.end(); }

  Scalar max_alpha1() const {
    Scalar m = 0;
    for (const auto& map : maps_) m = std::max(m, map.singular_values().alpha1);
    return m;
  }

 private:
  std::vector<Map> maps_;
};

using Map = AffineMap<double>;
using Ifs = IfsSystem<double>;

/// T_{w₁}∘…∘T_{w_k}; the empty word gives the flagged identity.
template <typename Scalar>
AffineMap<Scalar> compose(const IfsSystem<Scalar>& ifs, const Word& w) {
  w.validate(ifs.size());
  AffineMap<Scalar> out = AffineMap<Scalar>::identity();
  for (Symbol s : w) out = out * ifs[s];
  return out;
}

template <typename Scalar>
Scalar svf(const IfsSystem<Scalar>& ifs, const Word& w, Scalar s) {
  if (!(s >= 0 && s <= 2)) throw InputError("singular value function exponent must lie in [0, 2]");
  if (w.empty()) throw InputError("singular value function needs a nonempty word");
  return std::exp(log_svf(compose(ifs, w).singular_values(), s));
}

/// log λ(θ) = log |A u(θ)| for the linear part of `map`.
template <typename Scalar>
Scalar log_contraction_at_angle(const AffineMap<Scalar>& map, Angle theta) {
  const Vector2<Scalar> u = theta.direction().template cast<Scalar>();
  return map.log_scale() + std::log((map.normalized_linear() * u).norm());
}

/// λ_w(θ): how much T_w contracts segments pointing in direction θ.
template <typename Scalar>
Scalar contraction_at_angle(const IfsSystem<Scalar>& ifs, const Word& w, Angle theta) {
  if (w.empty()) throw InputError("contraction_at_angle needs a nonempty word");
  return std::exp(log_contraction_at_angle(compose(ifs, w), theta));
}

template <typename Scalar>
struct Ball {
  Vector2<Scalar> center = Vector2<Scalar>::Zero();
  Scalar radius = 0;
};

/// Ball about the origin mapped into itself by every T_i.
template <typename Scalar>
Ball<Scalar> invariant_ball(const IfsSystem<Scalar>& ifs) {
  const Scalar a = ifs.max_alpha1();
  if (!(a < 1)) throw DomainError("invariant ball needs contractive maps");
  Scalar t = 0;
  for (const auto& m : ifs) t = std::max(t, m.translation().norm());
  return {Vector2<Scalar>::Zero(), t / (1 - a)};
}

/// T_w(c) for the invariant-ball center c; within α₁(w)·R of the cylinder T_w(F).
template <typename Scalar>
Vector2<Scalar> cylinder_point(const IfsSystem<Scalar>& ifs, const Word& w) {
  if (w.empty()) throw InputError("cylinder_point needs a nonempty word");
  return compose(ifs, w)(invariant_ball(ifs).center);
}

}  // namespace lqdim

#endif  // LQDIM_IFS_HPP
