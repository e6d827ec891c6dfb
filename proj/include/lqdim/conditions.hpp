#ifndef LQDIM_CONDITIONS_HPP
#define LQDIM_CONDITIONS_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lqdim/dimension.hpp"
#include "lqdim/ifs.hpp"
#include "lqdim/projective.hpp"

namespace lqdim {

/// Strict inequalities pass only when their log margin exceeds this.
inline constexpr double kStrictSlack = 1e-12;
/// Largest q examined by threshold scans; beyond it q₀ is reported as +∞.
inline constexpr double kQScanCap = 64.0;

enum class CertStatus { Certified, Undetermined };

struct SeparationCertificate {
  CertStatus status = CertStatus::Undetermined;
  double gap = 0.0;  // lower bound for min dist(T_i F, T_j F) when Certified
  std::size_t depth = 0;
};

/// q₀ as an extended real: a finite value, +∞, or "no admissible q ≥ 2".
class Threshold {
 public:
  enum class Kind { Finite, Infinite, NoneBelow2 };

  static Threshold finite(double q) { return Threshold(Kind::Finite, q); }
  static Threshold infinite() { return Threshold(Kind::Infinite, std::numeric_limits<double>::infinity()); }
  static Threshold none_below_2() { return Threshold(Kind::NoneBelow2, std::numeric_limits<double>::quiet_NaN()); }

  Kind kind() const { return kind_; }
  /// +∞ for Infinite, NaN for NoneBelow2.
  double value() const { return value_; }
  /// True when some q > 2 is admissible.
  bool admits_q_above_2() const { return kind_ != Kind::NoneBelow2; }
  std::string to_string() const;

 private:
  Threshold(Kind k, double v) : kind_(k), value_(v) {}
  Kind kind_;
  double value_;
};

struct MarginReport {
  bool pass = false;
  std::vector<double> margins;  // per map, in log space; pass ⇔ all > kStrictSlack
};

struct Prop3Result {
  bool exists = false;
  double condition_sum = 0.0;  // Σ (α₂^{d2}/γ)^{1/2}
  double alpha2_half_sum = 0.0;  // Σ α₂^{d2/2}
  double alpha1_d2_sum = 0.0;  // Σ α₁^{d2}
  double alpha1_d_sum = 0.0;  // Σ α₁^d
};

enum class Verdict { Holds, Fails, Inconclusive };

struct ConditionReport {
  bool positivity = false;
  SeparationCertificate separation;
  GammaReport gamma;
  bool projectively_separated = false;
  double gamma_used = 1.0;
  DimensionEstimate dimension;
  Verdict d_at_most_one = Verdict::Inconclusive;
  Threshold q0_bunching = Threshold::none_below_2();
  std::optional<Threshold> q0_metric;
  std::vector<double> per_map_margins;  // (B) margins at q = 2
  bool bunching_at_2 = false;
  Prop3Result prop3;
};

bool check_positivity(const Ifs& ifs);

/// Branch and bound over pairs of level-`depth` cover balls. Never refutes (S).
SeparationCertificate check_separation(const Ifs& ifs, std::size_t depth,
                                       std::uint64_t budget = kDefaultWordBudget);

/// (B): γ·α₁(i)^{qd} < α₂(i)^{(q−1)d} for every map.
MarginReport check_bunching(const Ifs& ifs, double gamma, double d, double q);

/// (MB): γ·p(i)^q < α₂(i)^{(q−1)d(q)} for every map.
MarginReport check_metric_bunching(const Ifs& ifs, double gamma, double dq, std::span<const double> p, double q);

/// Closed-form supremum of q ≥ 2 satisfying (B).
Threshold q0_bunching(const Ifs& ifs, double gamma, double d);

/// Upward scan from 2 for the first q where `holds` fails, then bisection to tol.
/// Assumes `holds` is true on an initial segment of [2, cap].
Threshold scan_threshold(const std::function<bool(double)>& holds, double tol, double step = 0.5,
                         double cap = kQScanCap);

/// Same threshold as q0_bunching, found by scanning check_bunching.
Threshold q0_bunching_scan(const Ifs& ifs, double gamma, double d, double tol);

/// Supremum of q ≥ 2 satisfying (MB), with d(q) from lq_exponent at depth k.
Threshold q0_metric_bunching(const Ifs& ifs, double gamma, std::span<const double> p, std::size_t k,
                             double tol, std::uint64_t budget = kDefaultWordBudget);

Prop3Result prop3_check(const Ifs& ifs, double gamma, double d2, double d);

std::string to_string(CertStatus s);
std::string to_string(Verdict v);

}  // namespace lqdim

#endif  // LQDIM_CONDITIONS_HPP
