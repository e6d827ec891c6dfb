#ifndef LQDIM_DIMENSION_HPP
#define LQDIM_DIMENSION_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "lqdim/enumerate.hpp"
#include "lqdim/ifs.hpp"

namespace lqdim {

/// log α₁, log α₂ of every word of one length, in lexicographic order.
struct LevelTable {
  std::size_t alphabet = 0;
  std::size_t length = 0;
  std::vector<double> log_alpha1;
  std::vector<double> log_alpha2;

  std::size_t size() const { return log_alpha1.size(); }
};

LevelTable level_table(const Ifs& ifs, std::size_t length, std::uint64_t budget = kDefaultWordBudget);

/// log Σ exp(terms[i]) with a max shift and compensated, order-fixed summation.
double log_sum_exp(std::span<const double> terms);

struct DimensionEstimate {
  double value = 0.0;
  std::size_t depth = 0;
  double lower_heuristic = 0.0;
  double upper_certified = 0.0;
  double tolerance = 0.0;
  bool converged = true;
};

/// Cylinder masses μ[w]: a Bernoulli product measure, or the per-length
/// normalized φ^d surrogate of the Käenmäki measure.
class WeightModel {
 public:
  enum class Kind { Bernoulli, KaenmakiApprox };

  static WeightModel bernoulli(std::vector<double> p);
  static WeightModel kaenmaki(const Ifs& ifs, double d, std::size_t depth,
                              std::uint64_t budget = kDefaultWordBudget);

  Kind kind() const { return kind_; }
  std::size_t alphabet() const { return alphabet_; }
  const std::vector<double>& probabilities() const { return p_; }
  double exponent() const { return d_; }
  /// Longest word length with a defined mass; unbounded for Bernoulli.
  std::size_t depth() const { return depth_; }
  /// log Σ_{|v|=ℓ} φ^d(v) for the Käenmäki surrogate, 0 for Bernoulli.
  double log_normalizer(std::size_t length) const;

  double log_mass(const Word& w) const;
  double mass(const Word& w) const;
  /// log μ[w] for every word of a level table, same order.
  std::vector<double> log_masses(const LevelTable& table) const;

 private:
  WeightModel() = default;

  Kind kind_ = Kind::Bernoulli;
  std::size_t alphabet_ = 0;
  std::vector<double> p_;
  std::vector<double> log_p_;
  double d_ = 0.0;
  std::size_t depth_ = 0;
  std::vector<double> log_z_;
  std::optional<Ifs> ifs_;
};

inline WeightModel bernoulli_weights(std::vector<double> p) { return WeightModel::bernoulli(std::move(p)); }
inline WeightModel kaenmaki_weights(const Ifs& ifs, double d, std::size_t depth,
                                    std::uint64_t budget = kDefaultWordBudget) {
  return WeightModel::kaenmaki(ifs, d, depth, budget);
}

/// P_k(s) = (1/k) log Σ_{|w|=k} φ^s(w).
double pressure(const Ifs& ifs, double s, std::size_t k, std::uint64_t budget = kDefaultWordBudget);
double pressure(const LevelTable& table, double s);

/// Root of the level-k pressure: an upper bound for the affinity dimension.
DimensionEstimate affinity_dim(const Ifs& ifs, std::size_t k, double tol,
                               std::uint64_t budget = kDefaultWordBudget);
DimensionEstimate affinity_dim(const Ifs& ifs, const LevelTable& table, double tol);

/// G_k(s) = (1/k) log Σ_{|w|=k} φ^s(w)^{1-q} μ[w]^q.
double moment_pressure(const LevelTable& table, std::span<const double> log_masses, double q, double s);

/// Root in s of G_k: the finite-depth moment exponent d(q).
DimensionEstimate lq_exponent(const Ifs& ifs, const WeightModel& weights, double q, std::size_t k, double tol,
                              std::uint64_t budget = kDefaultWordBudget);
DimensionEstimate lq_exponent(const LevelTable& table, std::span<const double> log_masses, double q,
                              double tol);

/// Largest observed max(μ[vw]/(μ[v]μ[w]), μ[v]μ[w]/μ[vw]) over sampled splits
/// of words up to `depth`. Always ≥ 1; exactly 1 for Bernoulli weights.
double quasi_bernoulli_constant(const WeightModel& weights, std::size_t depth);

/// Default level depth for an alphabet size.
std::size_t default_depth(std::size_t alphabet);

}  // namespace lqdim

#endif  // LQDIM_DIMENSION_HPP
