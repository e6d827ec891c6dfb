#ifndef LQDIM_EMPIRICAL_HPP
#define LQDIM_EMPIRICAL_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "lqdim/dimension.hpp"
#include "lqdim/ifs.hpp"

namespace lqdim {

struct Cell {
  std::int64_t x = 0;
  std::int64_t y = 0;
  double mass = 0.0;
};

/// δ-mesh histogram. Cells sorted by (x, y), masses positive, total 1.
struct GridMeasure {
  double delta = 0.0;
  Vector2<double> origin = Vector2<double>::Zero();
  std::vector<Cell> cells;
  bool depth_capped = false;  // some branch hit max_depth before stopping
  std::size_t max_word_length = 0;
  std::uint64_t cylinders = 0;

  double total_mass() const;
};

struct RasterOptions {
  std::size_t max_depth = 64;
  std::uint64_t budget = kDefaultWordBudget;  // cap on stopped cylinders
};

/// Stops each branch at the shortest w with α₁(w)·R ≤ δ (R the invariant-ball
/// radius) and deposits μ[w] in the cell holding cylinder_point(w).
GridMeasure rasterize(const Ifs& ifs, const WeightModel& weights, double delta, const RasterOptions& opts = {});

/// Σ μ(Q)^q over occupied cells; q = 0 counts them.
double moment_sum(const GridMeasure& grid, double q);
/// Σ μ(Q) log μ(Q).
double entropy_sum(const GridMeasure& grid);

struct LqFit {
  double q = 0.0;
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::size_t points = 0;
};

struct LqSpectrum {
  std::vector<double> qs;
  std::vector<double> deltas;
  /// moments[i][j]: M^{q_i}_{δ_j}, or Σ μ log μ when q_i = 1.
  std::vector<std::vector<double>> moments;
  std::vector<bool> depth_capped;  // per δ
  std::vector<bool> used;  // per δ, included in the regression
  std::vector<LqFit> fits;  // per q
};

struct LqOptions {
  bool drop_largest = true;
  RasterOptions raster;
};

/// Slope of log M^q_δ against (q−1) log δ (q ≠ 1) or of Σ μ log μ against log δ (q = 1).
LqSpectrum lq_spectrum(const Ifs& ifs, const WeightModel& weights, std::span<const double> qs,
                       std::span<const double> deltas, const LqOptions& opts = {});

/// Least-squares line through (x, y); R² = 1 when y is constant.
LqFit fit_line(std::span<const double> x, std::span<const double> y);

enum class Stability { Stable, Diverging, Inconclusive };

struct EnergyStep {
  double resolution = 0.0;
  double mean_depth = 0.0;
  double estimate = 0.0;
  double standard_error = 0.0;
};

struct EnergyReport {
  double s = 0.0;
  double q = 0.0;
  std::vector<EnergyStep> schedule;
  Stability flag = Stability::Inconclusive;
  std::uint64_t draws = 0;
  std::uint64_t rejections = 0;
  bool rejection_warning = false;  // rejections above 1% of draws
};

struct EnergyOptions {
  double delta0 = 0x1p-8;  // step j resolves to δ₀^{2^j}
  std::size_t steps = 5;
  std::size_t tail = 8;  // letters past the finest stopping depth
  std::size_t max_depth = 512;
};

/// Nested Monte Carlo for E_y[(E_x |x−y|^{−s})^{q−1}], stratified by the
/// length of the common prefix of x and y. n_inner draws per stratum.
/// Bit-identical for a fixed seed whatever the worker count.
EnergyReport energy_mc(const Ifs& ifs, const WeightModel& weights, double s, double q, std::size_t n_outer,
                       std::size_t n_inner, std::uint64_t seed, const EnergyOptions& opts = {});

/// Flag for a sequence of estimates from successive doublings.
Stability classify_energy(std::span<const double> estimates);

struct RCurve {
  std::vector<double> angles;
  /// partial[n][k]: Σ_{m ≤ n} Σ_{|w|=m} μ[w]^q λ_w(θ_k)^{−s(q−1)}.
  std::vector<std::vector<double>> partial;
  std::vector<double> max_per_level;
  double last_relative_increment = 0.0;
  bool saturating = false;  // last increment below 1% of the curve
  bool growing = false;  // last increments strictly increasing
};

RCurve r_diagnostic(const Ifs& ifs, const WeightModel& weights, double s, double q, std::size_t depth,
                    std::size_t n_angles, std::uint64_t budget = kDefaultWordBudget);

std::string to_string(Stability s);

}  // namespace lqdim

#endif  // LQDIM_EMPIRICAL_HPP
