#include "lqdim/empirical.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <random>

#include "lqdim/parallel.hpp"

namespace lqdim {

std::string to_string(Stability s) {
  switch (s) {
    case Stability::Stable:
      return "stable";
    case Stability::Diverging:
      return "diverging";
    case Stability::Inconclusive:
      break;
  }
  return "inconclusive";
}

double GridMeasure::total_mass() const {
  CompensatedSum t;
  for (const auto& c : cells) t.add(c.mass);
  return t.value();
}

// ---------------------------------------------------------------------------
// Rasterization

namespace {

struct RasterNode {
  Map map;
  double log_weight;  // log μ[w] (Bernoulli) or log φ^d(w) (Käenmäki)
  std::size_t length;
};

struct Deposit {
  std::int64_t x, y;
  double weight;
};

bool cell_less(const Deposit& a, const Deposit& b) { return a.x != b.x ? a.x < b.x : a.y < b.y; }

class Rasterizer {
 public:
  Rasterizer(const Ifs& ifs, const WeightModel& weights, double delta, const RasterOptions& opts)
      : ifs_(ifs), weights_(weights), delta_(delta), opts_(opts) {
    const double r = invariant_ball(ifs).radius;
    log_stop_ = r > 0 ? std::log(delta) - std::log(r) : std::numeric_limits<double>::infinity();
    kaenmaki_ = weights.kind() == WeightModel::Kind::KaenmakiApprox;
    if (!kaenmaki_ && weights.alphabet() != ifs.size())
      throw InputError("probability vector length does not match the IFS");
    // φ^d at a stopped word is about (δ/R)^d; shifting by it keeps exp() in range.
    shift_ = kaenmaki_ && std::isfinite(log_stop_) ? weights.exponent() * log_stop_ : 0.0;
  }

  GridMeasure run() {
    std::vector<RasterNode> frontier;
    for (Symbol i = 0; i < ifs_.size(); ++i) frontier.push_back(child(nullptr, i));
    // Fixed split: expand until there are enough independent subtrees.
    while (frontier.size() < 64) {
      std::vector<RasterNode> next;
      bool grew = false;
      for (const auto& node : frontier) {
        if (stopped(node)) {
          next.push_back(node);
          continue;
        }
        grew = true;
        for (Symbol i = 0; i < ifs_.size(); ++i) next.push_back(child(&node, i));
      }
      frontier = std::move(next);
      if (!grew) break;
    }

    std::vector<std::vector<Cell>> parts(frontier.size());
    std::vector<std::size_t> max_len(frontier.size(), 0);
    std::vector<char> capped(frontier.size(), 0);
    parallel_for(frontier.size(), [&](std::size_t t) {
      std::vector<Deposit> deposits;
      std::vector<RasterNode> stack{frontier[t]};
      while (!stack.empty()) {
        RasterNode node = std::move(stack.back());
        stack.pop_back();
        if (stopped(node)) {
          if (node.length >= opts_.max_depth && !stop_rule(node)) capped[t] = 1;
          max_len[t] = std::max(max_len[t], node.length);
          deposits.push_back(deposit(node));
          if (++count_ > opts_.budget) throw ResourceError("rasterize: cylinder budget exhausted");
          continue;
        }
        for (Symbol i = static_cast<Symbol>(ifs_.size()); i-- > 0;) stack.push_back(child(&node, i));
      }
      std::stable_sort(deposits.begin(), deposits.end(), cell_less);
      parts[t] = aggregate(deposits);
    });

    GridMeasure grid;
    grid.delta = delta_;
    grid.cylinders = count_;
    std::vector<Deposit> all;
    for (std::size_t t = 0; t < parts.size(); ++t) {
      grid.max_word_length = std::max(grid.max_word_length, max_len[t]);
      grid.depth_capped = grid.depth_capped || capped[t];
      for (const auto& c : parts[t]) all.push_back({c.x, c.y, c.mass});
    }
    std::stable_sort(all.begin(), all.end(), cell_less);
    grid.cells = aggregate(all);
    const double total = grid.total_mass();
    for (auto& c : grid.cells) c.mass /= total;
    return grid;
  }

 private:
  RasterNode child(const RasterNode* parent, Symbol i) const {
    RasterNode out{parent ? parent->map * ifs_[i] : ifs_[i], 0.0, parent ? parent->length + 1 : 1};
    if (kaenmaki_)
      out.log_weight = log_svf(out.map.singular_values(), weights_.exponent());
    else
      out.log_weight = (parent ? parent->log_weight : 0.0) + std::log(weights_.probabilities()[i]);
    return out;
  }

  bool stop_rule(const RasterNode& n) const { return n.map.singular_values().log_alpha1 <= log_stop_; }
  bool stopped(const RasterNode& n) const { return n.length >= opts_.max_depth || stop_rule(n); }

  Deposit deposit(const RasterNode& n) const {
    const Vector2<double> p = n.map.translation();  // T_w(0), the cylinder point
    return {static_cast<std::int64_t>(std::floor(p(0) / delta_ + 1e-9)),
            static_cast<std::int64_t>(std::floor(p(1) / delta_ + 1e-9)), std::exp(n.log_weight - shift_)};
  }

  static std::vector<Cell> aggregate(const std::vector<Deposit>& sorted) {
    std::vector<Cell> out;
    for (std::size_t i = 0; i < sorted.size();) {
      CompensatedSum m;
      std::size_t j = i;
      for (; j < sorted.size() && sorted[j].x == sorted[i].x && sorted[j].y == sorted[i].y; ++j)
        m.add(sorted[j].weight);
      if (m.value() > 0) out.push_back({sorted[i].x, sorted[i].y, m.value()});
      i = j;
    }
    return out;
  }

  const Ifs& ifs_;
  const WeightModel& weights_;
  double delta_;
  RasterOptions opts_;
  double log_stop_;
  double shift_ = 0.0;
  bool kaenmaki_ = false;
  std::atomic<std::uint64_t> count_{0};
};

}  // namespace

GridMeasure rasterize(const Ifs& ifs, const WeightModel& weights, double delta, const RasterOptions& opts) {
  if (!(delta > 0) || !std::isfinite(delta)) throw InputError("mesh size must be positive");
  if (opts.max_depth < 1) throw InputError("max_depth must be at least 1");
  return Rasterizer(ifs, weights, delta, opts).run();
}

double moment_sum(const GridMeasure& grid, double q) {
  if (!(q >= 0)) throw InputError("moment sums need q >= 0");
  if (q == 0) return static_cast<double>(grid.cells.size());
  CompensatedSum s;
  for (const auto& c : grid.cells) s.add(std::pow(c.mass, q));
  return s.value();
}

double entropy_sum(const GridMeasure& grid) {
  CompensatedSum s;
  for (const auto& c : grid.cells) s.add(c.mass * std::log(c.mass));
  return s.value();
}

// ---------------------------------------------------------------------------
// L^q spectrum

LqFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw EstimationError("a line fit needs at least 2 points");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0)) throw EstimationError("a line fit needs distinct abscissae");
  LqFit f;
  f.points = x.size();
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r_squared = syy > 0 ? 1 - ss_res / syy : 1.0;
  return f;
}

LqSpectrum lq_spectrum(const Ifs& ifs, const WeightModel& weights, std::span<const double> qs,
                       std::span<const double> deltas, const LqOptions& opts) {
  if (deltas.size() < 4) throw InputError("lq_spectrum needs at least 4 mesh sizes");
  const double ratio = deltas[1] / deltas[0];
  if (!(ratio > 0 && ratio < 1)) throw InputError("mesh sizes must decrease");
  for (std::size_t j = 1; j < deltas.size(); ++j) {
    if (!(deltas[j] > 0) || std::fabs(deltas[j] / deltas[j - 1] - ratio) > 1e-6 * ratio)
      throw InputError("mesh sizes must form a decreasing geometric sequence");
  }
  if (qs.empty()) throw InputError("lq_spectrum needs at least one q");
  for (double q : qs)
    if (!(q >= 0 && q <= 8)) throw InputError("q values must lie in [0, 8]");

  LqSpectrum out;
  out.qs.assign(qs.begin(), qs.end());
  out.deltas.assign(deltas.begin(), deltas.end());
  out.moments.assign(qs.size(), std::vector<double>(deltas.size()));
  out.depth_capped.assign(deltas.size(), false);
  out.used.assign(deltas.size(), true);
  for (std::size_t j = 0; j < deltas.size(); ++j) {
    const GridMeasure grid = rasterize(ifs, weights, deltas[j], opts.raster);
    out.depth_capped[j] = grid.depth_capped;
    out.used[j] = !grid.depth_capped && !(opts.drop_largest && j == 0);
    for (std::size_t i = 0; i < qs.size(); ++i)
      out.moments[i][j] = qs[i] == 1 ? entropy_sum(grid) : moment_sum(grid, qs[i]);
  }

  for (std::size_t i = 0; i < qs.size(); ++i) {
    std::vector<double> x, y;
    for (std::size_t j = 0; j < deltas.size(); ++j) {
      if (!out.used[j]) continue;
      const double ld = std::log(deltas[j]);
      if (qs[i] == 1) {
        x.push_back(ld);
        y.push_back(out.moments[i][j]);
      } else {
        x.push_back((qs[i] - 1) * ld);
        y.push_back(std::log(out.moments[i][j]));
      }
    }
    if (x.size() < 2) throw EstimationError("fewer than 2 usable mesh sizes");
    LqFit f = fit_line(x, y);
    f.q = qs[i];
    out.fits.push_back(f);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Energy Monte Carlo

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1p-53; }

/// Conditional letter law of the sampling process: Bernoulli letters, or
/// Käenmäki children weighted by φ^d and renormalized at each level.
class LetterLaw {
 public:
  LetterLaw(const Ifs& ifs, const WeightModel& weights) : ifs_(ifs), weights_(weights) {
    kaenmaki_ = weights.kind() == WeightModel::Kind::KaenmakiApprox;
    if (!kaenmaki_ && weights.alphabet() != ifs.size())
      throw InputError("probability vector length does not match the IFS");
  }

  void probs(const Map& prefix, std::vector<double>& out) const {
    const std::size_t n = ifs_.size();
    out.resize(n);
    if (!kaenmaki_) {
      std::copy(weights_.probabilities().begin(), weights_.probabilities().end(), out.begin());
      return;
    }
    double top = -std::numeric_limits<double>::infinity();
    for (Symbol a = 0; a < n; ++a) {
      out[a] = log_svf((prefix * ifs_[a]).singular_values(), weights_.exponent());
      top = std::max(top, out[a]);
    }
    double total = 0;
    for (auto& v : out) total += (v = std::exp(v - top));
    for (auto& v : out) v /= total;
  }

  /// Draws a letter from `p`, never `excluded` (pass n for none).
  static Symbol draw(const std::vector<double>& p, std::size_t excluded, std::mt19937_64& g) {
    double total = 0;
    for (std::size_t a = 0; a < p.size(); ++a)
      if (a != excluded) total += p[a];
    const double u = uniform01(g) * total;
    double acc = 0;
    std::size_t last = 0;
    for (std::size_t a = 0; a < p.size(); ++a) {
      if (a == excluded) continue;
      acc += p[a];
      last = a;
      if (u < acc) return static_cast<Symbol>(a);
    }
    return static_cast<Symbol>(last);
  }

  bool kaenmaki() const { return kaenmaki_; }

 private:
  const Ifs& ifs_;
  const WeightModel& weights_;
  bool kaenmaki_ = false;
};

struct OuterResult {
  std::vector<double> values;  // (inner_j)^{q−1} per schedule step
  std::vector<std::size_t> depths;
  std::uint64_t draws = 0;
  std::uint64_t rejections = 0;
};

}  // namespace

Stability classify_energy(std::span<const double> e) {
  if (e.size() < 2) return Stability::Inconclusive;
  const double last = e[e.size() - 1] / e[e.size() - 2] - 1;
  if (std::fabs(last) < 0.05) return Stability::Stable;
  bool monotone = true;
  for (std::size_t j = 1; j < e.size(); ++j) monotone = monotone && e[j] >= e[j - 1];
  const std::size_t first = e.size() >= 3 ? e.size() - 2 : 1;
  bool fast = true;
  for (std::size_t j = first; j < e.size(); ++j) fast = fast && e[j] > 1.25 * e[j - 1];
  return monotone && fast ? Stability::Diverging : Stability::Inconclusive;
}

EnergyReport energy_mc(const Ifs& ifs, const WeightModel& weights, double s, double q, std::size_t n_outer,
                       std::size_t n_inner, std::uint64_t seed, const EnergyOptions& opts) {
  if (!(s > 0 && s < 2)) throw InputError("energy exponent s must lie in (0, 2)");
  if (!(q >= 2) || !std::isfinite(q)) throw InputError("energy moment q must be finite and >= 2");
  if (n_outer < 2 || n_inner < 1) throw InputError("energy_mc needs n_outer >= 2 and n_inner >= 1");
  if (opts.steps < 1 || !(opts.delta0 > 0 && opts.delta0 < 1)) throw InputError("invalid energy schedule");
  const double big_r = invariant_ball(ifs).radius;
  if (!(big_r > 0)) throw DomainError("the attractor is a single point");

  const LetterLaw law(ifs, weights);
  const std::size_t n = ifs.size();
  const std::size_t steps = opts.steps;
  std::vector<double> log_stop(steps);
  for (std::size_t j = 0; j < steps; ++j)
    log_stop[j] = std::ldexp(std::log(opts.delta0), static_cast<int>(j)) - std::log(big_r);

  std::vector<OuterResult> results(n_outer);
  parallel_for(n_outer, [&](std::size_t i) {
    std::uint64_t state = seed ^ (0xD1B54A32D192ED03ULL * (i + 1));
    std::mt19937_64 rng_y(splitmix64(state)), rng_x(splitmix64(state));
    OuterResult& res = results[i];

    // y's code b, prefix maps P[k] = T_{b|k}, letter laws at each level.
    std::vector<Symbol> b;
    std::vector<Map> prefix{Map::identity()};
    std::vector<std::vector<double>> law_at;
    std::vector<double> log_nu{0.0};
    std::vector<std::size_t> stop_len(steps, 0);
    std::size_t j_next = 0, total_len = 0;
    while (true) {
      const std::size_t k = b.size();
      if (j_next == steps && k >= total_len) break;
      law_at.emplace_back();
      law.probs(prefix[k], law_at.back());
      const Symbol c = LetterLaw::draw(law_at.back(), n, rng_y);
      b.push_back(c);
      prefix.push_back(prefix[k] * ifs[c]);
      log_nu.push_back(log_nu[k] + std::log(law_at.back()[c]));
      if (j_next < steps) {
        const double la1 = prefix.back().singular_values().log_alpha1;
        while (j_next < steps && (la1 <= log_stop[j_next] || k + 1 >= opts.max_depth)) stop_len[j_next++] = k + 1;
        if (j_next == steps) total_len = k + 1 + opts.tail;
      }
    }
    const std::size_t m = b.size();
    const std::size_t strata = stop_len[steps - 1];

    // y'_k = π(σ^k b), truncated at m letters.
    std::vector<Vector2<double>> y_shift(m + 1, Vector2<double>::Zero());
    for (std::size_t k = m; k-- > 0;) y_shift[k] = ifs[b[k]](y_shift[k + 1]);

    std::vector<double> stratum(strata, 0.0);
    std::vector<Symbol> tail;
    std::vector<double> p_tail;
    for (std::size_t k = 0; k < strata; ++k) {
      const auto& p = law_at[k];
      double other = 0;
      for (std::size_t a = 0; a < n; ++a)
        if (a != b[k]) other += p[a];
      if (!(other > 0)) continue;  // a single admissible letter: no x diverges here
      const double log_w = log_nu[k] + std::log(other);
      const Matrix2<double>& lin = prefix[k].normalized_linear();
      CompensatedSum acc;
      for (std::size_t r = 0; r < n_inner; ++r) {
        double term = 0;
        for (int attempt = 0; attempt < 16; ++attempt) {
          ++res.draws;
          const Symbol a = LetterLaw::draw(p, b[k], rng_x);
          tail.clear();
          if (law.kaenmaki()) {
            Map cur = prefix[k] * ifs[a];
            for (std::size_t t = k + 1; t < m; ++t) {
              law.probs(cur, p_tail);
              tail.push_back(LetterLaw::draw(p_tail, n, rng_x));
              cur = cur * ifs[tail.back()];
            }
          } else {
            for (std::size_t t = k + 1; t < m; ++t) tail.push_back(LetterLaw::draw(p, n, rng_x));
          }
          Vector2<double> z = Vector2<double>::Zero();
          for (std::size_t t = tail.size(); t-- > 0;) z = ifs[tail[t]](z);
          const Vector2<double> diff = ifs[a](z) - y_shift[k];
          const double norm = (lin * diff).norm();
          if (!(norm > 0)) {
            ++res.rejections;
            continue;
          }
          term = std::exp(-s * (prefix[k].log_scale() + std::log(norm)));
          break;
        }
        acc.add(term);
      }
      stratum[k] = std::exp(log_w) * acc.value() / static_cast<double>(n_inner);
    }

    res.values.resize(steps);
    res.depths = stop_len;
    CompensatedSum inner;
    std::size_t k = 0;
    for (std::size_t j = 0; j < steps; ++j) {
      for (; k < stop_len[j]; ++k) inner.add(stratum[k]);
      res.values[j] = std::pow(inner.value(), q - 1);
    }
  });

  EnergyReport rep;
  rep.s = s;
  rep.q = q;
  std::vector<double> estimates;
  for (std::size_t j = 0; j < steps; ++j) {
    CompensatedSum sum, depth;
    for (const auto& r : results) {
      sum.add(r.values[j]);
      depth.add(static_cast<double>(r.depths[j]));
    }
    const double mean = sum.value() / static_cast<double>(n_outer);
    CompensatedSum var;
    for (const auto& r : results) var.add((r.values[j] - mean) * (r.values[j] - mean));
    EnergyStep step;
    step.resolution = std::exp(std::ldexp(std::log(opts.delta0), static_cast<int>(j)));
    step.mean_depth = depth.value() / static_cast<double>(n_outer);
    step.estimate = mean;
    step.standard_error = std::sqrt(var.value() / static_cast<double>(n_outer - 1) / static_cast<double>(n_outer));
    rep.schedule.push_back(step);
    estimates.push_back(mean);
  }
  for (const auto& r : results) {
    rep.draws += r.draws;
    rep.rejections += r.rejections;
  }
  rep.rejection_warning = rep.draws > 0 && static_cast<double>(rep.rejections) > 0.01 * static_cast<double>(rep.draws);
  rep.flag = classify_energy(estimates);
  return rep;
}

// ---------------------------------------------------------------------------
// r_s^q(θ) diagnostic

namespace {

struct RNode {
  Matrix2<double> m;  // normalized linear part of A_w
  double log_scale;
  double log_abs_det;
  double log_mu;  // Bernoulli log μ[w]
};

class RAccumulator {
 public:
  RAccumulator(const Ifs& ifs, const WeightModel& weights, double s, double q, std::span<const Vector2<double>> dirs)
      : ifs_(ifs), weights_(weights), s_(s), q_(q), dirs_(dirs) {
    kaenmaki_ = weights.kind() == WeightModel::Kind::KaenmakiApprox;
    if (kaenmaki_) {
      double top = -std::numeric_limits<double>::infinity();
      for (const auto& m : ifs) top = std::max(top, log_svf(m.singular_values(), weights.exponent()));
      level_shift_ = top;
    }
  }

  RNode root() const { return {Matrix2<double>::Identity(), 0.0, 0.0, 0.0}; }

  RNode child(const RNode& parent, Symbol c) const {
    const Map& t = ifs_[c];
    RNode out{parent.m * t.normalized_linear(), parent.log_scale + t.log_scale(),
              parent.log_abs_det + t.log_abs_det(), 0.0};
    if (!kaenmaki_) out.log_mu = parent.log_mu + std::log(weights_.probabilities()[c]);
    const double mx = out.m.cwiseAbs().maxCoeff();
    if (mx < 0x1p-64 || mx > 0x1p64) {
      out.m /= mx;
      out.log_scale += std::log(mx);
    }
    return out;
  }

  /// Adds a level-`len` word's terms. A: Σ μ^q λ^{−s(q−1)} (Käenmäki: with
  /// μ unnormalized and shifted), Z: Σ shifted φ^d.
  void add(const RNode& node, std::size_t len, std::span<CompensatedSum> a, CompensatedSum& z) const {
    double log_mu = node.log_mu;
    if (kaenmaki_) {
      log_mu = log_svf(singular_values(node.m, node.log_scale, node.log_abs_det), weights_.exponent()) -
               static_cast<double>(len) * level_shift_;
      z.add(std::exp(log_mu));
    }
    const double e = -0.5 * s_ * (q_ - 1);
    for (std::size_t k = 0; k < dirs_.size(); ++k) {
      const double n2 = (node.m * dirs_[k]).squaredNorm();
      a[k].add(std::exp(q_ * log_mu - s_ * (q_ - 1) * node.log_scale + e * std::log(n2)));
    }
  }

  bool kaenmaki() const { return kaenmaki_; }

 private:
  const Ifs& ifs_;
  const WeightModel& weights_;
  double s_, q_;
  std::span<const Vector2<double>> dirs_;
  bool kaenmaki_ = false;
  double level_shift_ = 0.0;
};

}  // namespace

RCurve r_diagnostic(const Ifs& ifs, const WeightModel& weights, double s, double q, std::size_t depth,
                    std::size_t n_angles, std::uint64_t budget) {
  if (n_angles < 16) throw InputError("r_diagnostic needs at least 16 angles");
  if (!(s >= 0 && s <= 2)) throw InputError("s must lie in [0, 2]");
  if (!(q > 1)) throw InputError("q must exceed 1");
  if (weights.kind() == WeightModel::Kind::Bernoulli && weights.alphabet() != ifs.size())
    throw InputError("probability vector length does not match the IFS");
  check_budget(ifs.size(), depth, budget, "r_diagnostic");

  RCurve curve;
  std::vector<Vector2<double>> dirs;
  for (std::size_t k = 0; k < n_angles; ++k) {
    const Angle a(-std::numbers::pi / 2 + std::numbers::pi * static_cast<double>(k + 1) / static_cast<double>(n_angles));
    curve.angles.push_back(a.radians());
    dirs.push_back(a.direction());
  }
  const RAccumulator accum(ifs, weights, s, q, dirs);
  const std::size_t n = ifs.size();

  // level_a[ℓ][k], level_z[ℓ]
  std::vector<std::vector<CompensatedSum>> level_a(depth + 1, std::vector<CompensatedSum>(n_angles));
  std::vector<CompensatedSum> level_z(depth + 1);

  const std::size_t p = std::min(depth, split_depth(n, depth));
  // Levels below the split, breadth-first.
  std::vector<RNode> frontier{accum.root()};
  for (std::size_t len = 1; len <= p; ++len) {
    std::vector<RNode> next;
    for (const auto& node : frontier)
      for (Symbol c = 0; c < n; ++c) next.push_back(accum.child(node, c));
    frontier = std::move(next);
    if (len < p)
      for (const auto& node : frontier) accum.add(node, len, level_a[len], level_z[len]);
  }

  if (depth > 0) {
    const std::size_t levels = depth - p + 1;
    std::vector<std::vector<std::vector<CompensatedSum>>> task_a(
        frontier.size(), std::vector<std::vector<CompensatedSum>>(levels, std::vector<CompensatedSum>(n_angles)));
    std::vector<std::vector<CompensatedSum>> task_z(frontier.size(), std::vector<CompensatedSum>(levels));
    parallel_for(frontier.size(), [&](std::size_t t) {
      auto& ta = task_a[t];
      auto& tz = task_z[t];
      auto visit = [&](auto&& self, const RNode& node, std::size_t len) -> void {
        accum.add(node, len, ta[len - p], tz[len - p]);
        if (len == depth) return;
        for (Symbol c = 0; c < n; ++c) self(self, accum.child(node, c), len + 1);
      };
      visit(visit, frontier[t], p);
    });
    for (std::size_t t = 0; t < frontier.size(); ++t) {
      for (std::size_t l = 0; l < levels; ++l) {
        for (std::size_t k = 0; k < n_angles; ++k) level_a[p + l][k].add(task_a[t][l][k].value());
        level_z[p + l].add(task_z[t][l].value());
      }
    }
  }

  curve.partial.assign(depth + 1, std::vector<double>(n_angles, 1.0));  // empty word: μ = λ = 1
  for (std::size_t len = 1; len <= depth; ++len) {
    const double norm = accum.kaenmaki() ? std::pow(level_z[len].value(), q) : 1.0;
    for (std::size_t k = 0; k < n_angles; ++k)
      curve.partial[len][k] = curve.partial[len - 1][k] + level_a[len][k].value() / norm;
  }
  for (const auto& row : curve.partial) curve.max_per_level.push_back(*std::max_element(row.begin(), row.end()));
  if (depth >= 1) {
    const auto& mx = curve.max_per_level;
    curve.last_relative_increment = (mx[depth] - mx[depth - 1]) / mx[depth];
    curve.saturating = curve.last_relative_increment < 0.01;
  }
  if (depth >= 3) {
    const auto& mx = curve.max_per_level;
    const double i1 = mx[depth] - mx[depth - 1], i2 = mx[depth - 1] - mx[depth - 2], i3 = mx[depth - 2] - mx[depth - 3];
    curve.growing = i1 > i2 && i2 > i3;
  }
  return curve;
}

}  // namespace lqdim
