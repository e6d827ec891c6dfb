#include "lqdim/dimension.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "lqdim/parallel.hpp"

namespace lqdim {

namespace {

constexpr std::size_t kChunk = 1 << 14;

template <typename Term>
double log_sum_exp_indexed(std::size_t n, Term&& term) {
  if (n == 0) return -std::numeric_limits<double>::infinity();
  const std::size_t tasks = (n + kChunk - 1) / kChunk;
  std::vector<double> chunk_max(tasks, -std::numeric_limits<double>::infinity());
  parallel_for(tasks, [&](std::size_t t) {
    const std::size_t end = std::min(n, (t + 1) * kChunk);
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = t * kChunk; i < end; ++i) m = std::max(m, term(i));
    chunk_max[t] = m;
  });
  const double shift = *std::max_element(chunk_max.begin(), chunk_max.end());
  if (!std::isfinite(shift)) return shift;

  std::vector<double> partial(tasks, 0.0);
  parallel_for(tasks, [&](std::size_t t) {
    const std::size_t end = std::min(n, (t + 1) * kChunk);
    CompensatedSum sum;
    for (std::size_t i = t * kChunk; i < end; ++i) sum.add(std::exp(term(i) - shift));
    partial[t] = sum.value();
  });
  CompensatedSum total;
  for (double p : partial) total.add(p);
  return shift + std::log(total.value());
}

// Online log-sum-exp accumulator: value = log(sum) + shift.
struct LogSum {
  double shift = -std::numeric_limits<double>::infinity();
  CompensatedSum sum;

  void add(double x) {
    if (x > shift) {
      CompensatedSum rescaled;
      rescaled.add(sum.value() * std::exp(shift - x));
      rescaled.add(1.0);
      sum = rescaled;
      shift = x;
    } else {
      sum.add(std::exp(x - shift));
    }
  }
  void merge(const LogSum& o) {
    if (!std::isfinite(o.shift)) return;
    if (o.shift > shift) {
      CompensatedSum rescaled;
      rescaled.add(sum.value() * std::exp(shift - o.shift));
      rescaled.add(o.sum.value());
      sum = rescaled;
      shift = o.shift;
    } else {
      sum.add(o.sum.value() * std::exp(o.shift - shift));
    }
  }
  double value() const { return shift + std::log(sum.value()); }
};

// log Σ_{|w|=length} φ^d(w) without storing the level.
double streamed_log_svf_sum(const Ifs& ifs, std::size_t length, double d) {
  const std::size_t n = ifs.size();
  const std::uint64_t per_subtree = word_count(n, length - split_depth(n, length));
  std::vector<LogSum> parts(word_count(n, split_depth(n, length)));
  for_each_word(ifs, length, [&](std::uint64_t index, const Map& m) {
    parts[index / per_subtree].add(log_svf(m.singular_values(), d));
  });
  LogSum total;
  for (const auto& p : parts) total.merge(p);
  return total.value();
}

double log_svf_at(const LevelTable& t, std::size_t i, double s) {
  return s <= 1 ? s * t.log_alpha1[i] : t.log_alpha1[i] + (s - 1) * t.log_alpha2[i];
}

// Largest s in [lo, hi] with f(s) > 0 for a decreasing f, to within tol.
struct Bracket {
  double lo;
  double hi;
};

template <typename F>
Bracket bisect_decreasing(F&& f, double lo, double hi, double tol) {
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0)
      lo = mid;
    else
      hi = mid;
  }
  return {lo, hi};
}

void check_tolerance(double tol) {
  if (!(tol > 0)) throw InputError("tolerance must be positive");
}

}  // namespace

LevelTable level_table(const Ifs& ifs, std::size_t length, std::uint64_t budget) {
  if (length < 1) throw InputError("level tables need length >= 1");
  check_budget(ifs.size(), length, budget, "level_table");
  LevelTable t;
  t.alphabet = ifs.size();
  t.length = length;
  const std::size_t n = word_count(ifs.size(), length);
  t.log_alpha1.resize(n);
  t.log_alpha2.resize(n);
  for_each_word(ifs, length, [&](std::uint64_t index, const Map& m) {
    const auto sv = m.singular_values();
    t.log_alpha1[index] = sv.log_alpha1;
    t.log_alpha2[index] = sv.log_alpha2;
  });
  return t;
}

double log_sum_exp(std::span<const double> terms) {
  return log_sum_exp_indexed(terms.size(), [&](std::size_t i) { return terms[i]; });
}

// ---------------------------------------------------------------------------
// Weight models

WeightModel WeightModel::bernoulli(std::vector<double> p) {
  if (p.empty()) throw InputError("probability vector is empty");
  double total = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0) || !std::isfinite(p[i]))
      throw InputError("probability " + std::to_string(i) + " must be positive and finite");
    total += p[i];
  }
  if (std::fabs(total - 1.0) > 1e-12) throw InputError("probabilities must sum to 1");
  WeightModel w;
  w.kind_ = Kind::Bernoulli;
  w.log_p_.resize(p.size());
  std::transform(p.begin(), p.end(), w.log_p_.begin(), [](double x) { return std::log(x); });
  w.alphabet_ = p.size();
  w.p_ = std::move(p);
  w.depth_ = std::numeric_limits<std::size_t>::max();
  return w;
}

WeightModel WeightModel::kaenmaki(const Ifs& ifs, double d, std::size_t depth, std::uint64_t budget) {
  if (!(d > 0 && d <= 2)) throw InputError("Käenmäki exponent must lie in (0, 2]");
  check_budget(ifs.size(), depth, budget, "kaenmaki_weights");
  WeightModel w;
  w.kind_ = Kind::KaenmakiApprox;
  w.d_ = d;
  w.depth_ = depth;
  w.ifs_ = ifs;
  w.alphabet_ = ifs.size();
  w.log_z_.assign(depth + 1, 0.0);
  for (std::size_t len = 1; len <= depth; ++len) w.log_z_[len] = streamed_log_svf_sum(ifs, len, d);
  return w;
}

double WeightModel::log_normalizer(std::size_t length) const {
  if (kind_ == Kind::Bernoulli) return 0.0;
  if (length > depth_) throw InputError("word longer than the weight model depth");
  return log_z_[length];
}

double WeightModel::log_mass(const Word& w) const {
  if (kind_ == Kind::Bernoulli) {
    w.validate(p_.size());
    double s = 0;
    for (Symbol c : w) s += log_p_[c];
    return s;
  }
  if (w.size() > depth_) throw InputError("word longer than the weight model depth");
  if (w.empty()) return 0.0;
  return log_svf(compose(*ifs_, w).singular_values(), d_) - log_z_[w.size()];
}

double WeightModel::mass(const Word& w) const {
  if (kind_ == Kind::Bernoulli) {
    w.validate(p_.size());
    double m = 1;
    for (Symbol c : w) m *= p_[c];
    return m;
  }
  return std::exp(log_mass(w));
}

std::vector<double> WeightModel::log_masses(const LevelTable& table) const {
  std::vector<double> out(table.size());
  if (kind_ == Kind::Bernoulli) {
    if (table.alphabet != p_.size()) throw InputError("probability vector length does not match the IFS");
    for (std::size_t i = 0; i < out.size(); ++i) {
      std::uint64_t index = i;
      double s = 0;
      for (std::size_t k = 0; k < table.length; ++k) {
        s += log_p_[index % table.alphabet];
        index /= table.alphabet;
      }
      out[i] = s;
    }
    return out;
  }
  if (table.length > depth_) throw InputError("weights are not defined at the table depth");
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = log_svf_at(table, i, d_) - log_z_[table.length];
  return out;
}

// ---------------------------------------------------------------------------
// Pressure and roots

double pressure(const LevelTable& table, double s) {
  if (!(s >= 0 && s <= 2)) throw InputError("pressure exponent must lie in [0, 2]");
  return log_sum_exp_indexed(table.size(), [&](std::size_t i) { return log_svf_at(table, i, s); }) /
         static_cast<double>(table.length);
}

double pressure(const Ifs& ifs, double s, std::size_t k, std::uint64_t budget) {
  return pressure(level_table(ifs, k, budget), s);
}

DimensionEstimate affinity_dim(const Ifs& ifs, const LevelTable& table, double tol) {
  check_tolerance(tol);
  DimensionEstimate est;
  est.depth = table.length;
  est.tolerance = tol;
  auto p = [&](double s) { return pressure(table, s); };

  if (p(0.0) <= 0) return est;
  if (p(2.0) > 0) {
    est.value = est.lower_heuristic = est.upper_certified = 2.0;
    est.converged = false;
    return est;
  }
  const Bracket b = bisect_decreasing(p, 0.0, 2.0, tol);
  est.value = 0.5 * (b.lo + b.hi);
  est.upper_certified = b.hi;

  // Heuristic lower bracket: the smallest sampled quasi-multiplicativity ratio
  // κ = φ^s(vw)/(φ^s(v)φ^s(w)) at level k lowers the root of P_k + log κ / k.
  const double s = est.value;
  std::mt19937_64 rng(0x5eed5eedULL);
  std::uniform_int_distribution<std::uint64_t> pick(0, table.size() - 1);
  double log_kappa = 0.0;
  for (int i = 0; i < 256; ++i) {
    const std::uint64_t a = pick(rng), c = pick(rng);
    const Word v = Word::from_index(a, table.length, table.alphabet);
    const Word w = Word::from_index(c, table.length, table.alphabet);
    const double joint = log_svf((compose(ifs, v) * compose(ifs, w)).singular_values(), s);
    log_kappa = std::min(log_kappa, joint - log_svf_at(table, a, s) - log_svf_at(table, c, s));
  }
  const double shift = log_kappa / static_cast<double>(table.length);
  auto lowered = [&](double x) { return p(x) + shift; };
  if (lowered(0.0) <= 0)
    est.lower_heuristic = 0.0;
  else
    est.lower_heuristic = std::min(est.value, bisect_decreasing(lowered, 0.0, est.value, tol).lo);
  return est;
}

DimensionEstimate affinity_dim(const Ifs& ifs, std::size_t k, double tol, std::uint64_t budget) {
  return affinity_dim(ifs, level_table(ifs, k, budget), tol);
}

double moment_pressure(const LevelTable& table, std::span<const double> log_masses, double q, double s) {
  if (log_masses.size() != table.size()) throw InputError("mass table does not match the level table");
  return log_sum_exp_indexed(table.size(),
                             [&](std::size_t i) {
                               return (1 - q) * log_svf_at(table, i, s) + q * log_masses[i];
                             }) /
         static_cast<double>(table.length);
}

DimensionEstimate lq_exponent(const LevelTable& table, std::span<const double> log_masses, double q,
                              double tol) {
  if (!(q > 1)) throw InputError("the moment exponent needs q > 1");
  check_tolerance(tol);
  DimensionEstimate est;
  est.depth = table.length;
  est.tolerance = tol;
  // G is increasing in s; bisect on -G.
  auto neg_g = [&](double s) { return -moment_pressure(table, log_masses, q, s); };
  if (neg_g(0.0) <= 0) return est;
  if (neg_g(2.0) > 0) {
    est.value = est.lower_heuristic = est.upper_certified = 2.0;
    est.converged = false;
    return est;
  }
  const Bracket b = bisect_decreasing(neg_g, 0.0, 2.0, tol);
  est.value = 0.5 * (b.lo + b.hi);
  est.lower_heuristic = b.lo;
  est.upper_certified = b.hi;
  return est;
}

DimensionEstimate lq_exponent(const Ifs& ifs, const WeightModel& weights, double q, std::size_t k, double tol,
                              std::uint64_t budget) {
  if (k > weights.depth()) throw InputError("weights are not defined at depth " + std::to_string(k));
  const LevelTable table = level_table(ifs, k, budget);
  const auto masses = weights.log_masses(table);
  return lq_exponent(table, masses, q, tol);
}

double quasi_bernoulli_constant(const WeightModel& weights, std::size_t depth) {
  if (weights.kind() == WeightModel::Kind::Bernoulli) return 1.0;  // exact product law
  depth = std::min(depth, weights.depth());
  if (depth < 2) return 1.0;
  const std::size_t n = weights.alphabet();

  std::mt19937_64 rng(0xC2C2C2C2ULL);
  double worst = 0.0;
  for (std::size_t total = 2; total <= depth; ++total) {
    std::uniform_int_distribution<std::size_t> split(1, total - 1);
    std::uniform_int_distribution<Symbol> letter(0, static_cast<Symbol>(n - 1));
    for (int i = 0; i < 64; ++i) {
      const std::size_t m = split(rng);
      std::vector<Symbol> v(m), w(total - m);
      for (auto& c : v) c = letter(rng);
      for (auto& c : w) c = letter(rng);
      const Word wv(v), ww(w);
      const double r = weights.log_mass(wv + ww) - weights.log_mass(wv) - weights.log_mass(ww);
      worst = std::max(worst, std::fabs(r));
    }
  }
  return std::exp(worst);
}

std::size_t default_depth(std::size_t alphabet) {
  if (alphabet <= 3) return 12;
  if (alphabet <= 6) return 8;
  std::size_t k = 1;
  while (word_count(alphabet, k + 1) <= 2'000'000) ++k;
  return k;
}

}  // namespace lqdim
