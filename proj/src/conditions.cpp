#include "lqdim/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "lqdim/parallel.hpp"

namespace lqdim {

std::string Threshold::to_string() const {
  switch (kind_) {
    case Kind::Infinite:
      return "inf";
    case Kind::NoneBelow2:
      return "none below 2";
    case Kind::Finite:
      break;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", value_);
  return buf;
}

std::string to_string(CertStatus s) { return s == CertStatus::Certified ? "certified" : "undetermined"; }

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds:
      return "holds";
    case Verdict::Fails:
      return "fails";
    case Verdict::Inconclusive:
      break;
  }
  return "inconclusive";
}

bool check_positivity(const Ifs& ifs) {
  return std::all_of(ifs.begin(), ifs.end(), [](const Map& m) { return (m.linear().array() > 0).all(); });
}

// ---------------------------------------------------------------------------
// Separation

namespace {

struct CoverBall {
  Map map;
  double radius;
};

class SeparationSearch {
 public:
  SeparationSearch(const Ifs& ifs, double big_r, std::size_t depth, std::uint64_t budget)
      : ifs_(ifs), big_r_(big_r), depth_(depth), budget_(budget) {}

  double run(Symbol i, Symbol j) {
    best_ = std::numeric_limits<double>::infinity();
    descend(ball(ifs_[i]), ball(ifs_[j]), 1);
    return best_;
  }

 private:
  CoverBall ball(const Map& m) const { return {m, m.singular_values().alpha1 * big_r_}; }

  static double gap(const CoverBall& u, const CoverBall& v) {
    return (u.map.translation() - v.map.translation()).norm() - u.radius - v.radius;
  }

  // Child balls nest inside their parents, so a pair's gap bounds every
  // descendant pair's gap from below.
  void descend(const CoverBall& u, const CoverBall& v, std::size_t level) {
    if (best_ <= 0) return;
    const double g = gap(u, v);
    if (g >= best_) return;
    if (level == depth_) {
      best_ = g;
      return;
    }
    if (++visited_ > budget_) throw ResourceError("check_separation: pair budget exhausted");
    const std::size_t n = ifs_.size();
    std::vector<CoverBall> cu, cv;
    cu.reserve(n);
    cv.reserve(n);
    for (const Map& m : ifs_) {
      cu.push_back(ball(u.map * m));
      cv.push_back(ball(v.map * m));
    }
    std::vector<std::pair<double, std::size_t>> order;
    order.reserve(n * n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) order.emplace_back(gap(cu[a], cv[b]), a * n + b);
    std::sort(order.begin(), order.end());
    for (const auto& [g2, idx] : order) descend(cu[idx / n], cv[idx % n], level + 1);
  }

  const Ifs& ifs_;
  double big_r_;
  std::size_t depth_;
  std::uint64_t budget_;
  std::uint64_t visited_ = 0;
  double best_ = 0.0;
};

}  // namespace

SeparationCertificate check_separation(const Ifs& ifs, std::size_t depth, std::uint64_t budget) {
  if (depth < 1) throw InputError("separation depth must be at least 1");
  SeparationCertificate cert;
  cert.depth = depth;
  const std::size_t n = ifs.size();
  if (n == 1) {
    cert.status = CertStatus::Certified;
    cert.gap = std::numeric_limits<double>::infinity();
    return cert;
  }
  const double big_r = invariant_ball(ifs).radius;
  std::vector<std::pair<Symbol, Symbol>> pairs;
  for (Symbol i = 0; i < n; ++i)
    for (Symbol j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  std::vector<double> gaps(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t t) {
    SeparationSearch search(ifs, big_r, depth, budget);
    gaps[t] = search.run(pairs[t].first, pairs[t].second);
  });
  const double g = *std::min_element(gaps.begin(), gaps.end());
  if (g > 0) {
    cert.status = CertStatus::Certified;
    cert.gap = g;
  }
  return cert;
}

// ---------------------------------------------------------------------------
// Bunching

namespace {

void check_common(double gamma, double q) {
  if (!(gamma >= 1) || !std::isfinite(gamma)) throw InputError("gamma must be a finite value >= 1");
  if (!(q >= 2) || !std::isfinite(q)) throw InputError("q must be finite and >= 2");
}

MarginReport summarize(std::vector<double> margins) {
  MarginReport r;
  r.pass = std::all_of(margins.begin(), margins.end(), [](double m) { return m > kStrictSlack; });
  r.margins = std::move(margins);
  return r;
}

}  // namespace

MarginReport check_bunching(const Ifs& ifs, double gamma, double d, double q) {
  check_common(gamma, q);
  if (!(d > 0 && d <= 2)) throw InputError("d must lie in (0, 2]");
  std::vector<double> margins;
  for (const Map& m : ifs) {
    const auto sv = m.singular_values();
    margins.push_back((q - 1) * d * sv.log_alpha2 - q * d * sv.log_alpha1 - std::log(gamma));
  }
  return summarize(std::move(margins));
}

MarginReport check_metric_bunching(const Ifs& ifs, double gamma, double dq, std::span<const double> p, double q) {
  check_common(gamma, q);
  if (p.size() != ifs.size()) throw InputError("probability vector length does not match the IFS");
  if (!(dq >= 0 && dq <= 2)) throw InputError("d(q) must lie in [0, 2]");
  std::vector<double> margins;
  for (std::size_t i = 0; i < ifs.size(); ++i) {
    if (!(p[i] > 0)) throw InputError("probabilities must be positive");
    margins.push_back((q - 1) * dq * ifs[static_cast<Symbol>(i)].singular_values().log_alpha2 -
                      q * std::log(p[i]) - std::log(gamma));
  }
  return summarize(std::move(margins));
}

Threshold q0_bunching(const Ifs& ifs, double gamma, double d) {
  check_common(gamma, 2.0);
  if (!(d > 0 && d <= 2)) throw InputError("d must lie in (0, 2]");
  // Margin(q) = (−d ln α₂ − ln γ) − q·d·ln(α₁/α₂), affine and non-increasing in q.
  double q0 = std::numeric_limits<double>::infinity();
  for (const Map& m : ifs) {
    const auto sv = m.singular_values();
    const double num = -d * sv.log_alpha2 - std::log(gamma);
    const double den = d * (sv.log_alpha1 - sv.log_alpha2);
    if (den <= 1e-12) {
      if (!(num > kStrictSlack)) return Threshold::none_below_2();
      continue;  // conformal: holds for every q
    }
    q0 = std::min(q0, num / den);
  }
  if (std::isinf(q0)) return Threshold::infinite();
  if (q0 <= 2) return Threshold::none_below_2();
  return Threshold::finite(q0);
}

Threshold scan_threshold(const std::function<bool(double)>& holds, double tol, double step, double cap) {
  if (!(tol > 0) || !(step > 0)) throw InputError("scan tolerance and step must be positive");
  if (!holds(2.0)) return Threshold::none_below_2();
  double q = 2.0;
  while (q < cap) {
    const double next = std::min(q + step, cap);
    if (!holds(next)) {
      double lo = q, hi = next;
      while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (holds(mid) ? lo : hi) = mid;
      }
      return Threshold::finite(0.5 * (lo + hi));
    }
    q = next;
  }
  return Threshold::infinite();
}

Threshold q0_bunching_scan(const Ifs& ifs, double gamma, double d, double tol) {
  return scan_threshold([&](double q) { return check_bunching(ifs, gamma, d, q).pass; }, tol);
}

Threshold q0_metric_bunching(const Ifs& ifs, double gamma, std::span<const double> p, std::size_t k, double tol,
                             std::uint64_t budget) {
  const WeightModel weights = bernoulli_weights(std::vector<double>(p.begin(), p.end()));
  const LevelTable table = level_table(ifs, k, budget);
  const auto masses = weights.log_masses(table);
  const double inner_tol = std::min(tol, 1e-9);
  return scan_threshold(
      [&](double q) {
        const double dq = lq_exponent(table, masses, q, inner_tol).value;
        return check_metric_bunching(ifs, gamma, dq, p, q).pass;
      },
      tol, 0.25);
}

Prop3Result prop3_check(const Ifs& ifs, double gamma, double d2, double d) {
  check_common(gamma, 2.0);
  if (!(d2 >= 0 && d2 <= 2) || !(d >= 0 && d <= 2)) throw InputError("exponents must lie in [0, 2]");
  Prop3Result r;
  CompensatedSum cond, a2, a1d2, a1d;
  for (const Map& m : ifs) {
    const auto sv = m.singular_values();
    cond.add(std::exp(0.5 * (d2 * sv.log_alpha2 - std::log(gamma))));
    a2.add(std::exp(0.5 * d2 * sv.log_alpha2));
    a1d2.add(std::exp(d2 * sv.log_alpha1));
    a1d.add(std::exp(d * sv.log_alpha1));
  }
  r.condition_sum = cond.value();
  r.alpha2_half_sum = a2.value();
  r.alpha1_d2_sum = a1d2.value();
  r.alpha1_d_sum = a1d.value();
  r.exists = std::log(r.condition_sum) > kStrictSlack;
  return r;
}

}  // namespace lqdim
