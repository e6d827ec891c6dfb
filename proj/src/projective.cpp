#include "lqdim/projective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

namespace lqdim {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = std::numbers::pi / 2;

bool all_positive(const Ifs& ifs) {
  for (const auto& m : ifs)
    if (!(m.normalized_linear().array() > 0).all()) return false;
  return true;
}

bool all_diagonal(const Ifs& ifs) {
  for (const auto& m : ifs) {
    const auto& a = m.normalized_linear();
    if (a(0, 1) != 0 || a(1, 0) != 0) return false;
  }
  return true;
}

std::uint64_t exact_root_or_zero(std::uint64_t value, std::size_t n) {
  const double r = std::round(std::pow(static_cast<double>(value), 1.0 / static_cast<double>(n)));
  std::uint64_t p = 1;
  for (std::size_t i = 0; i < n; ++i) p *= static_cast<std::uint64_t>(r);
  return p == value ? static_cast<std::uint64_t>(r) : 0;
}

double nth_root(std::uint64_t value, std::size_t n) {
  if (auto r = exact_root_or_zero(value, n)) return static_cast<double>(r);
  return std::pow(static_cast<double>(value), 1.0 / static_cast<double>(n));
}

}  // namespace

Arc::Arc(double lo_lift, double hi_lift) : lo_(lo_lift), length_(hi_lift - lo_lift) {
  if (!std::isfinite(lo_lift) || !std::isfinite(hi_lift)) throw InputError("arc endpoints must be finite");
  if (length_ < 0 || length_ >= kPi) throw InputError("arc length must lie in [0, π)");
  lo_ -= kPi * std::floor((lo_ + kHalfPi) / kPi);
  if (lo_ >= kHalfPi) lo_ -= kPi;
  if (lo_ < -kHalfPi) lo_ += kPi;
}

Arc Arc::negative_quadrant() { return Arc(-kHalfPi, 0.0); }
Arc Arc::positive_quadrant() { return Arc(0.0, kHalfPi); }

bool Arc::contains(Angle theta, double tol) const {
  double offset = theta.radians() - lo_;
  offset -= kPi * std::floor(offset / kPi);
  return offset <= length_ + tol || offset >= kPi - tol;
}

bool Arc::contains(const Arc& other, double tol) const {
  double offset = other.lo_ - lo_;
  offset -= kPi * std::floor(offset / kPi);
  if (offset >= kPi - tol) offset -= kPi;
  return offset >= -tol && offset + other.length_ <= length_ + tol;
}

double arc_gap(const Arc& a, const Arc& b) {
  double delta = b.lo_ - a.lo_;
  delta -= kPi * std::floor(delta / kPi);
  if (delta <= a.length_ || kPi - delta <= b.length_) return 0.0;
  return std::min(delta - a.length_, kPi - delta - b.length_);
}

std::size_t max_overlap(std::span<const Arc> arcs) {
  // Sweep over [-π/2, π/2], where the two ends are the same point of ℝP¹.
  std::vector<std::pair<double, int>> events;
  events.reserve(4 * arcs.size());
  auto add = [&](double lo, double hi) {
    events.emplace_back(lo, +1);
    events.emplace_back(hi, -1);
  };
  for (const Arc& arc : arcs) {
    const double lo = arc.lo_lift();
    const double hi = arc.hi_lift();
    if (hi > kHalfPi) {
      add(lo, kHalfPi);
      add(-kHalfPi, hi - kPi);
    } else {
      add(lo, hi);
      if (hi == kHalfPi) add(-kHalfPi, -kHalfPi);
    }
    if (lo == -kHalfPi) add(kHalfPi, kHalfPi);
  }
  std::sort(events.begin(), events.end(), [](const auto& x, const auto& y) {
    return x.first < y.first || (x.first == y.first && x.second > y.second);
  });
  std::size_t best = 0;
  long depth = 0;
  for (const auto& [pos, delta] : events) {
    depth += delta;
    best = std::max(best, static_cast<std::size_t>(std::max(depth, 0L)));
  }
  return best;
}

std::vector<Arc> first_level_arcs(const Ifs& ifs) {
  std::vector<Arc> arcs;
  arcs.reserve(ifs.size());
  for (const auto& m : ifs) arcs.push_back(proj_image(m.normalized_linear(), Arc::negative_quadrant()));
  return arcs;
}

ProjectiveSeparation projective_separation(const Ifs& ifs) {
  const auto arcs = first_level_arcs(ifs);
  ProjectiveSeparation out{true, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < arcs.size(); ++i)
    for (std::size_t j = i + 1; j < arcs.size(); ++j) out.gap = std::min(out.gap, arc_gap(arcs[i], arcs[j]));
  out.separated = out.gap > 0;
  return out;
}

namespace {

// Level n+1 from level n: the new letter acts on the outside.
std::vector<Arc> next_level(const Ifs& ifs, const std::vector<Arc>& current) {
  const std::size_t n = ifs.size();
  std::vector<Arc> next(current.size() * n, Arc::negative_quadrant());
  constexpr std::size_t chunk = 4096;
  const std::size_t tasks = (current.size() + chunk - 1) / chunk;
  parallel_for(tasks, [&](std::size_t t) {
    const std::size_t end = std::min(current.size(), (t + 1) * chunk);
    for (std::size_t i = t * chunk; i < end; ++i)
      for (std::size_t j = 0; j < n; ++j)
        next[i * n + j] = proj_image(ifs[static_cast<Symbol>(j)].normalized_linear(), current[i]);
  });
  return next;
}

}  // namespace

std::vector<Arc> level_arcs(const Ifs& ifs, std::size_t depth) {
  std::vector<Arc> arcs{Arc::negative_quadrant()};
  for (std::size_t k = 0; k < depth; ++k) arcs = next_level(ifs, arcs);
  return arcs;
}

GammaReport gamma_bound(const Ifs& ifs, std::size_t max_depth, std::uint64_t budget) {
  if (max_depth < 1) throw InputError("gamma_bound needs max_depth >= 1");
  if (!all_positive(ifs) && !all_diagonal(ifs))
    throw DomainError("gamma_bound supports strictly positive or diagonal linear parts only");

  GammaReport report;
  report.separated = projective_separation(ifs).separated;
  report.certified_upper = std::numeric_limits<double>::infinity();

  std::vector<Arc> arcs{Arc::negative_quadrant()};
  for (std::size_t n = 1; n <= max_depth; ++n) {
    if (word_count(ifs.size(), n) > budget) {
      if (report.per_level.empty()) report.certified_upper = static_cast<double>(ifs.size());
      throw GammaBudgetError("gamma_bound: level " + std::to_string(n) + " exceeds the enumeration budget",
                             report);
    }
    arcs = next_level(ifs, arcs);
    GammaLevel level;
    level.depth = n;
    level.max_overlap = max_overlap(arcs);
    level.gamma_hat = nth_root(level.max_overlap, n);
    double shortest = std::numeric_limits<double>::infinity();
    for (const Arc& a : arcs) shortest = std::min(shortest, a.length());
    level.resolved = shortest > kArcResolution;
    report.per_level.push_back(level);
    report.certified_upper = std::min(report.certified_upper, level.gamma_hat);

    for (std::size_t m = 1; m < n; ++m) {
      const auto& a = report.per_level[m - 1];
      const auto& b = report.per_level[n - m - 1];
      if (level.resolved && level.max_overlap > a.max_overlap * b.max_overlap) report.submultiplicative = false;
    }
  }
  return report;
}

}  // namespace lqdim
