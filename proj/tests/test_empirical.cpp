#include <numbers>

#include "doctest.h"
#include "lqdim/empirical.hpp"
#include "lqdim/fixtures.hpp"
#include "support.hpp"

using namespace lqdim;
using namespace test_support;
using doctest::Approx;

namespace {
const double kMoran = std::log(2.0) / std::log(3.0);

GridMeasure grid_of(std::vector<double> masses) {
  GridMeasure g;
  g.delta = 1;
  for (std::size_t i = 0; i < masses.size(); ++i) g.cells.push_back({static_cast<std::int64_t>(i), 0, masses[i]});
  return g;
}

// E|x−y|^{-1} for x, y uniform on the unit square: 4∬(1−u)(1−v)/|(u,v)|, in
// polar coordinates, where the radial integral is a polynomial.
double lebesgue_inverse_distance() {
  const int n = 20000;
  const double h = (std::numbers::pi / 4) / n;
  double total = 0;
  for (int i = 0; i <= n; ++i) {
    const double t = i * h, c = std::cos(t), s = std::sin(t), rho = 1 / c;
    const double f = rho - rho * rho * (c + s) / 2 + rho * rho * rho * c * s / 3;
    total += f * (i == 0 || i == n ? 1 : (i % 2 ? 4 : 2));
  }
  return 2 * 4 * total * h / 3;  // the two octants are mirror images
}
}  // namespace

TEST_CASE("moment sums") {
  CHECK(moment_sum(grid_of({1.0}), 3.7) == 1.0);
  CHECK(moment_sum(grid_of({0.5, 0.5}), 2) == 0.5);
  CHECK(moment_sum(grid_of({0.5, 0.5}), 0) == 2.0);
  CHECK(moment_sum(grid_of(std::vector<double>(16, 1.0 / 16)), 2) == Approx(1.0 / 16));
  CHECK_THROWS_AS(moment_sum(grid_of({1.0}), -1), InputError);
}

TEST_CASE("rasterize examples") {
  const auto uniform4 = bernoulli_weights({0.25, 0.25, 0.25, 0.25});
  auto g = rasterize(fixtures::lebesgue_square(), uniform4, 0.25);
  REQUIRE(g.cells.size() == 16);
  for (const auto& c : g.cells) CHECK(c.mass == Approx(1.0 / 16).epsilon(1e-14));
  CHECK_FALSE(g.depth_capped);

  g = rasterize(fixtures::lebesgue_square(), uniform4, 1.0 / 64);
  CHECK(g.cells.size() == 4096);

  const auto half = bernoulli_weights({0.5, 0.5});
  g = rasterize(fixtures::cantor_corners(), half, 1.0 / 9);
  REQUIRE(g.cells.size() == 4);
  for (const auto& c : g.cells) {
    CHECK(c.mass == Approx(0.25).epsilon(1e-14));
    CHECK(c.x == c.y);
  }
  g = rasterize(fixtures::cantor_corners(), half, std::pow(3.0, -5));
  CHECK(g.cells.size() == 32);

  CHECK_THROWS_AS(rasterize(fixtures::cantor_corners(), half, 0.0), InputError);
  CHECK_THROWS_AS(rasterize(fixtures::lebesgue_square(), half, 0.1), InputError);
}

TEST_CASE("rasterize conserves mass and flags the depth cap") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 6; ++trial) {
    const Ifs ifs = random_ifs(rng, 3, trial % 2 == 0);
    const auto b = bernoulli_weights({0.2, 0.3, 0.5});
    for (double delta : {0.05, 0.01}) {
      const auto g = rasterize(ifs, b, delta);
      CHECK(g.total_mass() == Approx(1.0).epsilon(1e-9));
      for (const auto& c : g.cells) CHECK(c.mass > 0);
    }
    const double d = affinity_dim(ifs, 8, 1e-6).value;
    if (d > 0) {
      const auto g = rasterize(ifs, kaenmaki_weights(ifs, d, 4), 0.02);
      CHECK(g.total_mass() == Approx(1.0).epsilon(1e-9));
    }
  }
  RasterOptions shallow;
  shallow.max_depth = 3;
  const auto g = rasterize(fixtures::cantor_corners(), bernoulli_weights({0.5, 0.5}), 1e-4, shallow);
  CHECK(g.depth_capped);
  CHECK(g.max_word_length == 3);
}

TEST_CASE("moment sums are log-convex in q") {
  const Ifs pair = fixtures::positive_pair();
  const auto g = rasterize(pair, bernoulli_weights(fixtures::positive_pair_probabilities()), 0x1p-8);
  CHECK(moment_sum(g, 0) == static_cast<double>(g.cells.size()));
  std::vector<double> lm;
  for (int i = 0; i <= 24; ++i) lm.push_back(std::log(moment_sum(g, i * 0.25)));
  for (std::size_t i = 1; i + 1 < lm.size(); ++i) CHECK(lm[i - 1] + lm[i + 1] - 2 * lm[i] >= -1e-9);
}

TEST_CASE("lq spectrum oracles") {
  const std::vector<double> qs{0, 1, 2};
  std::vector<double> deltas;
  for (int k = 3; k <= 8; ++k) deltas.push_back(std::ldexp(1.0, -k));
  auto spec = lq_spectrum(fixtures::lebesgue_square(), bernoulli_weights({0.25, 0.25, 0.25, 0.25}), qs, deltas);
  for (const auto& f : spec.fits) {
    CHECK(f.slope == Approx(2.0).epsilon(0.01));
    CHECK(f.r_squared > 0.999);
  }
  CHECK_FALSE(spec.used[0]);

  deltas.clear();
  for (int k = 2; k <= 7; ++k) deltas.push_back(std::pow(3.0, -k));
  spec = lq_spectrum(fixtures::cantor_corners(), bernoulli_weights({0.5, 0.5}), qs, deltas);
  for (const auto& f : spec.fits) CHECK(std::fabs(f.slope - kMoran) <= 0.02);

  CHECK_THROWS_AS(lq_spectrum(fixtures::cantor_corners(), bernoulli_weights({0.5, 0.5}), qs,
                              std::vector<double>{0.1, 0.05, 0.02, 0.01}),
                  InputError);
  RasterOptions shallow;
  shallow.max_depth = 2;
  CHECK_THROWS_AS(lq_spectrum(fixtures::cantor_corners(), bernoulli_weights({0.5, 0.5}), qs, deltas,
                              LqOptions{true, shallow}),
                  EstimationError);
}

TEST_CASE("line fit") {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto f = fit_line(x, y);
  CHECK(f.slope == Approx(2.0));
  CHECK(f.intercept == Approx(1.0));
  CHECK(f.r_squared == Approx(1.0));
  CHECK_THROWS_AS(fit_line(std::vector<double>{1}, std::vector<double>{1}), EstimationError);
}

TEST_CASE("energy: degenerate exponent") {
  const auto r = energy_mc(fixtures::cantor_corners(), bernoulli_weights({0.5, 0.5}), 1e-9, 2.0, 200, 2, 1);
  CHECK(r.schedule.back().estimate == Approx(1.0).epsilon(1e-6));
  CHECK(r.flag == Stability::Stable);
}

TEST_CASE("energy: Lebesgue square matches quadrature") {
  const double oracle = lebesgue_inverse_distance();
  CHECK(oracle == Approx(2.97321).epsilon(1e-5));
  const auto r = energy_mc(fixtures::lebesgue_square(), bernoulli_weights({0.25, 0.25, 0.25, 0.25}), 1.0, 2.0,
                           4000, 2, 17);
  CHECK(r.flag == Stability::Stable);
  const auto& last = r.schedule.back();
  INFO("estimate " << last.estimate << " se " << last.standard_error << " oracle " << oracle);
  CHECK(std::fabs(last.estimate - oracle) <= 3 * last.standard_error);
  CHECK_FALSE(r.rejection_warning);
}

TEST_CASE("energy: Cantor corners diverge above the dimension") {
  const auto r = energy_mc(fixtures::cantor_corners(), bernoulli_weights({0.5, 0.5}), kMoran + 0.2, 2.0, 400, 2, 5);
  CHECK(r.flag == Stability::Diverging);
  for (std::size_t j = 1; j < r.schedule.size(); ++j) CHECK(r.schedule[j].estimate >= r.schedule[j - 1].estimate);
}

TEST_CASE("energy is bit-identical across worker counts") {
  const Ifs pair = fixtures::positive_pair();
  const auto w = kaenmaki_weights(pair, 0.33, 4);
  set_workers(1);
  const auto a = energy_mc(pair, w, 0.25, 3.0, 64, 2, 99);
  set_workers(5);
  const auto b = energy_mc(pair, w, 0.25, 3.0, 64, 2, 99);
  set_workers(0);
  REQUIRE(a.schedule.size() == b.schedule.size());
  for (std::size_t j = 0; j < a.schedule.size(); ++j) {
    CHECK(a.schedule[j].estimate == b.schedule[j].estimate);
    CHECK(a.schedule[j].standard_error == b.schedule[j].standard_error);
  }
  const auto c = energy_mc(pair, w, 0.25, 3.0, 64, 2, 100);
  CHECK(c.schedule.back().estimate != a.schedule.back().estimate);
}

TEST_CASE("rasterize is bit-identical across worker counts") {
  const Ifs pair = fixtures::positive_pair();
  const auto w = kaenmaki_weights(pair, 0.335, 2);
  set_workers(1);
  const auto a = rasterize(pair, w, 0x1p-10);
  set_workers(6);
  const auto b = rasterize(pair, w, 0x1p-10);
  set_workers(0);
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) CHECK(a.cells[i].mass == b.cells[i].mass);
}

TEST_CASE("r diagnostic examples") {
  const auto half = bernoulli_weights({0.5, 0.5});
  const Ifs third = fixtures::ratio_third();
  auto c = r_diagnostic(third, half, 0.5, 2.0, 0, 16);
  CHECK(c.max_per_level.size() == 1);
  for (double v : c.partial[0]) CHECK(v == 1.0);

  const std::size_t depth = 14;
  c = r_diagnostic(third, half, 0.5, 2.0, depth, 16);
  const double ratio = 0.5 * std::sqrt(3.0);
  for (std::size_t n = 0; n <= depth; ++n) {
    const double expect = (1 - std::pow(ratio, n + 1)) / (1 - ratio);
    for (double v : c.partial[n]) CHECK(v == Approx(expect).epsilon(1e-12));
  }
  CHECK(1 / (1 - ratio) == Approx(7.4641).epsilon(1e-4));

  const Ifs pair = fixtures::positive_pair();
  const auto k = kaenmaki_weights(pair, 0.335, 3);
  c = r_diagnostic(pair, k, 0.3, 2.0, 12, 16);
  for (std::size_t n = 1; n <= 12; ++n)
    for (std::size_t a = 0; a < 16; ++a) CHECK(c.partial[n][a] >= c.partial[n - 1][a]);
  CHECK_THROWS_AS(r_diagnostic(pair, k, 0.3, 2.0, 40, 16), ResourceError);
  CHECK_THROWS_AS(r_diagnostic(pair, k, 0.3, 2.0, 4, 8), InputError);
}

TEST_CASE("r diagnostic is bit-identical across worker counts") {
  const Ifs pair = fixtures::positive_pair();
  const auto k = kaenmaki_weights(pair, 0.335, 3);
  set_workers(1);
  const auto a = r_diagnostic(pair, k, 0.3, 2.0, 14, 16);
  set_workers(3);
  const auto b = r_diagnostic(pair, k, 0.3, 2.0, 14, 16);
  set_workers(0);
  CHECK(a.partial == b.partial);
}
