#include <numbers>

#include "doctest.h"
#include "lqdim/conditions.hpp"
#include "lqdim/fixtures.hpp"
#include "support.hpp"

using namespace lqdim;
using namespace test_support;
using doctest::Approx;

namespace {
const double kMoran = std::log(2.0) / std::log(3.0);

/// N copies of diag-like maps with singular values (a1, a2).
Ifs with_singular_values(double a1, double a2, std::size_t n = 2) {
  std::vector<Map> maps;
  for (std::size_t i = 0; i < n; ++i) maps.push_back(affine(a1, 0, 0, a2, static_cast<double>(i), 0));
  return Ifs(maps);
}
}  // namespace

TEST_CASE("positivity") {
  CHECK(check_positivity(Ifs({affine(0.6, 0.3, 0.3, 0.3)})));
  CHECK_FALSE(check_positivity(Ifs({affine(0.5, 0, 0, 0.25)})));
  CHECK_FALSE(check_positivity(Ifs({affine(0.6, 0.3, 0.3, 0.3), affine(0.4, -0.1, 0.1, 0.3, 1, 1)})));
}

TEST_CASE("separation certificates") {
  const Ifs cantor = fixtures::cantor_corners();
  double prev = 0;
  for (std::size_t depth : {1, 2, 4, 8, 12}) {
    const auto c = check_separation(cantor, depth);
    CHECK(c.status == CertStatus::Certified);
    CHECK(c.depth == depth);
    CHECK(c.gap >= prev - 1e-12);
    prev = c.gap;
  }
  CHECK(prev == Approx(std::sqrt(2.0) / 3).epsilon(1e-3));
  CHECK(prev <= std::sqrt(2.0) / 3);

  const Ifs touching({affine(0.5, 0, 0, 0.5), affine(0.5, 0, 0, 0.5, 0.5, 0.5)});
  CHECK(check_separation(touching, 10).status == CertStatus::Undetermined);
  CHECK(check_separation(fixtures::lebesgue_square(), 6).status == CertStatus::Undetermined);

  const auto single = check_separation(Ifs({affine(0.5, 0, 0, 0.5)}), 3);
  CHECK(single.status == CertStatus::Certified);
  CHECK(std::isinf(single.gap));

  const auto pos = check_separation(fixtures::positive_pair(), 8);
  CHECK(pos.status == CertStatus::Certified);
  CHECK(pos.gap > 0);
  CHECK_THROWS_AS(check_separation(cantor, 0), InputError);
}

TEST_CASE("bunching examples") {
  const Ifs s = with_singular_values(0.3, 0.2);
  auto r = check_bunching(s, 1.0, 0.6, 2.0);
  CHECK(r.pass);
  REQUIRE(r.margins.size() == 2);
  CHECK(r.margins[0] == Approx(0.6 * std::log(0.2) - 1.2 * std::log(0.3)));
  CHECK_FALSE(check_bunching(s, 1.0, 0.6, 5.0).pass);
  r = check_bunching(s, 2.0, 0.6, 2.0);
  CHECK_FALSE(r.pass);
  CHECK(r.margins[0] == Approx(-0.9657 + 0.7516 - 0.0).epsilon(1e-3));
  CHECK_THROWS_AS(check_bunching(s, 0.5, 0.6, 2.0), InputError);
  CHECK_THROWS_AS(check_bunching(s, 1.0, 0.6, 1.5), InputError);
}

TEST_CASE("metric bunching examples") {
  const Ifs third = fixtures::ratio_third();
  const std::vector<double> half{0.5, 0.5};
  auto r = check_metric_bunching(third, 1.0, kMoran, half, 2.0);
  CHECK(r.pass);
  CHECK(r.margins[0] == Approx(std::log(2.0)));
  for (double q : {3.0, 7.5, 30.0}) CHECK(check_metric_bunching(third, 1.0, kMoran, half, q).pass);

  const std::vector<double> skew{0.9, 0.1};
  const double d2 = std::log(0.82) / std::log(1.0 / 3.0);
  r = check_metric_bunching(third, 1.0, d2, skew, 2.0);
  CHECK(r.pass);
  CHECK(r.margins[0] == Approx(std::log((std::pow(1.0 / 3.0, d2)) / 0.81)).epsilon(1e-9));
  CHECK(r.margins[0] < 0.02);
}

TEST_CASE("q0 bunching examples") {
  const Ifs s = with_singular_values(0.3, 0.2);
  for (double d : {0.3, 0.6, 1.0}) {
    const auto q0 = q0_bunching(s, 1.0, d);
    REQUIRE(q0.kind() == Threshold::Kind::Finite);
    CHECK(q0.value() == Approx(std::log(0.2) / std::log(0.2 / 0.3)).epsilon(1e-12));
    CHECK(q0.value() == Approx(3.9693).epsilon(1e-4));
  }
  CHECK(q0_bunching(fixtures::ratio_third(), 1.0, kMoran).kind() == Threshold::Kind::Infinite);
  CHECK(q0_bunching(s, 2.0, 0.6).kind() == Threshold::Kind::NoneBelow2);
  CHECK(Threshold::infinite().to_string() == "inf");
  CHECK(Threshold::none_below_2().to_string() == "none below 2");
}

TEST_CASE("q0 closed form agrees with the scan on random draws") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> a1d(0.05, 0.95), ratio(0.02, 0.98), gd(1.0, 2.5), dd(0.05, 1.0);
  int finite = 0;
  for (int i = 0; i < 1000; ++i) {
    const double a1 = a1d(rng), a2 = a1 * ratio(rng);
    const Ifs s = with_singular_values(a1, a2, 1 + i % 3);
    const double gamma = (i % 4 == 0) ? 1.0 : gd(rng), d = dd(rng);
    const auto closed = q0_bunching(s, gamma, d);
    const auto scanned = q0_bunching_scan(s, gamma, d, 1e-8);
    if (closed.kind() == Threshold::Kind::Finite && closed.value() < kQScanCap) {
      REQUIRE(scanned.kind() == Threshold::Kind::Finite);
      CHECK(std::fabs(closed.value() - scanned.value()) <= 1e-6);
      ++finite;
    } else if (closed.kind() == Threshold::Kind::NoneBelow2) {
      CHECK(scanned.kind() == Threshold::Kind::NoneBelow2);
    } else {
      CHECK(scanned.kind() == Threshold::Kind::Infinite);
    }
  }
  CHECK(finite > 200);
}

TEST_CASE("bunching passes on an initial segment of q") {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 50; ++i) {
    const Ifs s = random_ifs(rng, 2, true);
    bool failed = false;
    for (double q = 2; q <= 20; q += 0.25) {
      const bool pass = check_bunching(s, 1.0, 0.5, q).pass;
      if (failed) CHECK_FALSE(pass);
      failed = failed || !pass;
    }
  }
}

TEST_CASE("q0 metric bunching") {
  const Ifs third = fixtures::ratio_third();
  const std::vector<double> half{0.5, 0.5};
  CHECK(q0_metric_bunching(third, 1.0, half, 10, 1e-6).kind() == Threshold::Kind::Infinite);

  // γ·p(i)^2 = 2.5/4 exceeds α₂^{d(2)} = 1/2, so (MB) fails at q = 2.
  CHECK(q0_metric_bunching(third, 2.5, half, 10, 1e-6).kind() == Threshold::Kind::NoneBelow2);

  const Ifs pair = fixtures::positive_pair();
  const auto p = fixtures::positive_pair_probabilities();
  const auto q0 = q0_metric_bunching(pair, 1.0, p, 12, 1e-6);
  REQUIRE(q0.kind() == Threshold::Kind::Finite);
  CHECK(q0.value() > 2);
  // Half-step dense grid oracle: passes strictly below, fails strictly above.
  const LevelTable table = level_table(pair, 12);
  const auto masses = bernoulli_weights(p).log_masses(table);
  auto holds = [&](double q) {
    return check_metric_bunching(pair, 1.0, lq_exponent(table, masses, q, 1e-10).value, p, q).pass;
  };
  for (double q = 2; q < q0.value() - 1e-4; q += 0.125) CHECK(holds(q));
  CHECK(holds(q0.value() - 1e-5));
  CHECK_FALSE(holds(q0.value() + 1e-5));
}

TEST_CASE("proposition 3 check") {
  const auto r = prop3_check(fixtures::ratio_third(), 1.0, kMoran, kMoran);
  CHECK(r.exists);
  CHECK(r.condition_sum == Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(r.alpha2_half_sum == Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK(r.alpha1_d_sum == Approx(1.0).epsilon(1e-12));

  const auto single = prop3_check(Ifs({affine(0.5, 0, 0, 0.5)}), 1.0, 0.5, 0.5);
  CHECK_FALSE(single.exists);
  CHECK(single.condition_sum == Approx(std::pow(0.5, 0.25)));

  const Ifs pair = fixtures::positive_pair();
  const double d = affinity_dim(pair, 12, 1e-8).value;
  REQUIRE(d <= 1);
  REQUIRE(q0_bunching(pair, 1.0, d).admits_q_above_2());
  const double d2 = lq_exponent(pair, kaenmaki_weights(pair, d, 12), 2.0, 12, 1e-8).value;
  CHECK(prop3_check(pair, 1.0, d2, d).exists);
}
