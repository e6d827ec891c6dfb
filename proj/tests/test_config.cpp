#include <doctest.h>

#include <random>
#include <string>

#include "lqdim/config.hpp"
#include "lqdim/fixtures.hpp"

using namespace lqdim;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("config round trip on every fixture") {
  for (const auto& name : fixtures::names()) {
    const RunConfig c = fixture_config(name);
    CHECK(parse_config(serialize_config(c)) == c);
    CHECK(c.system().size() == fixtures::by_name(name).size());
  }
}

TEST_CASE("config round trip on random configs") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-0.4, 0.4), t(-1e3, 1e3), pos(0.01, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    RunConfig c;
    const std::size_t n = 1 + trial % 4;
    for (std::size_t i = 0; i < n; ++i)
      c.maps.push_back({{{{u(rng) + 0.45, u(rng) / 4}, {u(rng) / 4, u(rng) - 0.45}}}, {t(rng), t(rng)}});
    if (trial % 2) {
      std::vector<double> p(n);
      double sum = 0;
      for (auto& x : p) sum += (x = pos(rng));
      for (auto& x : p) x /= sum;
      c.probabilities = p;
    }
    c.params.tol = pos(rng) * 1e-6;
    c.params.qs = {pos(rng), 2.0 + pos(rng)};
    c.params.seed = rng();
    c.params.budget = 1 + (rng() >> 20);
    if (trial % 3 == 0) c.params.depth = 5;
    if (trial % 5 == 0) c.params.weights = WeightChoice::Bernoulli;
    c.params.diag = {{pos(rng), 2.0, false}, {-pos(rng) / 10, 3.0, true}};
    const std::string text = serialize_config(c);
    INFO(text);
    REQUIRE(parse_config(text) == c);
  }
}

TEST_CASE("config rejects malformed JSON with a position") {
  const std::string e = error_of("{\n  \"maps\": [\n    {\"linear\": [[0.5, 0], [0, 0.5]],,\n");
  CHECK(contains(e, "line 3"));
}

TEST_CASE("config errors name the field and line") {
  const std::string singular = R"({
  "maps": [
    {"linear": [[0.5, 0], [0, 0.5]], "translation": [0, 0]},
    {"linear": [[0.5, 0.5], [0.5, 0.5]], "translation": [1, 0]}
  ]
})";
  std::string e = error_of(singular);
  CHECK(contains(e, "maps[1].linear"));
  CHECK(contains(e, "line 4"));
  CHECK(contains(e, "singular"));

  const std::string expanding = R"({
  "maps": [
    {"linear": [[1.5, 0], [0, 0.5]], "translation": [0, 0]}
  ]
})";
  e = error_of(expanding);
  CHECK(contains(e, "maps[0].linear"));
  CHECK(contains(e, "line 3"));
  CHECK(contains(e, "contraction"));

  const std::string probs = R"({
  "maps": [
    {"linear": [[0.5, 0], [0, 0.5]], "translation": [0, 0]},
    {"linear": [[0.5, 0], [0, 0.5]], "translation": [1, 0]}
  ],
  "probabilities": [0.5, 0.6]
})";
  e = error_of(probs);
  CHECK(contains(e, "probabilities"));
  CHECK(contains(e, "line 6"));
  CHECK(contains(e, "sum to 1"));

  const std::string typo = R"({
  "maps": [{"linear": [[0.5, 0], [0, 0.5]], "translation": [0, 0]}],
  "params": {
    "dpeth": 4
  }
})";
  e = error_of(typo);
  CHECK(contains(e, "params.dpeth"));
  CHECK(contains(e, "line 4"));
  CHECK(contains(e, "unknown key"));

  CHECK(contains(error_of(R"({"maps": []})"), "non-empty"));
  CHECK(contains(error_of(R"({"probabilities": [1]})"), "missing key 'maps'"));
  CHECK(contains(error_of(R"({"maps": [{"linear": [[0.5, 0], [0, 0.5]], "translation": [0]}]})"), "translation"));
  CHECK(contains(error_of(R"({"maps": [{"linear": [[0.5, 0], [0, 0.5]], "translation": [0, 0]}],
                              "params": {"deltas": [0.5, 0.25, 0.3, 0.1]}})"),
                 "params.deltas[2]"));
  CHECK(contains(error_of(R"({"maps": [{"linear": [[0.5, 0], [0, 0.5]], "translation": [0, 0]}],
                              "params": {"depth": -1}})"),
                 "non-negative"));
  CHECK(contains(error_of(R"({"maps": [{"linear": [[0.5, 0], [0, 0.5]], "translation": [0, 0]}],
                              "params": {"diag": [{"s": 0.5, "s_offset": 0.1}]}})"),
                 "exactly one"));
}

TEST_CASE("line_of locates nested values") {
  const std::string text = "{\n \"a\": [\n  1,\n  {\"b\": \"x,y\",\n   \"c\": [2, 3]}\n ],\n \"d\": 4\n}";
  CHECK(line_of(text, {}) == 1);
  CHECK(line_of(text, {"a"}) == 2);
  CHECK(line_of(text, {"a", "0"}) == 3);
  CHECK(line_of(text, {"a", "1", "b"}) == 4);
  CHECK(line_of(text, {"a", "1", "c", "1"}) == 5);
  CHECK(line_of(text, {"d"}) == 7);
  CHECK(line_of(text, {"missing"}) == 0);
}
