#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lqdim/cli.hpp"
#include "lqdim/config.hpp"
#include "lqdim/fixtures.hpp"

using namespace lqdim;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

template <typename Cmd>
Run run(Cmd cmd, const RunConfig& c, Format f = Format::Json, const std::string& dir = "") {
  std::ostringstream out, err;
  CommandOptions o;
  o.format = f;
  o.out_dir = dir;
  const int code = cmd(c, o, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("lqdim_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> row;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("check: positive separated pair certifies everything") {
  const Run r = run(cmd_check, fixture_config("positive_pair"));
  INFO(r.err);
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["positivity"] == true);
  CHECK(j["separation"]["status"] == "certified");
  CHECK(j["gamma"]["certified_upper"] == 1.0);
  CHECK(j["gamma"]["separated"] == true);
  CHECK(j["q0_bunching"]["kind"] == "finite");
  CHECK(j["q0_bunching"]["value"].get<double>() > 2.0);
  CHECK(j["q0_metric_bunching"]["value"].get<double>() > 2.0);
  CHECK(j["prop3"]["exists"] == true);
  CHECK(j["exit_code"] == 0);
}

TEST_CASE("check: overlapping images are undetermined") {
  RunConfig c = fixture_config("positive_pair");
  for (auto& m : c.maps) m.translation = {0.0, 0.0};
  const Run r = run(cmd_check, c);
  CHECK(r.code == 2);
  CHECK(json::parse(r.out)["separation"]["status"] == "undetermined");
}

TEST_CASE("check: a negative entry fails positivity") {
  RunConfig c = fixture_config("positive_pair");
  c.maps[0].linear[0][1] = -0.01;
  const Run r = run(cmd_check, c, Format::Csv);
  CHECK(r.code == 1);
  CHECK(r.out.find("positivity,0") != std::string::npos);
}

TEST_CASE("dim: Moran and diagonal oracles") {
  RunConfig c = fixture_config("ratio_third");
  c.params.qs = {2, 3, 4};
  c.params.weights = WeightChoice::Bernoulli;
  Run r = run(cmd_dim, c, Format::Csv);
  REQUIRE(r.code == 0);
  const auto rows = read_csv(r.out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"q", "dq_value", "depth", "bracket_lo", "bracket_hi"});
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(rows[i][1]) == doctest::Approx(std::log(2) / std::log(3)).epsilon(1e-6));

  r = run(cmd_dim, c);
  CHECK(json::parse(r.out)["d"]["value"].get<double>() == doctest::Approx(0.630930).epsilon(1e-6));
  r = run(cmd_dim, fixture_config("diagonal_pair"));
  CHECK(std::abs(json::parse(r.out)["d"]["value"].get<double>() - 1.0) < 1e-6);
}

TEST_CASE("dim: over-budget depth gives partial output and exit 3") {
  RunConfig c = fixture_config("ratio_third");
  c.params.depth = 30;
  c.params.budget = 1 << 10;
  const Run r = run(cmd_dim, c);
  CHECK(r.code == 3);
  const json j = json::parse(r.out);
  CHECK(j["partial"] == true);
  CHECK(j["d"]["depth"] == 10);
}

TEST_CASE("lq: exact spectra with theory overlay") {
  Run r = run(cmd_lq, fixture_config("lebesgue_square"));
  REQUIRE(r.code == 0);
  for (const auto& row : json::parse(r.out)["rows"]) {
    CHECK(std::abs(row["slope"].get<double>() - 2.0) <= 0.02);
    CHECK(row["theory"].get<double>() == doctest::Approx(2.0));
    CHECK(row["deviation"].get<double>() <= 0.02);
  }
  r = run(cmd_lq, fixture_config("cantor_corners"), Format::Csv);
  REQUIRE(r.code == 0);
  const auto rows = read_csv(r.out);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(std::abs(std::stod(rows[i][1]) - 0.631) <= 0.02);
    CHECK(std::stod(rows[i][5]) == doctest::Approx(0.630930).epsilon(1e-6));
  }
}

TEST_CASE("lq: too few usable resolutions is a data error") {
  RunConfig c = fixture_config("lebesgue_square");
  c.params.deltas = {0.5, 0.25, 0.125, 0.0625};
  c.params.budget = 8;
  const Run r = run(cmd_lq, c);
  CHECK((r.code == 3 || r.code == 65));
  CHECK(!r.err.empty());
}

TEST_CASE("diag: s near 0 gives energy near 1") {
  RunConfig c = fixture_config("lebesgue_square");
  c.params.diag = {{1e-6, 2.0, false}};
  c.params.r_depth = 3;
  c.params.n_outer = 200;
  c.params.n_inner = 2;
  c.params.energy_steps = 2;
  const Run r = run(cmd_diag, c);
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  for (const auto& st : j["runs"][0]["energy"]["schedule"]) CHECK(std::abs(st["estimate"].get<double>() - 1.0) < 1e-3);
  const Run csv = run(cmd_diag, c, Format::Csv);
  CHECK(csv.out.rfind("s,q,level,angle,partial\n", 0) == 0);
  CHECK(csv.out.find("\n\n\ns,q,step,resolution") != std::string::npos);
}

TEST_CASE("diag: seeded runs are reproducible") {
  RunConfig c = fixture_config("cantor_corners");
  c.params.r_depth = 6;
  c.params.n_outer = 100;
  c.params.energy_steps = 2;
  c.params.seed = 99;
  const Run a = run(cmd_diag, c);
  c.params.workers = 3;
  const Run b = run(cmd_diag, c);
  CHECK(a.out == b.out);
}

TEST_CASE("render: Lebesgue square at 1/64 is uniform") {
  const auto dir = scratch("render_leb");
  const Run r = run(cmd_render, fixture_config("lebesgue_square"), Format::Csv, dir.string());
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(dir / "measure.png"));
  std::ifstream in(dir / "cells.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto rows = read_csv(ss.str());
  REQUIRE(rows.size() == 4097);
  double sum = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    sum += std::stod(rows[i][2]);
    CHECK(std::stod(rows[i][2]) == 1.0 / 4096);
  }
  CHECK(std::abs(sum - 1) < 1e-9);
  std::filesystem::remove_all(dir);
}

TEST_CASE("render: Cantor corners at 3^-5 occupy 32 diagonal cells") {
  const auto dir = scratch("render_cantor");
  const Run r = run(cmd_render, fixture_config("cantor_corners"), Format::Json, dir.string());
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["cells"] == 32);
  std::ifstream in(dir / "cells.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  const auto rows = read_csv(ss.str());
  REQUIRE(rows.size() == 33);
  double sum = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i][0] == rows[i][1]);
    sum += std::stod(rows[i][2]);
  }
  CHECK(std::abs(sum - 1) < 1e-9);
  std::filesystem::remove_all(dir);
}

TEST_CASE("render: unwritable output is exit 74") {
  const auto file = scratch("render_blocker");
  std::ofstream(file.string()) << "x";
  const Run r = run(cmd_render, fixture_config("cantor_corners"), Format::Json, (file / "sub").string());
  CHECK(r.code == 74);
  std::filesystem::remove_all(file);
}

TEST_CASE("fixtures: list and write") {
  std::ostringstream out, err;
  CHECK(cmd_fixtures("", {}, out, err) == 0);
  CHECK(out.str() == "lebesgue_square\ncantor_corners\nratio_third\ndiagonal_pair\npositive_pair\n");

  std::ostringstream one;
  CHECK(cmd_fixtures("positive_pair", {}, one, err) == 0);
  CHECK(parse_config(one.str()) == fixture_config("positive_pair"));

  std::ostringstream bad, bad_err;
  CHECK(cmd_fixtures("nope", {}, bad, bad_err) == 64);
  CHECK(bad.str().empty());
  CHECK(bad_err.str().find("unknown fixture") != std::string::npos);

  const auto dir = scratch("fixtures");
  CommandOptions o;
  o.out_dir = dir.string();
  std::ostringstream sink;
  CHECK(cmd_fixtures("", o, sink, err) == 0);
  for (const auto& n : fixtures::names()) CHECK(std::filesystem::exists(dir / (n + ".json")));
  std::filesystem::remove_all(dir);
}

TEST_CASE("machine output stays off stderr and diagnostics off stdout") {
  const Run r = run(cmd_check, fixture_config("positive_pair"));
  CHECK(json::accept(r.out));
  CHECK(r.err.find("positivity (P)") != std::string::npos);
  CHECK(r.out.find("positivity (P)") == std::string::npos);
}
