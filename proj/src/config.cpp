#include "lqdim/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lqdim/fixtures.hpp"

namespace lqdim {

using nlohmann::json;

namespace {

class Reader {
 public:
  explicit Reader(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
    std::string where = path.empty() ? "config" : "";
    for (std::size_t i = 0; i < path.size(); ++i) {
      const bool index = !path[i].empty() && std::isdigit(static_cast<unsigned char>(path[i][0]));
      where += index ? "[" + path[i] + "]" : (i ? "." : "") + path[i];
    }
    std::string out = where;
    if (const std::size_t line = line_of(text_, path); line > 0) out += " (line " + std::to_string(line) + ")";
    throw ConfigError(out + ": " + msg);
  }

  double number(const json& j, const std::vector<std::string>& path) const {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "expected a finite number");
    return v;
  }

  std::uint64_t count(const json& j, const std::vector<std::string>& path) const {
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer()) fail(path, "expected a non-negative integer");
    fail(path, "expected an integer");
  }

  std::vector<double> numbers(const json& j, const std::vector<std::string>& path) const {
    if (!j.is_array()) fail(path, "expected a list of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], with(path, i)));
    return out;
  }

  void only_keys(const json& j, const std::vector<std::string>& path, std::initializer_list<const char*> keys) const {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [k, v] : j.items()) {
      bool known = false;
      for (const char* key : keys) known = known || k == key;
      if (!known) fail(with(path, k), "unknown key");
    }
  }

  static std::vector<std::string> with(std::vector<std::string> path, const std::string& key) {
    path.push_back(key);
    return path;
  }
  static std::vector<std::string> with(std::vector<std::string> path, std::size_t index) {
    path.push_back(std::to_string(index));
    return path;
  }

 private:
  const std::string& text_;
};

MapSpec read_map(const Reader& r, const json& j, const std::vector<std::string>& path) {
  r.only_keys(j, path, {"linear", "translation"});
  if (!j.contains("linear")) r.fail(path, "missing key 'linear'");
  if (!j.contains("translation")) r.fail(path, "missing key 'translation'");
  MapSpec m;
  const auto lp = Reader::with(path, "linear");
  const json& lin = j.at("linear");
  if (!lin.is_array() || lin.size() != 2) r.fail(lp, "expected [[a, b], [c, d]]");
  for (std::size_t i = 0; i < 2; ++i) {
    const auto row = r.numbers(lin[i], Reader::with(lp, i));
    if (row.size() != 2) r.fail(Reader::with(lp, i), "expected a row of 2 numbers");
    m.linear[i] = {row[0], row[1]};
  }
  const auto tp = Reader::with(path, "translation");
  const auto t = r.numbers(j.at("translation"), tp);
  if (t.size() != 2) r.fail(tp, "expected [tx, ty]");
  m.translation = {t[0], t[1]};

  Matrix2<double> a;
  a << m.linear[0][0], m.linear[0][1], m.linear[1][0], m.linear[1][1];
  try {
    Map(a, Vector2<double>(t[0], t[1]));
  } catch (const DomainError& e) {
    r.fail(lp, e.what());
  }
  return m;
}

Params read_params(const Reader& r, const json& j) {
  const std::vector<std::string> path{"params"};
  r.only_keys(j, path,
              {"depth", "tol", "qs", "deltas", "weights", "separation_depth", "gamma_depth", "render_delta", "diag",
               "r_depth", "n_angles", "n_outer", "n_inner", "energy_steps", "seed", "workers", "budget"});
  Params p;
  auto at = [&](const char* key) { return Reader::with(path, key); };
  auto positive_count = [&](const char* key, std::size_t& out, std::size_t min) {
    if (!j.contains(key)) return;
    const auto v = r.count(j.at(key), at(key));
    if (v < min) r.fail(at(key), "must be at least " + std::to_string(min));
    out = static_cast<std::size_t>(v);
  };

  if (j.contains("depth")) {
    const auto v = r.count(j.at("depth"), at("depth"));
    if (v < 1) r.fail(at("depth"), "must be at least 1");
    p.depth = static_cast<std::size_t>(v);
  }
  if (j.contains("tol")) {
    p.tol = r.number(j.at("tol"), at("tol"));
    if (!(p.tol > 0 && p.tol < 1)) r.fail(at("tol"), "must lie in (0, 1)");
  }
  if (j.contains("qs")) {
    p.qs = r.numbers(j.at("qs"), at("qs"));
    if (p.qs.empty()) r.fail(at("qs"), "must not be empty");
    for (std::size_t i = 0; i < p.qs.size(); ++i)
      if (!(p.qs[i] >= 0 && p.qs[i] <= 8)) r.fail(Reader::with(at("qs"), i), "q must lie in [0, 8]");
  }
  if (j.contains("deltas")) {
    p.deltas = r.numbers(j.at("deltas"), at("deltas"));
    if (p.deltas.size() < 4) r.fail(at("deltas"), "needs at least 4 resolutions");
    for (std::size_t i = 0; i < p.deltas.size(); ++i) {
      if (!(p.deltas[i] > 0 && p.deltas[i] < 1)) r.fail(Reader::with(at("deltas"), i), "must lie in (0, 1)");
      if (i > 0 && !(p.deltas[i] < p.deltas[i - 1]))
        r.fail(Reader::with(at("deltas"), i), "resolutions must strictly decrease");
    }
  }
  if (j.contains("weights")) {
    const json& w = j.at("weights");
    if (w == "bernoulli")
      p.weights = WeightChoice::Bernoulli;
    else if (w == "kaenmaki")
      p.weights = WeightChoice::Kaenmaki;
    else
      r.fail(at("weights"), "expected \"bernoulli\" or \"kaenmaki\"");
  }
  positive_count("separation_depth", p.separation_depth, 0);
  positive_count("gamma_depth", p.gamma_depth, 1);
  if (j.contains("render_delta")) {
    p.render_delta = r.number(j.at("render_delta"), at("render_delta"));
    if (!(p.render_delta > 0 && p.render_delta < 1)) r.fail(at("render_delta"), "must lie in (0, 1)");
  }
  if (j.contains("diag")) {
    const json& d = j.at("diag");
    if (!d.is_array()) r.fail(at("diag"), "expected a list of {\"s\" or \"s_offset\", \"q\"}");
    p.diag.clear();
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto ip = Reader::with(at("diag"), i);
      r.only_keys(d[i], ip, {"s", "s_offset", "q"});
      DiagPoint pt;
      const bool abs = d[i].contains("s"), rel = d[i].contains("s_offset");
      if (abs == rel) r.fail(ip, "give exactly one of \"s\" and \"s_offset\"");
      pt.relative = rel;
      pt.s = r.number(d[i].at(rel ? "s_offset" : "s"), Reader::with(ip, rel ? "s_offset" : "s"));
      if (abs && !(pt.s > 0 && pt.s < 2)) r.fail(Reader::with(ip, "s"), "must lie in (0, 2)");
      if (d[i].contains("q")) pt.q = r.number(d[i].at("q"), Reader::with(ip, "q"));
      if (!(pt.q >= 2 && pt.q <= 8)) r.fail(Reader::with(ip, "q"), "must lie in [2, 8]");
      p.diag.push_back(pt);
    }
  }
  positive_count("r_depth", p.r_depth, 1);
  positive_count("n_angles", p.n_angles, 16);
  positive_count("n_outer", p.n_outer, 2);
  positive_count("n_inner", p.n_inner, 1);
  positive_count("energy_steps", p.energy_steps, 2);
  if (j.contains("seed")) p.seed = r.count(j.at("seed"), at("seed"));
  if (j.contains("workers")) {
    const auto v = r.count(j.at("workers"), at("workers"));
    if (v > 4096) r.fail(at("workers"), "must be at most 4096");
    p.workers = static_cast<unsigned>(v);
  }
  if (j.contains("budget")) {
    p.budget = r.count(j.at("budget"), at("budget"));
    if (p.budget < 1) r.fail(at("budget"), "must be at least 1");
  }
  return p;
}

}  // namespace

Ifs RunConfig::system() const {
  std::vector<Map> out;
  for (const MapSpec& m : maps) {
    Matrix2<double> a;
    a << m.linear[0][0], m.linear[0][1], m.linear[1][0], m.linear[1][1];
    out.emplace_back(a, Vector2<double>(m.translation[0], m.translation[1]));
  }
  return Ifs(std::move(out));
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  const Reader r(text);
  r.only_keys(j, {}, {"maps", "probabilities", "params"});
  if (!j.contains("maps")) r.fail({}, "missing key 'maps'");
  const json& maps = j.at("maps");
  if (!maps.is_array() || maps.empty()) r.fail({"maps"}, "expected a non-empty list of maps");

  RunConfig c;
  for (std::size_t i = 0; i < maps.size(); ++i) c.maps.push_back(read_map(r, maps[i], {"maps", std::to_string(i)}));

  if (j.contains("probabilities")) {
    const std::vector<std::string> pp{"probabilities"};
    auto p = r.numbers(j.at("probabilities"), pp);
    if (p.size() != c.maps.size())
      r.fail(pp, "expected " + std::to_string(c.maps.size()) + " entries, one per map");
    double sum = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (!(p[i] > 0)) r.fail(Reader::with(pp, i), "must be positive");
      sum += p[i];
    }
    if (std::abs(sum - 1) > 1e-9) r.fail(pp, "must sum to 1 (sum is " + std::to_string(sum) + ")");
    c.probabilities = std::move(p);
  }
  if (j.contains("params")) c.params = read_params(r, j.at("params"));
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string serialize_config(const RunConfig& c) {
  json j;
  j["maps"] = json::array();
  for (const MapSpec& m : c.maps)
    j["maps"].push_back({{"linear", {{m.linear[0][0], m.linear[0][1]}, {m.linear[1][0], m.linear[1][1]}}},
                         {"translation", {m.translation[0], m.translation[1]}}});
  if (c.probabilities) j["probabilities"] = *c.probabilities;
  const Params& p = c.params;
  json& q = j["params"];
  if (p.depth) q["depth"] = *p.depth;
  q["tol"] = p.tol;
  q["qs"] = p.qs;
  if (!p.deltas.empty()) q["deltas"] = p.deltas;
  if (p.weights) q["weights"] = *p.weights == WeightChoice::Bernoulli ? "bernoulli" : "kaenmaki";
  q["separation_depth"] = p.separation_depth;
  q["gamma_depth"] = p.gamma_depth;
  q["render_delta"] = p.render_delta;
  q["diag"] = json::array();
  for (const DiagPoint& d : p.diag) q["diag"].push_back({{d.relative ? "s_offset" : "s", d.s}, {"q", d.q}});
  q["r_depth"] = p.r_depth;
  q["n_angles"] = p.n_angles;
  q["n_outer"] = p.n_outer;
  q["n_inner"] = p.n_inner;
  q["energy_steps"] = p.energy_steps;
  q["seed"] = p.seed;
  q["workers"] = p.workers;
  q["budget"] = p.budget;
  return j.dump(2) + "\n";
}

RunConfig fixture_config(const std::string& name) {
  const Ifs ifs = fixtures::by_name(name);
  RunConfig c;
  for (const Map& m : ifs) {
    const Matrix2<double> a = m.linear();
    c.maps.push_back({{{{a(0, 0), a(0, 1)}, {a(1, 0), a(1, 1)}}}, {m.translation()(0), m.translation()(1)}});
  }
  if (name == "positive_pair") {
    c.probabilities = fixtures::positive_pair_probabilities();
    c.params.deltas.clear();
    for (int e = 5; e <= 11; ++e) c.params.deltas.push_back(std::ldexp(1.0, -e));
    // Saturation at s = d − 0.05 shows from level 26; stability needs the sixth doubling.
    c.params.r_depth = 26;
    c.params.budget = std::uint64_t{1} << 27;
    c.params.energy_steps = 6;
  } else if (name == "cantor_corners" || name == "ratio_third") {
    c.params.deltas.clear();
    for (int e = 2; e <= 7; ++e) c.params.deltas.push_back(std::pow(3.0, -e));
    c.params.render_delta = std::pow(3.0, -5);
  }
  return c;
}

std::size_t line_of(const std::string& text, const std::vector<std::string>& path) {
  struct Frame {
    bool array;
    std::size_t index;
    std::string key;
  };
  std::vector<Frame> stack;
  bool expect_key = false;
  std::size_t line = 1;
  auto here = [&] {
    if (stack.size() != path.size()) return false;
    for (std::size_t i = 0; i < stack.size(); ++i) {
      const std::string part = stack[i].array ? std::to_string(stack[i].index) : stack[i].key;
      if (part != path[i]) return false;
    }
    return true;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    switch (ch) {
      case '\n': ++line; break;
      case ' ': case '\t': case '\r': case ':': break;
      case '{':
      case '[':
        if (here()) return line;
        stack.push_back({ch == '[', 0, {}});
        expect_key = ch == '{';
        break;
      case '}':
      case ']':
        if (!stack.empty()) stack.pop_back();
        expect_key = false;
        break;
      case ',':
        if (!stack.empty() && stack.back().array) ++stack.back().index;
        else expect_key = true;
        break;
      case '"': {
        std::string s;
        for (++i; i < text.size() && text[i] != '"'; ++i) {
          if (text[i] == '\\' && i + 1 < text.size()) ++i;
          s += text[i];
        }
        if (expect_key && !stack.empty() && !stack.back().array) {
          stack.back().key = s;
          expect_key = false;
        } else if (here()) {
          return line;
        }
        break;
      }
      default:
        if (here()) return line;
        while (i + 1 < text.size() && std::string_view(",]}\n \t\r").find(text[i + 1]) == std::string_view::npos) ++i;
    }
  }
  return 0;
}

}  // namespace lqdim
