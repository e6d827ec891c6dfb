#ifndef LQDIM_CONFIG_HPP
#define LQDIM_CONFIG_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lqdim/enumerate.hpp"
#include "lqdim/ifs.hpp"

namespace lqdim {

/// Malformed or invalid configuration. `what()` names the field and, when
/// the text is available, the line it sits on.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MapSpec {
  std::array<std::array<double, 2>, 2> linear{};
  std::array<double, 2> translation{};
  bool operator==(const MapSpec&) const = default;
};

/// An (s, q) pair for the diagnostics. s = d + s_offset when `relative`.
struct DiagPoint {
  double s = 0.0;
  double q = 2.0;
  bool relative = true;
  bool operator==(const DiagPoint&) const = default;
};

enum class WeightChoice { Bernoulli, Kaenmaki };

struct Params {
  std::optional<std::size_t> depth;  // level depth; default_depth(N) when absent
  double tol = 1e-9;
  std::vector<double> qs{0.0, 1.0, 2.0};
  std::vector<double> deltas;  // empty: 2^-3 … 2^-8
  std::optional<WeightChoice> weights;  // default Bernoulli with probabilities, else Käenmäki
  std::size_t separation_depth = 8;
  std::size_t gamma_depth = 10;
  double render_delta = 1.0 / 64.0;
  std::vector<DiagPoint> diag{{-0.05, 2.0, true}, {0.2, 2.0, true}};
  std::size_t r_depth = 18;
  std::size_t n_angles = 16;
  std::size_t n_outer = 2000;
  std::size_t n_inner = 4;
  std::size_t energy_steps = 5;
  std::uint64_t seed = 1;
  unsigned workers = 0;  // 0: hardware concurrency
  std::uint64_t budget = kDefaultWordBudget;
  bool operator==(const Params&) const = default;
};

struct RunConfig {
  std::vector<MapSpec> maps;
  std::optional<std::vector<double>> probabilities;
  Params params;
  bool operator==(const RunConfig&) const = default;

  Ifs system() const;
};

/// Parses and validates. Throws ConfigError.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Pretty-printed JSON; parse_config(serialize_config(c)) == c.
std::string serialize_config(const RunConfig& config);

/// Config holding a built-in fixture, with its canonical probabilities if any.
RunConfig fixture_config(const std::string& name);

/// 1-based line of the value at a JSON path such as "maps/1/linear", or 0.
std::size_t line_of(const std::string& text, const std::vector<std::string>& path);

}  // namespace lqdim

#endif  // LQDIM_CONFIG_HPP
