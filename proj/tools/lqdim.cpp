#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lqdim/cli.hpp"
#include "lqdim/config.hpp"

int main(int argc, char** argv) {
  using namespace lqdim;

  CLI::App app{"Dimension theory and L^q spectra of planar self-affine measures"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");

  std::string config_path;
  std::optional<std::size_t> depth;
  std::optional<double> tol;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string out_dir;
  std::string format = "json";
  std::string fixture_name;

  auto common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
    if (needs_config) opt->required();
    sub->add_option("--depth", depth, "Level depth for enumerations")->check(CLI::PositiveNumber);
    sub->add_option("--tol", tol, "Root-finding tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "Random seed");
    sub->add_option("--workers", workers, "Worker threads (0: all cores)");
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--format", format, "Machine output format")->check(CLI::IsMember({"csv", "json"}));
  };

  auto* check = app.add_subcommand("check", "Check the hypotheses (S), (P), (B), (MB) and report q0");
  auto* dim = app.add_subcommand("dim", "Affinity dimension and the moment exponent d(q)");
  auto* lq = app.add_subcommand("lq", "Box-counting L^q spectrum against the theoretical prediction");
  auto* diag = app.add_subcommand("diag", "r-curve and energy-integral diagnostics");
  auto* render = app.add_subcommand("render", "Rasterize the measure to PNG and cell CSV");
  auto* fix = app.add_subcommand("fixtures", "Print or write the built-in test systems");
  for (auto* sub : {check, dim, lq, diag, render}) common(sub, true);
  common(fix, false);
  fix->add_option("name", fixture_name, "Fixture name; omit to list all");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code::kUsage;
  }

  CommandOptions opts;
  opts.format = format == "csv" ? Format::Csv : Format::Json;
  opts.out_dir = out_dir;

  if (fix->parsed()) return cmd_fixtures(fixture_name, opts, std::cout, std::cerr);

  RunConfig config;
  try {
    config = load_config(config_path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code::kUsage;
  }
  if (depth) config.params.depth = *depth;
  if (tol) config.params.tol = *tol;
  if (seed) config.params.seed = *seed;
  if (workers) config.params.workers = *workers;

  if (check->parsed()) return cmd_check(config, opts, std::cout, std::cerr);
  if (dim->parsed()) return cmd_dim(config, opts, std::cout, std::cerr);
  if (lq->parsed()) return cmd_lq(config, opts, std::cout, std::cerr);
  if (diag->parsed()) return cmd_diag(config, opts, std::cout, std::cerr);
  return cmd_render(config, opts, std::cout, std::cerr);
}
