#ifndef LQDIM_CLI_HPP
#define LQDIM_CLI_HPP

#include <ostream>
#include <string>

#include "lqdim/config.hpp"

namespace lqdim {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kFails = 1;
inline constexpr int kUndetermined = 2;
inline constexpr int kResource = 3;
inline constexpr int kUsage = 64;  // bad config or parameters
inline constexpr int kData = 65;  // not enough data to estimate
inline constexpr int kSoftware = 70;
inline constexpr int kIo = 74;
}  // namespace exit_code

enum class Format { Csv, Json };

struct CommandOptions {
  Format format = Format::Json;
  std::string out_dir;  // empty: machine output on `out`
};

/// Each command writes machine output to `out` (or files under out_dir) and
/// human-readable tables and diagnostics to `err`. Returns the exit code;
/// never throws.
int cmd_check(const RunConfig& config, const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_dim(const RunConfig& config, const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_lq(const RunConfig& config, const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_diag(const RunConfig& config, const CommandOptions& opts, std::ostream& out, std::ostream& err);
int cmd_render(const RunConfig& config, const CommandOptions& opts, std::ostream& out, std::ostream& err);
/// Empty name: list fixture names, or write every fixture to out_dir.
int cmd_fixtures(const std::string& name, const CommandOptions& opts, std::ostream& out, std::ostream& err);

}  // namespace lqdim

#endif  // LQDIM_CLI_HPP
