#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace rst::cli {

/// Parse or range error; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string &what) : std::runtime_error(what) {}
};

inline constexpr int kExitPass = 0;
inline constexpr int kExitInvariantFailure = 1;
inline constexpr int kExitUsage = 2;

/// Flat key = value configuration with every knob resolved to a value.
struct ScenarioConfig {
  std::map<std::string, std::string> values;

  const std::string &scenario() const { return values.at("scenario"); }
  std::string str(const std::string &key) const;
  double num(const std::string &key) const;
  long integer(const std::string &key) const;
  std::vector<double> list(const std::string &key) const;
  std::uint64_t seed() const { return static_cast<std::uint64_t>(integer("seed")); }
};

std::vector<std::string> scenario_names();

/// Parses text, fills defaults and validates ranges. `source` names the input in diagnostics.
ScenarioConfig parse_config(std::istream &in, const std::string &source = "<config>");
ScenarioConfig parse_config_file(const std::string &path);

/// Applies a key override (flags) and revalidates.
void set_value(ScenarioConfig &cfg, const std::string &key, const std::string &value);
void validate(const ScenarioConfig &cfg);

/// Resolved configuration as sorted key = value lines.
std::string echo_config(const ScenarioConfig &cfg);

/// One named invariant with its measured value and threshold.
struct CheckRow {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct RunResult {
  int exit_code = kExitPass;
  std::vector<std::string> files;
  std::vector<CheckRow> checks;
};

/// Runs one scenario, writing reports and a manifest into `out_dir`.
/// Returns kExitInvariantFailure when any check fails.
RunResult run(const ScenarioConfig &cfg, const std::string &out_dir, std::ostream &log);

} // namespace rst::cli
