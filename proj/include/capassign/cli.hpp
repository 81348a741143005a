#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "capassign/io.hpp"
#include "capassign/scenarios.hpp"

namespace capassign::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kRuntimeError = 2, kOracleFailure = 3 };

/// Bad flag, config file or field value. The message names the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Values given on the command line; unset fields fall back to the file,
/// then to defaults.
struct Flags {
  std::optional<std::string> config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> world;
  std::optional<Index> n;
  std::optional<std::string> policy;
  std::optional<double> metric_exponent;
  std::optional<double> capture_radius;
  std::optional<double> horizon;
  std::optional<double> reassign_interval;
  std::optional<std::string> output_dir;
  std::optional<int> jobs;
  std::optional<std::vector<std::string>> emit;
  std::optional<std::vector<Index>> sizes;
  std::optional<Index> runs;
  bool timings = false;
};

/// Fully resolved configuration. `source` maps each field to "flag",
/// "file" or "default".
struct Settings {
  World world = World::DoubleIntegrator;
  std::string policy = "both";
  std::string output_dir = "out";
  std::vector<std::string> emit;
  int jobs = 1;
  bool timings = false;
  ScenarioSpec scenario;
  EngagementConfig engagement;
  std::vector<Index> sizes;
  Index runs = 100;
  int histogram_bins = 20;
  std::map<std::string, std::string> source;

  /// Same schema as the config file, every field present.
  Json to_json() const;
  std::vector<std::string> defaulted_fields() const;
};

/// Precedence: flags > file > defaults. Throws ConfigError.
Settings resolve(const Flags& flags);

int cmd_run(const Settings& settings, std::ostream& out, std::ostream& err);
int cmd_sweep(const Settings& settings, std::ostream& out, std::ostream& err);

struct OracleResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Built-in oracle suite. `fault` names an oracle whose input is corrupted
/// on purpose (test hook); empty for none.
std::vector<OracleResult> run_oracles(const std::string& fault = "");
int cmd_verify(bool json, const std::string& fault, std::ostream& out, std::ostream& err);

/// Entry point shared by the executable and the tests.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace capassign::cli
