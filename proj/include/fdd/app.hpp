#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fdd/budget.hpp"
#include "fdd/error.hpp"
#include "fdd/line_validation.hpp"
#include "fdd/reconstruct.hpp"
#include "fdd/sample.hpp"
#include "fdd/simulate.hpp"
#include "json.hpp"

namespace fdd {

/// Schema violation in an experiment config; the message starts with the
/// JSON pointer of the offending field.
class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : InvalidArgument(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// One sample mode in units of the cutoff and the mean intensity; snapped to
/// the nearest lattice bin when the sample is built.
struct ModeConfig {
  double kx_over_kc = 0.0;
  double ky_over_kc = 0.0;
  double a_over_a0 = 0.0;
  double b_over_a0 = 0.0;
};

enum class SampleKind { chart, modes };

struct ExperimentConfig {
  double wavelength_nm = 540.0;
  double numerical_aperture = 1.4;
  int grid_pixels = 256;
  /// 0 selects k_c dx = 0.8 pi.
  double pixel_nm = 0.0;

  SampleKind sample = SampleKind::chart;
  ChartSpec chart;
  std::vector<ModeConfig> modes;

  double ka_over_kc = 0.7;
  double footprint_nm = 0.0;
  int canvas_pixels = 1024;

  AcquisitionConfig acquisition;
  int trials = 1;
  ReconstructionConfig reconstruction;
  BudgetParams budget = BudgetParams::defaults();
  /// Frequencies for parameter estimates (chart samples) and SNR reports.
  std::vector<double> analysis_k_over_kc = {0.87};
  LineValidationConfig validation;
};

/// Parses and validates a config document. Missing fields take defaults;
/// unknown fields and wrong types raise ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Fully resolved config, every default written out; parse_config of the
/// result reproduces the input.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

struct CommandOptions {
  std::filesystem::path out = "out";
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
};

/// Outcome of one subcommand; `invariants` lists named checks, and any false
/// entry maps to exit code 3.
struct CommandResult {
  std::string command;
  std::vector<std::filesystem::path> artifacts;
  nlohmann::json summary = nlohmann::json::object();
  std::map<std::string, bool> invariants;
  std::vector<std::string> failures;

  bool ok() const;
};

/// Runs a subcommand (otf, fisher, budget, simulate, reconstruct, snr,
/// validate), writing its outputs and manifest.json under options.out.
CommandResult run_command(const std::string& name, ExperimentConfig cfg,
                          const CommandOptions& options);

/// Exit code convention: 0 success, 2 config error, 3 invariant failure.
int exit_code_for(const CommandResult& result);

}  // namespace fdd
