#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "aircomp/baselines.hpp"
#include "aircomp/coordination.hpp"
#include "aircomp/scenario.hpp"

namespace aircomp {

// Fully resolved run description: scenario in linear units, mode, seeds and
// per-mode parameters.  Decibel-style inputs (noise in dBm, path-loss
// reference gain in dB) are converted at parse time; the serialized form is
// always canonical linear units, so parse(serialize(parse(x))) is exact.
struct RunConfig {
  NetworkScenario scenario;
  std::string mode = "centralized";  // centralized | distributed | baselines | pareto | validate
  std::uint64_t seed = 1;
  int realizations = 100;
  std::string output_dir = "out";

  // centralized / pareto
  std::vector<Eigen::VectorXd> profiles;  // explicit error-profile list
  int profile_count = 0;                  // two-cell sweep generator (pareto)
  double bisect_tol = 1e-4;

  // distributed
  CoordinationParams coordination;

  // baselines
  std::vector<double> power_sweep_w;  // uniform budget per sweep point
  std::vector<int> device_sweep;      // devices per cell per sweep point
  DenoiseRule denoise_rule = DenoiseRule::kTrueInterference;

  // validate
  std::int64_t mc_trials = 100000;
};

// Parses and validates a JSON run configuration.  Unknown keys anywhere and
// missing mode-required parameters raise ConfigError naming the key.
RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

// Re-checks mode-required parameters (used after a CLI mode override).
void validate_mode_requirements(const RunConfig& config);

// Canonical JSON form of a config (round-trips through parse_config_text).
std::string serialize_config(const RunConfig& config);

}  // namespace aircomp
