#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "aircomp/config.hpp"
#include "aircomp/errors.hpp"
#include "aircomp/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Multi-cell over-the-air computation power-control simulator"};

  std::string config_path;
  std::string mode_override;
  std::string out_override;
  std::int64_t seed_override = -1;

  app.add_option("-c,--config", config_path, "JSON run configuration")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("-m,--mode", mode_override,
                 "Override mode: centralized|distributed|baselines|pareto|validate");
  app.add_option("-s,--seed", seed_override, "Override the master seed")
      ->check(CLI::NonNegativeNumber);
  app.add_option("-o,--out", out_override, "Override the output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    aircomp::RunConfig cfg = aircomp::parse_config(config_path);
    if (!mode_override.empty()) {
      cfg.mode = mode_override;
      aircomp::validate_mode_requirements(cfg);
    }
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (!out_override.empty()) cfg.output_dir = out_override;

    const aircomp::RunOutputs outputs = aircomp::run(cfg);
    for (const auto& f : outputs.files) std::cout << f << '\n';
    return 0;
  } catch (const aircomp::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
