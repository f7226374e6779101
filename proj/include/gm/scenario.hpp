#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "gm/market_sim.hpp"

namespace gm {

/// One simulation scenario as read from a JSON file:
///
///   {
///     "states": [0, 1],
///     "generator": [[0, 0.5], [0.5, 0]],   // off-diagonal rates; diagonal derived
///     "lambda": 5,
///     "noise": {"family": "logistic", "scale": 2},
///     "initial_belief": [0.5, 0.5],
///     "horizon": 10, "seed": 42, "ode_step": 0.01, "fp_tol": 1e-12, "n_paths": 100
///   }
///
/// Optional keys: "oracle_step" (1e-3), "sample_interval" (0.01).
/// A non-zero diagonal entry in "generator" must equal minus the row's off-diagonal sum.
struct ScenarioConfig {
  MarketModel model;
  double horizon = 10.0;
  std::uint64_t seed = 1;
  double ode_step = 0.01;
  double fp_tol = 1e-12;
  std::size_t n_paths = 1;
  double oracle_step = 1e-3;
  double sample_interval = 0.01;

  SimConfig sim_config() const;
  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Throws Error(ConfigError) with the offending field path in the message.
ScenarioConfig parse_scenario(const nlohmann::json& j);
ScenarioConfig load_scenario(const std::filesystem::path& path);
nlohmann::json to_json(const ScenarioConfig& cfg);
nlohmann::json to_json(const NoiseModel& noise);
NoiseModel parse_noise(const nlohmann::json& j, const std::string& where = "noise");

}  // namespace gm
