#include <gtest/gtest.h>

#include <filesystem>
#include <string>

#include "gm/errors.hpp"
#include "gm/scenario.hpp"

namespace {

using nlohmann::json;

json base() {
  return json::parse(R"({
    "states": [0, 1],
    "generator": [[0, 0.5], [0.5, 0]],
    "lambda": 5,
    "noise": {"family": "logistic", "scale": 2},
    "initial_belief": [0.5, 0.5],
    "horizon": 10, "seed": 42, "ode_step": 0.01, "fp_tol": 1e-12, "n_paths": 100
  })");
}

std::string config_error(const json& j) {
  try {
    gm::parse_scenario(j);
  } catch (const gm::Error& e) {
    EXPECT_EQ(e.code(), gm::ErrorCode::ConfigError);
    return e.what();
  }
  ADD_FAILURE() << "no error for " << j.dump();
  return {};
}

TEST(Scenario, ParsesAndRoundTrips) {
  const auto cfg = gm::parse_scenario(base());
  EXPECT_EQ(cfg.model.grid.size(), 2u);
  EXPECT_DOUBLE_EQ(cfg.model.q(0, 0), -0.5);
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.n_paths, 100u);
  EXPECT_DOUBLE_EQ(cfg.oracle_step, 1e-3);
  EXPECT_EQ(gm::parse_scenario(gm::to_json(cfg)), cfg);

  auto full = base();
  full["generator"] = json::parse("[[-0.5, 0.5], [0.5, -0.5]]");
  EXPECT_EQ(gm::parse_scenario(full), cfg);
}

TEST(Scenario, NoiseFamiliesRoundTrip) {
  for (const auto& n : {gm::NoiseModel::logistic(1.5), gm::NoiseModel::gaussian(0.3),
                        gm::NoiseModel::laplace(2.0), gm::NoiseModel::two_point(1.0, 0.25),
                        gm::NoiseModel::noise_trader(0.7)}) {
    EXPECT_EQ(gm::parse_noise(gm::to_json(n)), n) << n.name();
  }
}

TEST(Scenario, ErrorsNameTheField) {
  auto j = base();
  j["generator"][1] = json::array({0.5, 0.1});
  EXPECT_NE(config_error(j).find("config.generator[1]"), std::string::npos);

  j = base();
  j["generator"][0][1] = -0.5;
  EXPECT_NE(config_error(j).find("config.generator[0][1]"), std::string::npos);

  j = base();
  j["initial_belief"] = json::array({0.5, 0.6});
  EXPECT_NE(config_error(j).find("initial_belief"), std::string::npos);

  j = base();
  j["states"] = json::array({1, 0});
  EXPECT_NE(config_error(j).find("states"), std::string::npos);

  j = base();
  j["noise"]["family"] = "cauchy";
  EXPECT_NE(config_error(j).find("config.noise.family"), std::string::npos);

  j = base();
  j["noise"]["scale"] = -1;
  EXPECT_NE(config_error(j).find("noise"), std::string::npos);

  j = base();
  j.erase("lambda");
  EXPECT_NE(config_error(j).find("config.lambda"), std::string::npos);

  j = base();
  j["n_paths"] = 0;
  EXPECT_NE(config_error(j).find("config.n_paths"), std::string::npos);
}

TEST(Scenario, ShippedFilesLoad) {
  const std::filesystem::path dir = GM_SCENARIO_DIR;
  const auto def = gm::load_scenario(dir / "default.json");
  EXPECT_EQ(def.seed, 20121121u);
  EXPECT_EQ(def.model.lambda, 5.0);
  gm::load_scenario(dir / "three_state.json");
  const auto cx = gm::load_scenario(dir / "counterexample.json");
  EXPECT_TRUE(cx.model.noise.static_only());
  EXPECT_THROW(gm::load_scenario(dir / "missing.json"), gm::Error);
}

}  // namespace
