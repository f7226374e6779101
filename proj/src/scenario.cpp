#include "gm/scenario.hpp"

#include <cmath>
#include <fstream>

#include "gm/errors.hpp"

namespace gm {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::ConfigError, "config." + where + ": " + what);
}

const json& field(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) fail(where.empty() ? key : where + "." + key, "missing");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "must be finite");
  return v;
}

double number_field(const json& j, const std::string& key, const std::string& where) {
  return number(field(j, key, where), where.empty() ? key : where + "." + key);
}

std::vector<double> number_list(const json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i)
    out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

template <class F>
auto wrap(const std::string& where, F&& make) {
  try {
    return make();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::DomainError)
      fail(where, e.what());
    throw;
  }
}

}  // namespace

NoiseModel parse_noise(const json& j, const std::string& where) {
  const json& fam = field(j, "family", where);
  if (!fam.is_string()) fail(where + ".family", "expected a string");
  const std::string family = fam.get<std::string>();
  return wrap(where, [&] {
    if (family == "logistic") return NoiseModel::logistic(number_field(j, "scale", where));
    if (family == "gaussian") return NoiseModel::gaussian(number_field(j, "sigma", where));
    if (family == "laplace") return NoiseModel::laplace(number_field(j, "scale", where));
    if (family == "two_point")
      return NoiseModel::two_point(number_field(j, "value", where), number_field(j, "prob", where));
    if (family == "noise_trader") return NoiseModel::noise_trader(number_field(j, "buy_prob", where));
    fail(where + ".family", "unknown family '" + family + "'");
  });
}

json to_json(const NoiseModel& noise) {
  json j;
  j["family"] = noise.name();
  std::visit(
      [&j](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, noise::Logistic>) j["scale"] = f.scale;
        if constexpr (std::is_same_v<T, noise::Gaussian>) j["sigma"] = f.sigma;
        if constexpr (std::is_same_v<T, noise::Laplace>) j["scale"] = f.scale;
        if constexpr (std::is_same_v<T, noise::TwoPointDiscrete>) {
          j["value"] = f.value;
          j["prob"] = f.prob;
        }
        if constexpr (std::is_same_v<T, noise::NoiseTraderMix>) j["buy_prob"] = f.buy_prob;
      },
      noise.family());
  return j;
}

ScenarioConfig parse_scenario(const json& j) {
  if (!j.is_object()) fail("", "top level must be an object");

  StateGrid grid = wrap("states", [&] { return StateGrid(number_list(field(j, "states", ""), "states")); });
  const std::size_t n = grid.size();

  const json& gen = field(j, "generator", "");
  if (!gen.is_array() || gen.size() != n) fail("generator", "expected " + std::to_string(n) + " rows");
  std::vector<double> rates;
  std::vector<double> supplied_diag(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string row_where = "generator[" + std::to_string(i) + "]";
    const std::vector<double> row = number_list(gen[i], row_where);
    if (row.size() != n) fail(row_where, "expected " + std::to_string(n) + " entries");
    for (std::size_t k = 0; k < n; ++k) {
      if (k != i && row[k] < 0.0)
        fail(row_where + "[" + std::to_string(k) + "]", "rate must be >= 0");
    }
    supplied_diag[i] = row[i];
    rates.insert(rates.end(), row.begin(), row.end());
  }
  GeneratorMatrix q = GeneratorMatrix::from_off_diagonal(n, rates);
  for (std::size_t i = 0; i < n; ++i) {
    if (supplied_diag[i] != 0.0 && std::abs(supplied_diag[i] - q(i, i)) > 1e-12)
      fail("generator[" + std::to_string(i) + "]", "row does not sum to 0");
  }

  const double lambda = number_field(j, "lambda", "");
  if (lambda < 0.0) fail("lambda", "must be >= 0");
  NoiseModel noise = parse_noise(field(j, "noise", ""), "noise");

  std::vector<double> init = number_list(field(j, "initial_belief", ""), "initial_belief");
  if (init.size() != n) fail("initial_belief", "expected " + std::to_string(n) + " entries");
  Belief belief = wrap("initial_belief", [&] { return Belief(init); });

  ScenarioConfig cfg{MarketModel{std::move(grid), std::move(q), lambda, std::move(noise), std::move(belief)}};
  cfg.horizon = number_field(j, "horizon", "");
  if (!(cfg.horizon > 0.0)) fail("horizon", "must be > 0");

  const json& seed = field(j, "seed", "");
  if (!seed.is_number_integer()) fail("seed", "expected an integer");
  cfg.seed = seed.is_number_unsigned() ? seed.get<std::uint64_t>()
                                       : static_cast<std::uint64_t>(seed.get<std::int64_t>());

  cfg.ode_step = number_field(j, "ode_step", "");
  if (!(cfg.ode_step > 0.0)) fail("ode_step", "must be > 0");
  cfg.fp_tol = number_field(j, "fp_tol", "");
  if (!(cfg.fp_tol > 0.0)) fail("fp_tol", "must be > 0");

  const json& paths = field(j, "n_paths", "");
  if (!paths.is_number_integer() || paths.get<std::int64_t>() < 1) fail("n_paths", "expected an integer >= 1");
  cfg.n_paths = paths.get<std::size_t>();

  if (j.contains("oracle_step")) {
    cfg.oracle_step = number_field(j, "oracle_step", "");
    if (!(cfg.oracle_step > 0.0)) fail("oracle_step", "must be > 0");
  }
  if (j.contains("sample_interval")) {
    cfg.sample_interval = number_field(j, "sample_interval", "");
    if (cfg.sample_interval < 0.0) fail("sample_interval", "must be >= 0");
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
  return parse_scenario(j);
}

json to_json(const ScenarioConfig& cfg) {
  const MarketModel& m = cfg.model;
  const std::size_t n = m.grid.size();
  json j;
  j["states"] = std::vector<double>(m.grid.values().begin(), m.grid.values().end());
  json gen = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(n);
    for (std::size_t k = 0; k < n; ++k) row[k] = m.q(i, k);
    gen.push_back(row);
  }
  j["generator"] = gen;
  j["lambda"] = m.lambda;
  j["noise"] = to_json(m.noise);
  j["initial_belief"] =
      std::vector<double>(m.initial_belief.probs().begin(), m.initial_belief.probs().end());
  j["horizon"] = cfg.horizon;
  j["seed"] = cfg.seed;
  j["ode_step"] = cfg.ode_step;
  j["fp_tol"] = cfg.fp_tol;
  j["n_paths"] = cfg.n_paths;
  j["oracle_step"] = cfg.oracle_step;
  j["sample_interval"] = cfg.sample_interval;
  return j;
}

SimConfig ScenarioConfig::sim_config() const {
  SimConfig s;
  s.ode_step = ode_step;
  s.fp_tol = fp_tol;
  s.sample_interval = sample_interval;
  return s;
}

}  // namespace gm
