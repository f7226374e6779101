// gmsim: scenario-driven command line for the Glosten-Milgrom market-making simulator.
//
//   gmsim check        --config S.json
//   gmsim solve-static --config S.json [--belief 0.75,0.25] [--force] [--roots]
//   gmsim simulate     --config S.json [--seed N] [--paths N] [--out DIR] [--perturb-ask D]
//   gmsim verify       --config S.json [--seed N] [--paths N] [--out DIR] [--perturb-ask D]
//
// Exit codes: 0 success, 1 check/verification failure, 2 config error, 3 numerical failure.

#include <CLI11.hpp>
#include <fmt/core.h>
#include <fmt/os.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "gm/errors.hpp"
#include "gm/kernels.hpp"
#include "gm/scenario.hpp"
#include "gm/static_equilibrium.hpp"
#include "gm/verification.hpp"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> paths;
  std::string out;
  bool force = false;
  bool roots = false;
  std::string belief;
  double perturb_ask = 0.0;
  std::string kernels = "auto";
};

int exit_code_for(const gm::Error& e) {
  switch (e.code()) {
    case gm::ErrorCode::ConfigError: return kExitConfig;
    case gm::ErrorCode::ConditionFailed:
    case gm::ErrorCode::InsufficientData: return kExitFailed;
    default: return kExitNumerical;
  }
}

gm::ScenarioConfig load(const Options& opt) {
  gm::ScenarioConfig cfg = gm::load_scenario(opt.config);
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.paths) cfg.n_paths = *opt.paths;
  return cfg;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw gm::Error(gm::ErrorCode::ConfigError, "--belief: cannot parse '" + item + "'");
    }
  }
  return out;
}

json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double mean_of(const std::vector<double>& p, const gm::StateGrid& grid) {
  double m = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) m += p[i] * grid[i];
  return m;
}

std::filesystem::path out_dir(const Options& opt) {
  std::filesystem::path dir = opt.out.empty() ? std::filesystem::path(".") : std::filesystem::path(opt.out);
  std::filesystem::create_directories(dir);
  return dir;
}

int cmd_check(const Options& opt) {
  const gm::ScenarioConfig cfg = load(opt);
  const auto& m = cfg.model;
  const double c = m.grid.width();
  if (m.noise.static_only()) {
    fmt::print("noise            {} (static only: no density)\n", m.noise.name());
    fmt::print("result           FAIL\n");
    return kExitFailed;
  }
  const gm::ConditionReport r = gm::check_gm_condition(m.noise, c);
  fmt::print("noise            {}\n", m.noise.name());
  fmt::print("C                {}\n", c);
  fmt::print("K                {}\n", r.K);
  fmt::print("K_grid           {}\n", r.K_grid);
  fmt::print("M                {}\n", r.M);
  fmt::print("Phi(C)           {}\n", r.phi_at_C);
  fmt::print("Phi(0)           {}\n", r.phi_at_zero);
  fmt::print("(1-K)Phi(0)      {}\n", r.phi_C_lower_bound);
  if (r.passes) {
    const gm::ContractionConstants k = gm::contraction_constants(m.grid, m.noise, m.lambda);
    fmt::print("L                {}\n", k.L);
    fmt::print("K1               {}\n", k.K1);
    fmt::print("t*               {}\n", k.t_star);
  }
  fmt::print("result           {}\n", r.passes ? "PASS" : "FAIL");
  return r.passes ? kExitOk : kExitFailed;
}

int cmd_solve_static(const Options& opt) {
  const gm::ScenarioConfig cfg = load(opt);
  const auto& m = cfg.model;
  const gm::Belief belief = opt.belief.empty() ? m.initial_belief : gm::Belief(parse_list(opt.belief));
  if (belief.size() != m.grid.size())
    throw gm::Error(gm::ErrorCode::ConfigError, "--belief has the wrong number of entries");

  if (opt.roots) {
    int status = kExitOk;
    for (gm::Side side : {gm::Side::Ask, gm::Side::Bid}) {
      const char* label = side == gm::Side::Ask ? "ask" : "bid";
      try {
        const auto roots = gm::scan_fixed_points(side, belief, m.grid, m.noise);
        fmt::print("{} roots         ", label);
        for (double r : roots) fmt::print(" {:.12g}", r);
        fmt::print("\n");
      } catch (const gm::Error& e) {
        fmt::print("{} roots          error: {}\n", label, e.what());
        status = exit_code_for(e);
      }
    }
    return status;
  }

  gm::SolverOptions so;
  so.tol = cfg.fp_tol;
  so.force = opt.force;
  const gm::StaticSolver solver(m.grid, m.noise, so);
  const gm::FixedPoint ask = solver.ask(belief.probs());
  const gm::FixedPoint bid = solver.bid(belief.probs());
  const int digits = std::max(1, static_cast<int>(std::ceil(-std::log10(cfg.fp_tol))));
  fmt::print("ask              {:.{}f}  ({} iterations)\n", ask.price, digits, ask.iterations);
  fmt::print("bid              {:.{}f}  ({} iterations)\n", bid.price, digits, bid.iterations);
  fmt::print("spread           {:.{}f}\n", ask.price - bid.price, digits);
  fmt::print("mean             {:.{}f}\n", belief.mean(m.grid), digits);
  return kExitOk;
}

json event_json(std::size_t path, const gm::EventRecord& ev) {
  json j;
  j["path"] = path;
  j["t"] = ev.time;
  j["x"] = ev.true_value;
  j["eps"] = number_or_inf(ev.epsilon);
  j["ask"] = ev.quote.ask;
  j["bid"] = ev.quote.bid;
  j["outcome"] = std::string(gm::to_string(ev.outcome));
  j["belief_before"] = ev.belief_before;
  j["belief_after"] = ev.belief_after;
  j["profit"] = ev.profit;
  return j;
}

int cmd_simulate(const Options& opt) {
  const gm::ScenarioConfig cfg = load(opt);
  gm::SimConfig sim = cfg.sim_config();
  sim.perturb_ask = opt.perturb_ask;
  sim.record_trajectory = true;
  sim.sample_interval = 0.0;
  const auto paths = gm::simulate_batch(cfg.model, cfg.horizon, sim, cfg.seed, cfg.n_paths);

  const auto dir = out_dir(opt);
  {
    std::ofstream events(dir / "events.jsonl");
    for (std::size_t p = 0; p < paths.size(); ++p)
      for (const auto& ev : paths[p].events) events << event_json(p, ev).dump() << '\n';
  }
  {
    auto summary = fmt::output_file((dir / "summary.csv").string());
    summary.print("path,seed,n_events,n_buys,n_sells,buy_profit_sum,sell_profit_sum\n");
    for (std::size_t p = 0; p < paths.size(); ++p) {
      const auto& r = paths[p];
      summary.print("{},{},{},{},{},{},{}\n", p, r.seed, r.events.size(), r.n_buys, r.n_sells,
                    r.buy_profit_sum, r.sell_profit_sum);
    }
  }
  {
    auto plot = fmt::output_file((dir / "plot.csv").string());
    plot.print("path,time,ask,bid,mean,true_value\n");
    for (std::size_t p = 0; p < paths.size(); ++p) {
      const auto& r = paths[p];
      for (const auto& pt : r.trajectory) {
        plot.print("{},{},{},{},{},{}\n", p, pt.time, pt.quote.ask, pt.quote.bid,
                   mean_of(pt.belief, cfg.model.grid),
                   cfg.model.grid[r.true_path.state_at(pt.time)]);
      }
    }
  }
  std::size_t buys = 0;
  std::size_t sells = 0;
  std::size_t events = 0;
  for (const auto& r : paths) {
    buys += r.n_buys;
    sells += r.n_sells;
    events += r.events.size();
  }
  fmt::print("paths            {}\n", paths.size());
  fmt::print("arrivals         {}\n", events);
  fmt::print("buys / sells     {} / {}\n", buys, sells);
  fmt::print("output           {}\n", dir.string());
  return kExitOk;
}

int cmd_verify(const Options& opt) {
  const gm::ScenarioConfig cfg = load(opt);
  const auto& m = cfg.model;
  json report;
  bool all_pass = true;
  auto line = [](const char* name, bool ok, const std::string& detail) {
    fmt::print("[{}] {:<18} {}\n", ok ? "PASS" : "FAIL", name, detail);
  };

  gm::SimConfig sim = cfg.sim_config();
  sim.perturb_ask = opt.perturb_ask;
  sim.sample_interval = 0.0;
  const auto paths = gm::simulate_batch(m, cfg.horizon, sim, cfg.seed, cfg.n_paths);

  // Zero expected profit, side by side.
  try {
    const auto z = gm::zero_profit_test(paths);
    report["zero_profit"] = {{"pass", z.pass},         {"n_paths", z.n_paths},
                             {"n_buys", z.n_buys},     {"n_sells", z.n_sells},
                             {"buy_mean", z.buy_mean}, {"buy_se", z.buy_se},
                             {"sell_mean", z.sell_mean}, {"sell_se", z.sell_se},
                             {"z_buy", z.z_buy},       {"z_sell", z.z_sell}};
    line("zero_profit", z.pass, fmt::format("z_buy={:.3f} z_sell={:.3f} ({} buys, {} sells)", z.z_buy,
                                            z.z_sell, z.n_buys, z.n_sells));
    all_pass &= z.pass;
  } catch (const gm::Error& e) {
    report["zero_profit"] = {{"pass", false}, {"error", e.what()}};
    line("zero_profit", false, e.what());
    all_pass = false;
  }

  // Quote = posterior mean right after each trade.
  const auto qc = gm::quote_consistency(paths, m.grid);
  const bool qc_ok = qc.max_deviation <= 1e-8;
  report["quote_consistency"] = {{"pass", qc_ok}, {"n_trades", qc.n_trades}, {"max_deviation", qc.max_deviation}};
  line("quote_consistency", qc_ok, fmt::format("max |price - mean| = {:.3e} over {} trades", qc.max_deviation, qc.n_trades));
  all_pass &= qc_ok;

  // Engine filter vs independent split-step oracle on the first path.
  gm::SimConfig traced = sim;
  traced.record_trajectory = true;
  traced.sample_interval = cfg.sample_interval > 0.0 ? cfg.sample_interval : 0.01;
  const gm::PathRecord reference = gm::simulate_gmps_path(m, cfg.horizon, traced, cfg.seed);
  try {
    const gm::OracleFilterConfig oc{cfg.oracle_step, 16};
    const auto oracle = gm::oracle_filter(reference, m, oc, reference.sample_times);
    const double dist = gm::compare_filters(gm::engine_belief_path(reference), oracle);
    const bool ok = dist <= 0.01;
    report["filter_oracle"] = {{"pass", ok}, {"max_l1", dist}, {"oracle_step", cfg.oracle_step}};
    line("filter_oracle", ok, fmt::format("max L1 = {:.3e} at h = {}", dist, cfg.oracle_step));
    all_pass &= ok;
  } catch (const gm::Error& e) {
    report["filter_oracle"] = {{"pass", false}, {"error", e.what()}};
    line("filter_oracle", false, e.what());
    all_pass = false;
  }

  // Trade intensity against a frozen quote and frozen state.
  try {
    gm::SolverOptions so;
    so.tol = cfg.fp_tol;
    const gm::Quote quote = gm::StaticSolver(m.grid, m.noise, so).quote(m.initial_belief.probs());
    const double rate = gm::buy_intensity(quote, m.grid[0], m.lambda, m.noise);
    if (!(rate > 0.0)) throw gm::Error(gm::ErrorCode::InsufficientData, "zero buy intensity");
    const double horizon = std::max(cfg.horizon, 40.0 / rate);
    const auto it = gm::intensity_test(m, quote, 0, horizon, 500, cfg.seed);
    report["intensity"] = {{"pass", it.pass},
                           {"buy_expected", it.buys.expected_mean},
                           {"buy_observed", it.buys.observed_mean},
                           {"buy_p_value", it.buys.p_value},
                           {"sell_evaluated", it.sells.evaluated},
                           {"sell_expected", it.sells.expected_mean},
                           {"sell_observed", it.sells.observed_mean},
                           {"sell_p_value", it.sells.p_value}};
    line("intensity", it.pass, fmt::format("buy p={:.3f} sell p={:.3f}", it.buys.p_value, it.sells.p_value));
    all_pass &= it.pass;
  } catch (const gm::Error& e) {
    report["intensity"] = {{"pass", false}, {"error", e.what()}};
    line("intensity", false, e.what());
    all_pass = false;
  }

  // Simplex conservation and spread ordering.
  std::vector<gm::PathRecord> checked(paths.begin(), paths.end());
  checked.push_back(reference);
  const auto sc = gm::simplex_check(checked, m.grid);
  const bool sc_ok = sc.max_sum_deviation <= 1e-9 && sc.min_pre_clamp >= -1e-12 &&
                     sc.max_spread_violation <= cfg.fp_tol;
  report["conservation"] = {{"pass", sc_ok},
                            {"n_beliefs", sc.n_beliefs},
                            {"max_sum_deviation", sc.max_sum_deviation},
                            {"min_pre_clamp", sc.min_pre_clamp},
                            {"max_spread_violation", sc.max_spread_violation}};
  line("conservation", sc_ok, fmt::format("|sum-1| <= {:.1e}, min pre-clamp {:.1e}", sc.max_sum_deviation, sc.min_pre_clamp));
  all_pass &= sc_ok;

  report["pass"] = all_pass;
  report["seed"] = cfg.seed;
  report["perturb_ask"] = opt.perturb_ask;
  if (!opt.out.empty()) {
    std::ofstream(out_dir(opt) / "verify.json") << report.dump(2) << '\n';
  }
  fmt::print("{}\n", report.dump(2));
  return all_pass ? kExitOk : kExitFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Continuous-time Glosten-Milgrom market-making simulator"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--kernels", opt.kernels, "Vector kernel backend: auto, scalar, avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  auto add_config = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  };
  auto add_run = [&opt](CLI::App* sub) {
    sub->add_option("--seed", opt.seed, "Override the scenario seed");
    sub->add_option("--paths", opt.paths, "Override the number of paths")->check(CLI::PositiveNumber);
    sub->add_option("--out", opt.out, "Output directory");
    sub->add_option("--perturb-ask", opt.perturb_ask, "Add DELTA to every quoted ask (negative control)");
  };

  auto* check = app.add_subcommand("check", "Check the existence/uniqueness condition and print constants");
  add_config(check);
  auto* solve = app.add_subcommand("solve-static", "Solve the static ask/bid fixed points");
  add_config(solve);
  solve->add_option("--belief", opt.belief, "Comma-separated belief overriding initial_belief");
  solve->add_flag("--force", opt.force, "Allow static-only (discrete) noise");
  solve->add_flag("--roots", opt.roots, "List every fixed point found by a scan");
  auto* simulate = app.add_subcommand("simulate", "Simulate paths; write events.jsonl, summary.csv, plot.csv");
  add_config(simulate);
  add_run(simulate);
  auto* verify = app.add_subcommand("verify", "Run the statistical verification suite");
  add_config(verify);
  add_run(verify);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  const auto backend = opt.kernels == "scalar" ? gm::kernels::Backend::Scalar
                       : opt.kernels == "avx2" ? gm::kernels::Backend::Avx2
                                               : gm::kernels::Backend::Auto;
  if (!gm::kernels::select(backend)) {
    std::cerr << "error: kernel backend '" << opt.kernels << "' is not available on this CPU\n";
    return kExitConfig;
  }

  try {
    if (*check) return cmd_check(opt);
    if (*solve) return cmd_solve_static(opt);
    if (*simulate) return cmd_simulate(opt);
    if (*verify) return cmd_verify(opt);
  } catch (const gm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}
