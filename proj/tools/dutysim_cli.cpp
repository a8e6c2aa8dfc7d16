// dutysim: train / simulate / bench front end.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dutysim/dutysim.hpp"

namespace {

using nlohmann::ordered_json;
using namespace dutysim;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  bool json = false;
};

SimConfig load_base(const CommonArgs& a) {
  SimConfig cfg = a.config.empty() ? SimConfig{} : load_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  return cfg;
}

void check_ratio(double r) {
  if (!(r >= 0.0 && r <= 1.0)) throw UsageError("anomaly ratio must lie in [0, 1]");
}

/// "1-30" or "3,5,8" (ranges may be mixed: "1-5,9").
std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  auto number = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
      throw UsageError("bad seed list '" + text + "'");
    }
    return v;
  };
  std::vector<std::uint64_t> out;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (const auto dash = item.find('-'); dash != std::string_view::npos) {
      const auto lo = number(item.substr(0, dash));
      const auto hi = number(item.substr(dash + 1));
      if (hi < lo || hi - lo > 1'000'000) throw UsageError("bad seed range '" + std::string(item) + "'");
      for (auto s = lo; s <= hi; ++s) out.push_back(s);
    } else {
      out.push_back(number(item));
    }
  }
  if (out.empty()) throw UsageError("seed list is empty");
  return out;
}

PolicyKind policy_from(const std::string& name) {
  const auto k = parse_policy_kind(name);
  if (!k) throw UsageError("unknown policy '" + name + "' (static, dynamic, autonomous)");
  return *k;
}

ordered_json ledger_json(const EnergyLedger& l) {
  return {{"sleep_uwh", l.sleep.as_uwh()},   {"capture_uwh", l.capture.as_uwh()}, {"infer_uwh", l.infer.as_uwh()},
          {"upload_uwh", l.upload.as_uwh()}, {"train_uwh", l.train.as_uwh()},     {"total_uwh", l.total().as_uwh()}};
}

ordered_json counts_json(const EventCounts& c) {
  return {{"samples", c.samples},
          {"anomalies", c.anomalies},
          {"onboard", c.onboard_classified},
          {"uploads", c.uploads},
          {"retrain_attempts", c.retrain_attempts},
          {"retrain_success", c.retrain_successes},
          {"decisions", c.decisions}};
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  CommonArgs common;
  std::optional<double> ratio;
  std::optional<std::uint32_t> episodes;
  std::string out;
};

int cmd_train(const TrainArgs& a) {
  SimConfig cfg = load_base(a.common);
  if (a.ratio) {
    check_ratio(*a.ratio);
    cfg.anomaly_ratio = *a.ratio;
  }
  if (a.episodes) cfg.training.episodes = *a.episodes;

  const TrainingResult t = train_qtable(cfg);
  write_qtable(a.out, t.table);

  if (a.common.json) {
    ordered_json j = {{"out", a.out},
                      {"bytes", kQTableFileBytes},
                      {"episodes", t.episodes},
                      {"decision_steps", t.decision_steps},
                      {"epsilon", t.hyperparams.epsilon()},
                      {"alpha", t.hyperparams.alpha()},
                      {"visited_states", t.visited_states()},
                      {"coverage", t.coverage()},
                      {"reference_uwh", t.reference_uwh},
                      {"anomaly_ratio", cfg.anomaly_ratio},
                      {"seed", cfg.seed}};
    std::cout << j.dump(2) << '\n';
  } else {
    std::printf("wrote %s (%zu bytes)\n", a.out.c_str(), kQTableFileBytes);
    std::printf("episodes        %u (ratio %.4g, seed %llu, decay per %s)\n", t.episodes, cfg.anomaly_ratio,
                static_cast<unsigned long long>(cfg.seed), std::string(to_string(cfg.training.decay)).c_str());
    std::printf("decision steps  %llu\n", static_cast<unsigned long long>(t.decision_steps));
    std::printf("final epsilon   %.6g\n", t.hyperparams.epsilon());
    std::printf("final alpha     %.6g\n", t.hyperparams.alpha());
    std::printf("coverage        %zu/100 states (%.0f%%)\n", t.visited_states(), t.coverage() * 100.0);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  CommonArgs common;
  std::optional<std::string> policy;
  std::optional<double> ratio;
  std::string qtable;
};

int cmd_simulate(const SimulateArgs& a) {
  SimConfig cfg = load_base(a.common);
  if (a.policy) cfg.policy = policy_from(*a.policy);
  if (a.ratio) {
    check_ratio(*a.ratio);
    cfg.anomaly_ratio = *a.ratio;
  }
  if (cfg.policy == PolicyKind::kAutonomous) {
    if (a.qtable.empty()) throw UsageError("the autonomous policy needs --qtable (see 'train')");
    cfg.qtable = read_qtable(a.qtable);
  } else if (!a.qtable.empty()) {
    throw UsageError("--qtable only applies to the autonomous policy");
  }

  const SimResult r = run_episode(cfg);
  const double total = static_cast<double>(r.ledger.total().as_uwh());
  auto pct = [&](Energy e) { return total > 0.0 ? static_cast<double>(e.as_uwh()) / total * 100.0 : 0.0; };

  if (a.common.json) {
    ordered_json j = {{"policy", to_string(cfg.policy)},
                      {"anomaly_ratio", cfg.anomaly_ratio},
                      {"seed", cfg.seed},
                      {"iterations", r.iterations},
                      {"battery_life_hours", r.battery_life_hours},
                      {"years_365d", r.battery_life_hours / kHoursPerYear},
                      {"years_365_25d", r.battery_life_hours / kHoursPerJulianYear},
                      {"remaining_uwh", r.remaining.as_uwh()},
                      {"ledger", ledger_json(r.ledger)},
                      {"counts", counts_json(r.counts)}};
    std::cout << j.dump(2) << '\n';
    return kExitOk;
  }

  std::printf("policy %s, anomaly ratio %.4g, seed %llu\n", std::string(to_string(cfg.policy)).c_str(),
              cfg.anomaly_ratio, static_cast<unsigned long long>(cfg.seed));
  std::printf("battery life    %.0f h  (%.3f y at 365 d, %.3f y at 365.25 d)\n", r.battery_life_hours,
              r.battery_life_hours / kHoursPerYear, r.battery_life_hours / kHoursPerJulianYear);
  std::printf("energy          sleep %.2f%%  capture %.2f%%  infer %.2f%%  upload %.2f%%  train %.2f%%\n",
              pct(r.ledger.sleep), pct(r.ledger.capture), pct(r.ledger.infer), pct(r.ledger.upload),
              pct(r.ledger.train));
  std::printf("events          %llu anomalies, %llu onboard, %llu uploads, %llu/%llu retrains passed\n",
              static_cast<unsigned long long>(r.counts.anomalies),
              static_cast<unsigned long long>(r.counts.onboard_classified),
              static_cast<unsigned long long>(r.counts.uploads),
              static_cast<unsigned long long>(r.counts.retrain_successes),
              static_cast<unsigned long long>(r.counts.retrain_attempts));
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct BenchArgs {
  CommonArgs common;
  std::vector<double> ratios{0.05, 0.10, 0.20, 0.40};
  std::vector<std::string> policies{"static", "dynamic", "autonomous"};
  std::string seeds = "1-10";
  std::optional<std::uint32_t> episodes;
  std::string qtable;
  std::string out;
  unsigned threads = 0;
};

int cmd_bench(const BenchArgs& a) {
  SimConfig cfg = load_base(a.common);
  if (a.episodes) cfg.training.episodes = *a.episodes;

  BenchOptions opts;
  opts.ratios = a.ratios;
  for (double r : opts.ratios) check_ratio(r);
  opts.policies.clear();
  for (const auto& p : a.policies) opts.policies.push_back(policy_from(p));
  opts.seeds = parse_seed_list(a.seeds);
  opts.threads = a.threads;
  if (!a.qtable.empty()) opts.qtable = read_qtable(a.qtable);

  const BenchReport report = run_bench(cfg, opts);
  const BenchFiles files = write_bench_files(a.out, report);

  const bool has_auto = report.has(PolicyKind::kAutonomous);
  if (a.common.json) {
    ordered_json cells = ordered_json::array();
    for (PolicyKind p : report.policies) {
      for (double r : report.ratios) {
        const MeanStd c = report.cell(p, r);
        cells.push_back({{"policy", to_string(p)}, {"anomaly_ratio", r}, {"mean_hours", c.mean}, {"stddev_hours", c.stddev}});
      }
    }
    ordered_json avg = ordered_json::object();
    for (PolicyKind p : report.policies) avg[std::string(to_string(p))] = report.average(p);
    ordered_json j = {{"seeds", report.seeds.size()}, {"cells", cells}, {"average_hours", avg}};
    if (has_auto && report.has(PolicyKind::kStatic)) {
      j["improvement_vs_static_pct"] =
          improvement_pct(report.average(PolicyKind::kAutonomous), report.average(PolicyKind::kStatic));
    }
    if (has_auto && report.has(PolicyKind::kDynamic)) {
      j["improvement_vs_dynamic_pct"] =
          improvement_pct(report.average(PolicyKind::kAutonomous), report.average(PolicyKind::kDynamic));
    }
    j["files"] = {files.results.string(), files.summary.string(), files.energy_breakdown.string(),
                  files.retrain_events.string()};
    std::cout << j.dump(2) << '\n';
    return kExitOk;
  }

  std::printf("%zu seeds, mean battery life in hours\n\n%-8s", report.seeds.size(), "ratio");
  for (PolicyKind p : report.policies) std::printf(" %12s", std::string(to_string(p)).c_str());
  std::printf("\n");
  for (double r : report.ratios) {
    std::printf("%-8.4g", r);
    for (PolicyKind p : report.policies) std::printf(" %12.1f", report.cell(p, r).mean);
    std::printf("\n");
  }
  std::printf("%-8s", "avg");
  for (PolicyKind p : report.policies) std::printf(" %12.1f", report.average(p));
  std::printf("\n%-8s", "years");
  for (PolicyKind p : report.policies) std::printf(" %12.3f", report.average(p) / kHoursPerYear);
  std::printf("\n\n");
  if (has_auto && report.has(PolicyKind::kStatic)) {
    std::printf("autonomous vs static   %+.2f%%\n",
                improvement_pct(report.average(PolicyKind::kAutonomous), report.average(PolicyKind::kStatic)));
  }
  if (has_auto && report.has(PolicyKind::kDynamic)) {
    std::printf("autonomous vs dynamic  %+.2f%%\n",
                improvement_pct(report.average(PolicyKind::kAutonomous), report.average(PolicyKind::kDynamic)));
  }
  std::printf("wrote %s\n", a.out.c_str());
  return kExitOk;
}

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "key = value configuration file")->check(CLI::ExistingFile);
  cmd->add_flag("--json", a.json, "print machine-readable JSON instead of text");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Duty-cycle and retraining policy simulator for battery-powered anomaly-detection nodes"};
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "train a Q-table offline and write it to disk");
  add_common(train_cmd, train.common);
  train_cmd->add_option("--seed", train.common.seed, "training seed (default: config seed)");
  train_cmd->add_option("--ratio", train.ratio, "anomaly ratio used for training");
  train_cmd->add_option("--episodes", train.episodes, "training episodes");
  train_cmd->add_option("--out", train.out, "output Q-table file")->required();

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "run one episode to battery exhaustion");
  add_common(sim_cmd, sim.common);
  sim_cmd->add_option("--seed", sim.common.seed, "episode seed (default: config seed)");
  sim_cmd->add_option("--policy", sim.policy, "static | dynamic | autonomous");
  sim_cmd->add_option("--ratio", sim.ratio, "anomaly ratio");
  sim_cmd->add_option("--qtable", sim.qtable, "Q-table file (autonomous only)");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "run the policy x ratio x seed matrix and write CSV reports");
  add_common(bench_cmd, bench.common);
  bench_cmd->add_option("--seed", bench.common.seed, "training seed (default: config seed)");
  bench_cmd->add_option("--seeds", bench.seeds, "episode seeds, e.g. 1-30 or 1,4,9")->capture_default_str();
  bench_cmd->add_option("--ratios", bench.ratios, "anomaly ratios")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--policies", bench.policies, "policies")->delimiter(',')->capture_default_str();
  bench_cmd->add_option("--episodes", bench.episodes, "training episodes per ratio");
  bench_cmd->add_option("--qtable", bench.qtable, "use this Q-table for every ratio instead of training");
  bench_cmd->add_option("--threads", bench.threads, "worker threads (0 = all cores)");
  bench_cmd->add_option("--out", bench.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (train_cmd->parsed()) return cmd_train(train);
    if (sim_cmd->parsed()) return cmd_simulate(sim);
    if (bench_cmd->parsed()) return cmd_bench(bench);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}
