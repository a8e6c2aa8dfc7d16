#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dutysim/engine.hpp"

namespace dutysim {

inline constexpr double kHoursPerYear = 8760.0;        // 365 d
inline constexpr double kHoursPerJulianYear = 8766.0;  // 365.25 d

/// Percentage gain of `candidate` over `baseline`.
inline double improvement_pct(double candidate, double baseline) { return (candidate - baseline) / baseline * 100.0; }

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single value
  std::size_t n = 0;

  double standard_error() const { return n == 0 ? 0.0 : stddev / std::sqrt(static_cast<double>(n)); }
};

inline MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd out;
  out.n = xs.size();
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return out;
}

struct BenchOptions {
  std::vector<double> ratios{0.05, 0.10, 0.20, 0.40};
  std::vector<PolicyKind> policies{PolicyKind::kStatic, PolicyKind::kDynamic, PolicyKind::kAutonomous};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  /// Table used for every ratio; when empty one is trained per ratio.
  std::optional<QTable> qtable;
  unsigned threads = 0;
};

struct EpisodeRecord {
  PolicyKind policy;
  double ratio;
  std::uint64_t seed;
  SimResult result;
};

struct BenchReport {
  std::vector<double> ratios;
  std::vector<PolicyKind> policies;
  std::vector<std::uint64_t> seeds;
  /// policy-major, then ratio, then seed.
  std::vector<EpisodeRecord> episodes;
  /// Training runs keyed by ratio (autonomous only, when trained here).
  std::vector<std::pair<double, TrainingResult>> training;

  std::vector<double> lives(PolicyKind p, double ratio) const {
    std::vector<double> out;
    for (const auto& e : episodes) {
      if (e.policy == p && e.ratio == ratio) out.push_back(e.result.battery_life_hours);
    }
    return out;
  }

  MeanStd cell(PolicyKind p, double ratio) const { return mean_std(lives(p, ratio)); }

  /// Mean over ratios of the per-ratio seed means.
  double average(PolicyKind p) const {
    double sum = 0.0;
    for (double r : ratios) sum += cell(p, r).mean;
    return ratios.empty() ? 0.0 : sum / static_cast<double>(ratios.size());
  }

  bool has(PolicyKind p) const { return std::find(policies.begin(), policies.end(), p) != policies.end(); }
};

inline BenchReport run_bench(const SimConfig& base, const BenchOptions& opts) {
  if (opts.ratios.empty() || opts.policies.empty() || opts.seeds.empty()) {
    throw std::invalid_argument("benchmark matrix needs at least one ratio, policy and seed");
  }
  base.validate();
  BenchReport report;
  report.ratios = opts.ratios;
  report.policies = opts.policies;
  report.seeds = opts.seeds;

  std::vector<SimConfig> configs;
  for (PolicyKind p : opts.policies) {
    for (double ratio : opts.ratios) {
      SimConfig c = base;
      c.policy = p;
      c.anomaly_ratio = ratio;
      if (p == PolicyKind::kAutonomous) {
        if (opts.qtable) {
          c.qtable = opts.qtable;
        } else {
          TrainingResult t = train_qtable(c);
          c.qtable = t.table;
          report.training.emplace_back(ratio, std::move(t));
        }
      }
      configs.push_back(std::move(c));
    }
  }

  EpisodeOptions eo;
  eo.trace = true;
  std::vector<SimResult> results = run_sweep(configs, opts.seeds, opts.threads, eo);
  report.episodes.reserve(results.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    const SimConfig& c = configs[i / opts.seeds.size()];
    report.episodes.push_back({c.policy, c.anomaly_ratio, opts.seeds[i % opts.seeds.size()], std::move(results[i])});
  }
  return report;
}

// ---------------------------------------------------------------------------
// CSV output. Formatting is locale-independent and fixed so reruns are
// byte-identical.

namespace csv {

inline std::string real(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), ptr);
}

inline std::string fixed(double v, int decimals) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, decimals);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf.data(), ptr);
}

}  // namespace csv

inline constexpr std::string_view kResultsHeader =
    "policy,anomaly_ratio,seed,battery_life_hours,e_sleep_uwh,e_capture_uwh,e_infer_uwh,e_upload_uwh,e_train_uwh,"
    "n_samples,n_anomalies,n_onboard,n_uploads,n_retrain_attempts,n_retrain_success";

inline void write_results_csv(std::ostream& out, const BenchReport& report) {
  out << kResultsHeader << '\n';
  for (const auto& e : report.episodes) {
    const auto& r = e.result;
    out << to_string(e.policy) << ',' << csv::real(e.ratio) << ',' << e.seed << ',' << csv::real(r.battery_life_hours)
        << ',' << r.ledger.sleep.as_uwh() << ',' << r.ledger.capture.as_uwh() << ',' << r.ledger.infer.as_uwh() << ','
        << r.ledger.upload.as_uwh() << ',' << r.ledger.train.as_uwh() << ',' << r.counts.samples << ','
        << r.counts.anomalies << ',' << r.counts.onboard_classified << ',' << r.counts.uploads << ','
        << r.counts.retrain_attempts << ',' << r.counts.retrain_successes << '\n';
  }
}

/// Battery-life matrix (ratio rows, policy mean/stddev columns), an `avg`
/// row, and autonomous improvement columns when the baselines are present.
inline void write_summary_csv(std::ostream& out, const BenchReport& report) {
  const bool vs_static = report.has(PolicyKind::kAutonomous) && report.has(PolicyKind::kStatic);
  const bool vs_dynamic = report.has(PolicyKind::kAutonomous) && report.has(PolicyKind::kDynamic);

  out << "anomaly_ratio";
  for (PolicyKind p : report.policies) out << ',' << to_string(p) << "_mean_hours," << to_string(p) << "_stddev_hours";
  if (vs_static) out << ",autonomous_vs_static_pct";
  if (vs_dynamic) out << ",autonomous_vs_dynamic_pct";
  out << '\n';

  for (double ratio : report.ratios) {
    out << csv::real(ratio);
    for (PolicyKind p : report.policies) {
      const MeanStd c = report.cell(p, ratio);
      out << ',' << csv::fixed(c.mean, 3) << ',' << csv::fixed(c.stddev, 3);
    }
    const double a = report.cell(PolicyKind::kAutonomous, ratio).mean;
    if (vs_static) out << ',' << csv::fixed(improvement_pct(a, report.cell(PolicyKind::kStatic, ratio).mean), 4);
    if (vs_dynamic) out << ',' << csv::fixed(improvement_pct(a, report.cell(PolicyKind::kDynamic, ratio).mean), 4);
    out << '\n';
  }

  out << "avg";
  for (PolicyKind p : report.policies) out << ',' << csv::fixed(report.average(p), 3) << ',';
  const double a = report.average(PolicyKind::kAutonomous);
  if (vs_static) out << ',' << csv::fixed(improvement_pct(a, report.average(PolicyKind::kStatic)), 4);
  if (vs_dynamic) out << ',' << csv::fixed(improvement_pct(a, report.average(PolicyKind::kDynamic)), 4);
  out << '\n';
}

/// Seed-mean energy per ledger category for every cell.
inline void write_energy_breakdown_csv(std::ostream& out, const BenchReport& report) {
  out << "policy,anomaly_ratio,category,mean_uwh,share_pct\n";
  static constexpr std::array<const char*, 5> kNames{"sleep", "capture", "infer", "upload", "train"};
  for (PolicyKind p : report.policies) {
    for (double ratio : report.ratios) {
      std::array<double, 5> sums{};
      std::size_t n = 0;
      for (const auto& e : report.episodes) {
        if (e.policy != p || e.ratio != ratio) continue;
        const auto& l = e.result.ledger;
        const std::array<Energy, 5> parts{l.sleep, l.capture, l.infer, l.upload, l.train};
        for (std::size_t k = 0; k < parts.size(); ++k) sums[k] += static_cast<double>(parts[k].as_uwh());
        ++n;
      }
      if (n == 0) continue;
      double total = 0.0;
      for (double s : sums) total += s;
      for (std::size_t k = 0; k < sums.size(); ++k) {
        const double share = total > 0.0 ? sums[k] / total * 100.0 : 0.0;
        out << to_string(p) << ',' << csv::real(ratio) << ',' << kNames[k] << ','
            << csv::fixed(sums[k] / static_cast<double>(n), 1) << ',' << csv::fixed(share, 4) << '\n';
      }
    }
  }
}

/// Retrain attempts over time for the first seed of every cell, with the
/// running training energy, for plotting attempt frequency.
inline void write_retrain_events_csv(std::ostream& out, const BenchReport& report) {
  out << "policy,anomaly_ratio,seed,iteration,hours,n_samples,accuracy,success,train_uwh,cumulative_train_uwh\n";
  if (report.seeds.empty()) return;
  const std::uint64_t first = report.seeds.front();
  for (const auto& e : report.episodes) {
    if (e.seed != first) continue;
    Energy cumulative;
    const double period = e.result.iterations == 0 ? 1.0 : e.result.battery_life_hours / static_cast<double>(e.result.iterations);
    for (const auto& ev : e.result.retrain_events) {
      cumulative += ev.energy;
      out << to_string(e.policy) << ',' << csv::real(e.ratio) << ',' << e.seed << ',' << ev.iteration << ','
          << csv::real(static_cast<double>(ev.iteration) * period) << ',' << ev.n_samples << ','
          << csv::fixed(ev.accuracy, 6) << ',' << (ev.success ? 1 : 0) << ',' << ev.energy.as_uwh() << ','
          << cumulative.as_uwh() << '\n';
    }
  }
}

struct BenchFiles {
  std::filesystem::path results;
  std::filesystem::path summary;
  std::filesystem::path energy_breakdown;
  std::filesystem::path retrain_events;
};

inline BenchFiles write_bench_files(const std::filesystem::path& dir, const BenchReport& report) {
  std::filesystem::create_directories(dir);
  BenchFiles files{dir / "results.csv", dir / "summary.csv", dir / "energy_breakdown.csv", dir / "retrain_events.csv"};
  auto emit = [](const std::filesystem::path& path, auto&& writer) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    writer(out);
    if (!out) throw std::runtime_error("failed writing " + path.string());
  };
  emit(files.results, [&](std::ostream& o) { write_results_csv(o, report); });
  emit(files.summary, [&](std::ostream& o) { write_summary_csv(o, report); });
  emit(files.energy_breakdown, [&](std::ostream& o) { write_energy_breakdown_csv(o, report); });
  emit(files.retrain_events, [&](std::ostream& o) { write_retrain_events_csv(o, report); });
  return files;
}

}  // namespace dutysim
