#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <string_view>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

#include "dutysim/energy.hpp"
#include "dutysim/environment.hpp"
#include "dutysim/node_state.hpp"
#include "dutysim/policies.hpp"
#include "dutysim/qtable.hpp"
#include "dutysim/random.hpp"
#include "dutysim/retrain_model.hpp"

namespace dutysim {

enum class DecaySchedule : std::uint8_t { kPerStep, kPerEpisode };

constexpr std::string_view to_string(DecaySchedule d) { return d == DecaySchedule::kPerStep ? "step" : "episode"; }

struct TrainingConfig {
  std::uint32_t episodes = 1000;
  /// kPerStep advances alpha/epsilon at every decision. With the default
  /// 0.995/0.99 rates that freezes the table within ~10^3 decisions, so the
  /// default advances them once per episode instead.
  DecaySchedule decay = DecaySchedule::kPerEpisode;
  /// Share of the battery used by each training episode. Values below 1
  /// shorten episodes but map the battery bins onto a smaller battery.
  double capacity_fraction = 1.0;
  QHyperparams hyperparams;
  RewardKind reward = RewardKind::kDifferential;
};

struct SimConfig {
  EnergyTable energy;
  Energy battery_capacity = Battery::kDefaultCapacity;
  double anomaly_ratio = 0.05;
  std::uint32_t classification_reset = ClassificationBudget::kDefaultReset;
  std::uint32_t dataset_cap = AnomalyDataset::kDefaultCap;
  double sample_period_hours = 1.0;
  double validation_threshold = kDefaultValidationThreshold;

  PolicyKind policy = PolicyKind::kStatic;
  StaticPolicyParams static_params;
  DynamicPolicyParams dynamic_params;
  TrainingConfig training;
  /// Frozen table for the autonomous policy.
  std::optional<QTable> qtable;
  bool online_learning = false;

  std::uint64_t seed = 1;

  void validate() const {
    energy.validate();
    if (!(anomaly_ratio >= 0.0 && anomaly_ratio <= 1.0)) throw std::invalid_argument("anomaly_ratio must lie in [0, 1]");
    if (!(sample_period_hours > 0.0)) throw std::invalid_argument("sample_period_hours must be positive");
    if (!(validation_threshold >= 0.0 && validation_threshold <= 1.0)) {
      throw std::invalid_argument("validation_threshold must lie in [0, 1]");
    }
    if (static_params.threshold < 1) throw std::invalid_argument("static_threshold must be at least 1");
    if (dynamic_params.min_threshold < 1) throw std::invalid_argument("dynamic_min_threshold must be at least 1");
    if (dynamic_params.success_streak < 1) throw std::invalid_argument("dynamic_success_streak must be at least 1");
    if (!(training.capacity_fraction > 0.0 && training.capacity_fraction <= 1.0)) {
      throw std::invalid_argument("train_capacity_fraction must lie in (0, 1]");
    }
    training.hyperparams.validate();
  }
};

struct EnergyLedger {
  Energy sleep;
  Energy capture;
  Energy infer;
  Energy upload;
  Energy train;

  Energy total() const { return sleep + capture + infer + upload + train; }
  friend bool operator==(const EnergyLedger&, const EnergyLedger&) = default;
};

struct EventCounts {
  std::uint64_t samples = 0;  // completed sampling iterations
  std::uint64_t anomalies = 0;
  std::uint64_t onboard_classified = 0;
  std::uint64_t uploads = 0;
  std::uint64_t retrain_attempts = 0;
  std::uint64_t retrain_successes = 0;
  std::uint64_t decisions = 0;
  friend bool operator==(const EventCounts&, const EventCounts&) = default;
};

struct RetrainEvent {
  std::uint64_t iteration = 0;
  std::uint32_t n_samples = 0;
  double accuracy = 0.0;
  bool success = false;
  Energy energy;
  friend bool operator==(const RetrainEvent&, const RetrainEvent&) = default;
};

struct SimResult {
  std::uint64_t iterations = 0;
  double battery_life_hours = 0.0;
  Energy capacity;
  Energy remaining;
  EnergyLedger ledger;
  EventCounts counts;
  std::vector<RetrainEvent> retrain_events;  // only filled when tracing

  friend bool operator==(const SimResult&, const SimResult&) = default;
};

enum class IterationOutcome : std::uint8_t { kCompleted, kEpisodeEnd };

struct EpisodeOptions {
  bool trace = false;
};

/// One deployment from full battery to exhaustion.
///
/// An iteration is capture -> infer -> [upload -> decision -> retrain] ->
/// sleep. Each charge is checked on its own; the first one the battery cannot
/// fund ends the episode and that iteration is not counted.
template <DutyCyclePolicy P>
class Episode {
 public:
  Episode(const SimConfig& cfg, P& policy, EpisodeOptions opts = {})
      : cfg_(cfg),
        policy_(policy),
        opts_(opts),
        battery_(cfg.battery_capacity),
        env_(cfg.anomaly_ratio, RandomStream(cfg.seed, StreamId::kEnvironment)),
        retrain_stream_(cfg.seed, StreamId::kRetrain),
        budget_(cfg.classification_reset, 0),
        dataset_(cfg.dataset_cap) {}

  IterationOutcome run_iteration() {
    if (battery_.exhausted()) return IterationOutcome::kEpisodeEnd;
    if (!charge(cfg_.energy.image_capture, ledger_.capture)) return IterationOutcome::kEpisodeEnd;
    if (!charge(cfg_.energy.infer, ledger_.infer)) return IterationOutcome::kEpisodeEnd;

    if (env_.next_sample() == SampleKind::kAnomaly) {
      ++counts_.anomalies;
      ++step_.anomalies;
      if (budget_.classify_anomaly() == Disposition::kOnboard) {
        ++counts_.onboard_classified;
      } else {
        if (!charge(cfg_.energy.upload, ledger_.upload, true)) return IterationOutcome::kEpisodeEnd;
        ++counts_.uploads;
        server_classify(dataset_);
        if (!decide_and_act()) return IterationOutcome::kEpisodeEnd;
      }
    }

    if (!charge(cfg_.energy.sleep_per_iteration, ledger_.sleep)) return IterationOutcome::kEpisodeEnd;
    ++iterations_;
    ++counts_.samples;
    ++step_.iterations;
    return IterationOutcome::kCompleted;
  }

  /// Runs to exhaustion and closes the final learning step.
  SimResult run() {
    while (run_iteration() == IterationOutcome::kCompleted) {
    }
    return finish();
  }

  SimResult finish() {
    if constexpr (LearningPolicy<P>) {
      if (step_open_) policy_.observe(step_, nullptr);
    }
    step_open_ = false;
    SimResult r;
    r.iterations = iterations_;
    r.battery_life_hours = static_cast<double>(iterations_) * cfg_.sample_period_hours;
    r.capacity = battery_.capacity();
    r.remaining = battery_.remaining();
    r.ledger = ledger_;
    r.counts = counts_;
    r.retrain_events = std::move(events_);
    return r;
  }

  const Battery& battery() const { return battery_; }
  const EnergyLedger& ledger() const { return ledger_; }
  const EventCounts& counts() const { return counts_; }
  const ClassificationBudget& budget() const { return budget_; }
  const AnomalyDataset& dataset() const { return dataset_; }
  std::uint64_t iterations() const { return iterations_; }

 private:
  bool charge(Energy amount, Energy& category, bool discretionary = false) {
    if (!battery_.consume(amount)) return false;
    category += amount;
    step_.total += amount;
    if (discretionary) step_.discretionary += amount;
    return true;
  }

  bool decide_and_act() {
    const NodeState state{battery_.fraction(), dataset_.count(), true};
    if constexpr (LearningPolicy<P>) {
      if (step_open_) policy_.observe(step_, &state);
    }
    step_ = StepFeedback{};
    step_open_ = true;

    ++counts_.decisions;
    if (policy_.decide(state) != Decision::kRetrain || dataset_.count() < 1) return true;

    const RetrainOutcome outcome = simulate_retrain(dataset_.count(), cfg_.energy, retrain_stream_);
    if (!charge(outcome.energy, ledger_.train, true)) return false;
    ++counts_.retrain_attempts;
    const bool success = outcome.accuracy >= policy_.validation_threshold();
    policy_.record_retrain(outcome, success);
    if (success) {
      ++counts_.retrain_successes;
      dataset_.clear();
      budget_.refill();
    }
    if (opts_.trace) events_.push_back({iterations_, outcome.n_samples, outcome.accuracy, success, outcome.energy});
    return true;
  }

  const SimConfig& cfg_;
  P& policy_;
  EpisodeOptions opts_;
  Battery battery_;
  AnomalyStream env_;
  RandomStream retrain_stream_;
  ClassificationBudget budget_;
  AnomalyDataset dataset_;
  EnergyLedger ledger_;
  EventCounts counts_;
  std::uint64_t iterations_ = 0;
  StepFeedback step_;
  bool step_open_ = false;
  std::vector<RetrainEvent> events_;
};

template <DutyCyclePolicy P>
SimResult run_episode(const SimConfig& cfg, P& policy, EpisodeOptions opts = {}) {
  return Episode<P>(cfg, policy, opts).run();
}

inline RandomStream exploration_stream(std::uint64_t seed) { return RandomStream(seed, StreamId::kExploration); }

/// Builds the configured policy. The autonomous policy needs cfg.qtable.
inline AnyPolicy make_policy(const SimConfig& cfg) {
  switch (cfg.policy) {
    case PolicyKind::kStatic: {
      StaticPolicyParams p = cfg.static_params;
      p.validation = cfg.validation_threshold;
      return StaticPolicy(p);
    }
    case PolicyKind::kDynamic: {
      DynamicPolicyParams p = cfg.dynamic_params;
      p.validation = cfg.validation_threshold;
      return DynamicPolicy(p);
    }
    case PolicyKind::kAutonomous: {
      if (!cfg.qtable) throw std::invalid_argument("autonomous policy needs a trained q-table");
      QHyperparams hp = cfg.training.hyperparams;
      QLearningOptions opts;
      opts.learning = cfg.online_learning;
      opts.reward = cfg.training.reward;
      opts.validation = cfg.validation_threshold;
      opts.reference_prior_uwh = static_cast<double>(cfg.energy.upload.as_uwh());
      if (!cfg.online_learning) hp.epsilon0 = 0.0;
      return QLearningPolicy(*cfg.qtable, hp, exploration_stream(cfg.seed), opts);
    }
  }
  throw std::invalid_argument("unknown policy kind");
}

inline SimResult run_episode(const SimConfig& cfg, EpisodeOptions opts = {}) {
  AnyPolicy policy = make_policy(cfg);
  return std::visit([&](auto& p) { return run_episode(cfg, p, opts); }, policy);
}

// ---------------------------------------------------------------------------

struct TrainingResult {
  QTable table;
  QHyperparams hyperparams;
  std::uint32_t episodes = 0;
  std::uint64_t decision_steps = 0;
  std::array<std::uint32_t, kBatteryBins * kCountBins> visits{};
  double reference_uwh = 0.0;

  std::size_t visited_states() const {
    return static_cast<std::size_t>(std::count_if(visits.begin(), visits.end(), [](auto v) { return v > 0; }));
  }
  double coverage() const { return static_cast<double>(visited_states()) / static_cast<double>(visits.size()); }
};

namespace detail {

inline constexpr std::uint64_t kTrainingSalt = 0x7472'6169'6e69'6e67ULL;  // "training"

/// Counts decision states as the learner visits them.
class VisitCountingLearner {
 public:
  VisitCountingLearner(QLearningPolicy& inner, std::array<std::uint32_t, kBatteryBins * kCountBins>& visits)
      : inner_(inner), visits_(visits) {}

  Decision decide(const NodeState& s) {
    const StateBins b = discretize(s);
    ++visits_[static_cast<std::size_t>(b.battery) * kCountBins + b.count];
    return inner_.decide(s);
  }
  void record_retrain(const RetrainOutcome& o, bool success) { inner_.record_retrain(o, success); }
  void observe(const StepFeedback& f, const NodeState* next) { inner_.observe(f, next); }
  double validation_threshold() const { return inner_.validation_threshold(); }

 private:
  QLearningPolicy& inner_;
  std::array<std::uint32_t, kBatteryBins * kCountBins>& visits_;
};

}  // namespace detail

/// Offline Q-table training. Each episode starts from a fresh battery
/// (scaled by capacity_fraction) with its own environment seed; alpha and
/// epsilon advance per decision or per episode as configured.
inline TrainingResult train_qtable(const SimConfig& cfg, std::uint32_t episodes, QHyperparams hp) {
  cfg.validate();
  hp.validate();
  TrainingResult out;
  QLearningOptions opts;
  opts.learning = true;
  opts.reward = cfg.training.reward;
  opts.validation = cfg.validation_threshold;
  opts.reference_prior_uwh = static_cast<double>(cfg.energy.upload.as_uwh());
  opts.decay_each_decision = cfg.training.decay == DecaySchedule::kPerStep;

  const std::uint64_t base = cfg.seed ^ detail::kTrainingSalt;
  QLearningPolicy learner(QTable{}, hp, exploration_stream(derive_seed(base, 0)), opts);
  detail::VisitCountingLearner counted(learner, out.visits);

  SimConfig episode_cfg = cfg;
  const double scaled = std::round(static_cast<double>(cfg.battery_capacity.as_uwh()) * cfg.training.capacity_fraction);
  episode_cfg.battery_capacity = Energy::uwh(static_cast<std::uint64_t>(scaled));

  for (std::uint32_t e = 0; e < episodes; ++e) {
    episode_cfg.seed = derive_seed(base, e + 1);
    const SimResult r = run_episode(episode_cfg, counted);
    out.decision_steps += r.counts.decisions;
    if (cfg.training.decay == DecaySchedule::kPerEpisode) learner.advance_schedule();
  }
  out.table = learner.table();
  out.hyperparams = learner.hyperparams();
  out.episodes = episodes;
  out.reference_uwh = learner.reference_uwh();
  return out;
}

inline TrainingResult train_qtable(const SimConfig& cfg) {
  return train_qtable(cfg, cfg.training.episodes, cfg.training.hyperparams);
}

// ---------------------------------------------------------------------------

/// Runs every (config, seed) pair, config-major. Episodes are independent and
/// may run on several threads; the output order never depends on scheduling.
inline std::vector<SimResult> run_sweep(std::span<const SimConfig> configs, std::span<const std::uint64_t> seeds,
                                        unsigned threads = 0, EpisodeOptions opts = {}) {
  if (configs.empty() || seeds.empty()) throw std::invalid_argument("sweep needs at least one config and one seed");
  for (const auto& c : configs) c.validate();
  const std::size_t jobs = configs.size() * seeds.size();
  std::vector<SimResult> results(jobs);

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs; j = next++) {
      try {
        SimConfig cfg = configs[j / seeds.size()];
        cfg.seed = seeds[j % seeds.size()];
        results[j] = run_episode(cfg, opts);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace dutysim
