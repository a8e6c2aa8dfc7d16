#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "dutysim/energy.hpp"
#include "dutysim/node_state.hpp"
#include "dutysim/qtable.hpp"
#include "dutysim/random.hpp"
#include "dutysim/retrain_model.hpp"

namespace dutysim {

inline constexpr double kDefaultValidationThreshold = 0.85;

/// Everything drawn from the battery between two consecutive decision
/// points, including the upload that opened the later one.
struct StepFeedback {
  Energy total;
  Energy discretionary;  // upload + train share of `total`
  std::uint32_t anomalies = 0;
  std::uint64_t iterations = 0;
};

/// Decision interface used by the engine. Policies are asked for a decision
/// after each server classification and told how the retrain went.
template <class P>
concept DutyCyclePolicy = requires(P p, const P cp, const NodeState& s, const RetrainOutcome& o) {
  { p.decide(s) } -> std::same_as<Decision>;
  { cp.validation_threshold() } -> std::convertible_to<double>;
  p.record_retrain(o, true);
};

/// Policies that also learn from the energy spent between decisions.
/// `next == nullptr` marks the terminal transition.
template <class P>
concept LearningPolicy = DutyCyclePolicy<P> && requires(P p, const StepFeedback& f, const NodeState* next) {
  p.observe(f, next);
};

// ---------------------------------------------------------------------------

struct StaticPolicyParams {
  std::uint32_t threshold = 35;
  double validation = kDefaultValidationThreshold;
};

/// Retrain once the dataset reaches a fixed size; never adapts.
class StaticPolicy {
 public:
  explicit StaticPolicy(StaticPolicyParams p = {}) : params_(p) {}

  Decision decide(const NodeState& s) const {
    return s.n_classified >= params_.threshold ? Decision::kRetrain : Decision::kContinue;
  }
  void record_retrain(const RetrainOutcome&, bool) {}

  double validation_threshold() const { return params_.validation; }
  std::uint32_t threshold() const { return params_.threshold; }

 private:
  StaticPolicyParams params_;
};

struct DynamicPolicyParams {
  std::uint32_t initial_threshold = 10;
  double validation = kDefaultValidationThreshold;
  std::uint32_t success_streak = 5;  // Z
  std::uint32_t min_threshold = 1;
};

/// Threshold policy that grows its dataset requirement after a failed retrain
/// and shrinks it once `success_streak` retrains in a row have passed.
class DynamicPolicy {
 public:
  explicit DynamicPolicy(DynamicPolicyParams p = {})
      : params_(p), threshold_(std::max(p.initial_threshold, p.min_threshold)) {}

  Decision decide(const NodeState& s) const {
    return s.n_classified >= threshold_ ? Decision::kRetrain : Decision::kContinue;
  }

  void record_retrain(const RetrainOutcome&, bool success) {
    if (success) {
      ++streak_;
      // The streak is not reset, so every further success keeps lowering T.
      if (streak_ >= params_.success_streak) threshold_ = std::max(threshold_ - 1, params_.min_threshold);
    } else {
      streak_ = 0;
      ++threshold_;
    }
  }

  double validation_threshold() const { return params_.validation; }
  std::uint32_t threshold() const { return threshold_; }
  std::uint32_t streak() const { return streak_; }

 private:
  DynamicPolicyParams params_;
  std::uint32_t threshold_;
  std::uint32_t streak_ = 0;
};

// ---------------------------------------------------------------------------

enum class RewardKind : std::uint8_t {
  kStepEnergy,    // -(all energy in the step), mWh
  kDifferential,  // energy saved against a running cost-per-anomaly reference, mWh
};

constexpr std::string_view to_string(RewardKind k) {
  return k == RewardKind::kStepEnergy ? "step_energy" : "differential";
}

inline std::optional<RewardKind> parse_reward_kind(std::string_view s) {
  if (s == "step_energy") return RewardKind::kStepEnergy;
  if (s == "differential") return RewardKind::kDifferential;
  return std::nullopt;
}

inline double step_energy_reward(Energy step_energy) { return -step_energy.as_mwh(); }

/// Credits each anomaly handled in the step with `reference_uwh` and charges
/// the upload and training energy actually spent.
inline double differential_reward(const StepFeedback& f, double reference_uwh) {
  const double credit = reference_uwh * static_cast<double>(f.anomalies);
  return (credit - static_cast<double>(f.discretionary.as_uwh())) / 1000.0;
}

/// Running ratio of discretionary energy to anomalies handled over greedy
/// steps. Before any greedy step it reports the prior.
class CostPerAnomaly {
 public:
  explicit CostPerAnomaly(double prior_uwh = 3000.0) : prior_(prior_uwh) {}

  void add(const StepFeedback& f) {
    energy_ += static_cast<double>(f.discretionary.as_uwh());
    anomalies_ += f.anomalies;
  }
  double value() const { return anomalies_ == 0 ? prior_ : energy_ / static_cast<double>(anomalies_); }

 private:
  double prior_;
  double energy_ = 0.0;
  std::uint64_t anomalies_ = 0;
};

struct QLearningOptions {
  bool learning = false;
  RewardKind reward = RewardKind::kDifferential;
  double validation = kDefaultValidationThreshold;
  /// Starting cost-per-anomaly reference, normally the upload energy.
  double reference_prior_uwh = 3000.0;
  /// Advance the alpha/epsilon schedule at every decision; otherwise the
  /// owner calls advance_schedule() (e.g. once per training episode).
  bool decay_each_decision = true;
};

/// Tabular epsilon-greedy Q-learning over (battery tenth, dataset size / 5).
/// Frozen (learning == false) it is a pure argmax over the table.
class QLearningPolicy {
 public:
  QLearningPolicy(QTable table, QHyperparams hp, RandomStream exploration, QLearningOptions opts = {})
      : table_(table), hp_(hp), stream_(exploration), opts_(opts), reference_(opts.reference_prior_uwh) {
    hp_.validate();
  }

  Decision decide(const NodeState& s) {
    const StateBins bins = discretize(s);
    double epsilon = 0.0;
    if (opts_.learning) {
      if (opts_.decay_each_decision) hp_.step();
      epsilon = hp_.epsilon();
    }
    const std::size_t action = q_select(table_, bins, epsilon, stream_);
    pending_ = Pending{bins, action, hp_.alpha(), action != table_.argmax(bins)};
    return action == 1 ? Decision::kRetrain : Decision::kContinue;
  }

  void record_retrain(const RetrainOutcome&, bool) {}

  void advance_schedule() { hp_.step(); }

  void observe(const StepFeedback& f, const NodeState* next) {
    if (!pending_) return;
    const Pending p = *pending_;
    pending_.reset();
    if (!p.explored) reference_.add(f);
    if (!opts_.learning) return;
    const double r =
        opts_.reward == RewardKind::kStepEnergy ? step_energy_reward(f.total) : differential_reward(f, reference_.value());
    if (next) {
      q_update(table_, p.bins, p.action, r, discretize(*next), p.alpha, hp_.gamma);
    } else {
      q_update(table_, p.bins, p.action, r, nullptr, p.alpha, hp_.gamma);
    }
  }

  double validation_threshold() const { return opts_.validation; }
  const QTable& table() const { return table_; }
  const QHyperparams& hyperparams() const { return hp_; }
  double reference_uwh() const { return reference_.value(); }
  const CostPerAnomaly& reference() const { return reference_; }
  void set_reference(CostPerAnomaly r) { reference_ = r; }

 private:
  struct Pending {
    StateBins bins;
    std::size_t action;
    double alpha;
    bool explored;
  };

  QTable table_;
  QHyperparams hp_;
  RandomStream stream_;
  QLearningOptions opts_;
  CostPerAnomaly reference_;
  std::optional<Pending> pending_;
};

static_assert(DutyCyclePolicy<StaticPolicy>);
static_assert(DutyCyclePolicy<DynamicPolicy>);
static_assert(LearningPolicy<QLearningPolicy>);
static_assert(!LearningPolicy<StaticPolicy>);

// ---------------------------------------------------------------------------

enum class PolicyKind : std::uint8_t { kStatic, kDynamic, kAutonomous };

constexpr std::string_view to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::kStatic: return "static";
    case PolicyKind::kDynamic: return "dynamic";
    case PolicyKind::kAutonomous: return "autonomous";
  }
  return "unknown";
}

inline std::optional<PolicyKind> parse_policy_kind(std::string_view s) {
  if (s == "static") return PolicyKind::kStatic;
  if (s == "dynamic") return PolicyKind::kDynamic;
  if (s == "autonomous" || s == "qlearning") return PolicyKind::kAutonomous;
  return std::nullopt;
}

using AnyPolicy = std::variant<StaticPolicy, DynamicPolicy, QLearningPolicy>;

}  // namespace dutysim
