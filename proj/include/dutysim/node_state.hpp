#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string_view>

namespace dutysim {

/// What a policy sees at a decision point.
struct NodeState {
  double battery_fraction = 1.0;
  std::uint32_t n_classified = 0;
  bool anomaly_flag = false;
};

enum class Decision : std::uint8_t { kContinue = 0, kRetrain = 1 };

constexpr std::string_view to_string(Decision d) { return d == Decision::kRetrain ? "retrain" : "continue"; }

struct StateBins {
  std::uint8_t battery = 0;
  std::uint8_t count = 0;

  friend constexpr bool operator==(StateBins, StateBins) = default;
};

inline constexpr std::uint8_t kBatteryBins = 10;
inline constexpr std::uint8_t kCountBins = 10;
inline constexpr std::uint32_t kCountBinWidth = 5;

/// Battery in tenths, dataset size in groups of five; both clamp to bin 9.
/// anomaly_flag is always set at a decision point and is not indexed.
inline StateBins discretize(const NodeState& s) {
  const double f = std::clamp(s.battery_fraction, 0.0, 1.0);
  const auto battery = std::min<int>(static_cast<int>(std::floor(f * kBatteryBins)), kBatteryBins - 1);
  const auto count = std::min<std::uint32_t>(s.n_classified / kCountBinWidth, kCountBins - 1);
  return StateBins{static_cast<std::uint8_t>(battery), static_cast<std::uint8_t>(count)};
}

}  // namespace dutysim
