#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>

#include "dutysim/random.hpp"

namespace dutysim {

enum class SampleKind : std::uint8_t { kNormal, kAnomaly };

/// Bernoulli anomaly source. One draw per sample whatever the outcome, so
/// every policy sees the same sequence for a given seed.
class AnomalyStream {
 public:
  AnomalyStream(double ratio, RandomStream stream) : ratio_(ratio), stream_(stream) {
    if (!(ratio >= 0.0 && ratio <= 1.0)) throw std::invalid_argument("anomaly ratio must lie in [0, 1]");
  }

  SampleKind next_sample() { return stream_.uniform() < ratio_ ? SampleKind::kAnomaly : SampleKind::kNormal; }

  double ratio() const { return ratio_; }

 private:
  double ratio_;
  RandomStream stream_;
};

enum class Disposition : std::uint8_t { kOnboard, kUnknown };

/// Number of anomalies the onboard model can still label without the cloud.
/// Refilled only by a successful retrain.
class ClassificationBudget {
 public:
  static constexpr std::uint32_t kDefaultReset = 50;

  explicit constexpr ClassificationBudget(std::uint32_t reset_value = kDefaultReset, std::uint32_t initial = 0)
      : reset_value_(reset_value), remaining_(std::min(initial, reset_value)) {}

  constexpr Disposition classify_anomaly() {
    if (remaining_ == 0) return Disposition::kUnknown;
    --remaining_;
    return Disposition::kOnboard;
  }

  constexpr void refill() { remaining_ = reset_value_; }

  constexpr std::uint32_t remaining() const { return remaining_; }
  constexpr std::uint32_t reset_value() const { return reset_value_; }

 private:
  std::uint32_t reset_value_;
  std::uint32_t remaining_;
};

/// Cloud-labelled anomaly images held on the node for the next retrain (N).
/// Growth stops at `cap`; classifications past it are still counted in
/// total_classified().
class AnomalyDataset {
 public:
  static constexpr std::uint32_t kDefaultCap = 255;

  explicit constexpr AnomalyDataset(std::uint32_t cap = kDefaultCap) : cap_(cap) {}

  constexpr void add() {
    ++total_;
    if (count_ < cap_) ++count_;
  }
  constexpr void clear() { count_ = 0; }

  constexpr std::uint32_t count() const { return count_; }
  constexpr std::uint32_t cap() const { return cap_; }
  constexpr std::uint64_t total_classified() const { return total_; }

 private:
  std::uint32_t cap_;
  std::uint32_t count_ = 0;
  std::uint64_t total_ = 0;
};

struct ClassifiedSample {
  std::uint64_t label_index = 0;
};

/// Emulated server classification of an uploaded anomaly. Always succeeds
/// and yields one training image.
constexpr ClassifiedSample server_classify(AnomalyDataset& dataset) {
  dataset.add();
  return ClassifiedSample{dataset.total_classified() - 1};
}

}  // namespace dutysim
