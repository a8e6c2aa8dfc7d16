#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "dutysim/energy.hpp"
#include "dutysim/random.hpp"

namespace dutysim {

class InvalidSampleCount : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RetrainOutcome {
  double accuracy = 0.0;
  Energy energy;
  std::uint32_t n_samples = 0;
};

// Stochastic stand-in for on-device retraining. Accuracy follows a
// log-sigmoid learning curve in the dataset size with a uniform offset whose
// spread shrinks by 0.95 per sample. No real learning happens.

/// Expected validation accuracy for a dataset of n images.
inline double accuracy_center(std::uint32_t n) {
  const double nd = static_cast<double>(n);
  return 1.0 / (1.0 + std::exp(-0.6 * std::log(nd))) - 0.4 / nd;
}

/// Maximum deviation of the sampled accuracy from accuracy_center(n).
inline double accuracy_halfwidth(std::uint32_t n) { return 0.1 * std::pow(0.95, static_cast<double>(n)); }

constexpr double clamp_accuracy(double raw) { return std::clamp(raw, 0.0, 1.0); }

/// Accuracy for a given uniform draw r in [0, 1).
inline double accuracy_from_draw(std::uint32_t n, double r) {
  if (n < 1) throw InvalidSampleCount("retraining needs at least one sample");
  const double offset = ((2.0 * r - 1.0) / 10.0) * std::pow(0.95, static_cast<double>(n));
  return clamp_accuracy(accuracy_center(n) - offset);
}

/// Consumes exactly one draw from `stream`.
inline RetrainOutcome simulate_retrain(std::uint32_t n_samples, const EnergyTable& table, RandomStream& stream) {
  if (n_samples < 1) throw InvalidSampleCount("retraining needs at least one sample");
  const double r = stream.uniform();
  return RetrainOutcome{accuracy_from_draw(n_samples, r), table.train_per_image * n_samples, n_samples};
}

}  // namespace dutysim
