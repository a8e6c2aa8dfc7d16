// Trains a table at 10% anomalies and compares the three policies on a few
// seeds.

#include <cstdio>

#include "dutysim/dutysim.hpp"

int main() {
  using namespace dutysim;

  SimConfig cfg;
  cfg.anomaly_ratio = 0.10;
  cfg.training.episodes = 300;
  cfg.qtable = train_qtable(cfg).table;

  for (PolicyKind p : {PolicyKind::kStatic, PolicyKind::kDynamic, PolicyKind::kAutonomous}) {
    cfg.policy = p;
    double sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      cfg.seed = seed;
      sum += run_episode(cfg).battery_life_hours;
    }
    std::printf("%-10s %9.1f h\n", std::string(to_string(p)).c_str(), sum / 5.0);
  }
}
