#include <gtest/gtest.h>

#include <cmath>

#include "dutysim/retrain_model.hpp"

using namespace dutysim;

TEST(RetrainModel, AccuracyMatchesOracle) {
  EXPECT_DOUBLE_EQ(accuracy_from_draw(1, 0.5), 0.09999999999999998);
  EXPECT_DOUBLE_EQ(accuracy_from_draw(35, 0.5), 0.8826606778899236);
  EXPECT_DOUBLE_EQ(accuracy_from_draw(35, 0.0), 0.8992690162886844);
  EXPECT_DOUBLE_EQ(accuracy_from_draw(35, 0.999999), 0.8660523727078397);
  EXPECT_DOUBLE_EQ(accuracy_from_draw(10, 0.5), 0.7592399910868982);
  EXPECT_DOUBLE_EQ(accuracy_from_draw(60, 0.5), 0.9143765816280853);
  EXPECT_NEAR(accuracy_from_draw(1, 1.0), 0.005, 1e-12);
}

TEST(RetrainModel, HalfwidthMatchesOracle) {
  EXPECT_DOUBLE_EQ(accuracy_halfwidth(60), 0.004606979898695194);
  EXPECT_DOUBLE_EQ(accuracy_halfwidth(35), 0.016608338398760716);
  EXPECT_LT(accuracy_halfwidth(60), 0.005);
}

TEST(RetrainModel, ClampBounds) {
  EXPECT_EQ(clamp_accuracy(-0.2), 0.0);
  EXPECT_EQ(clamp_accuracy(1.3), 1.0);
  EXPECT_EQ(clamp_accuracy(0.4), 0.4);
}

TEST(RetrainModel, ZeroSamplesRejected) {
  RandomStream rs(1, StreamId::kRetrain);
  EXPECT_THROW(accuracy_from_draw(0, 0.5), InvalidSampleCount);
  EXPECT_THROW(simulate_retrain(0, EnergyTable{}, rs), InvalidSampleCount);
}

TEST(RetrainModel, CenterIsMonotoneInN) {
  for (std::uint32_t n = 1; n < 255; ++n) EXPECT_LT(accuracy_center(n), accuracy_center(n + 1)) << n;
}

TEST(RetrainModel, SimulateUsesOneDrawAndChargesPerImage) {
  RandomStream a(11, StreamId::kRetrain), b(11, StreamId::kRetrain);
  const RetrainOutcome o = simulate_retrain(35, EnergyTable{}, a);
  EXPECT_EQ(o.energy.as_uwh(), 556u * 35u);
  EXPECT_EQ(o.n_samples, 35u);
  EXPECT_DOUBLE_EQ(o.accuracy, accuracy_from_draw(35, b.uniform()));
  EXPECT_EQ(a.next_u64(), b.next_u64());  // both advanced by exactly one word
}

TEST(RetrainModel, SamplesStayInsideEnvelope) {
  RandomStream rs(2024, StreamId::kRetrain);
  const EnergyTable t;
  for (std::uint32_t n : {1u, 2u, 5u, 10u, 20u, 35u, 60u, 120u, 255u}) {
    const double lo = std::max(0.0, accuracy_center(n) - accuracy_halfwidth(n));
    const double hi = std::min(1.0, accuracy_center(n) + accuracy_halfwidth(n));
    for (int i = 0; i < 2000; ++i) {
      const double a = simulate_retrain(n, t, rs).accuracy;
      ASSERT_GE(a, lo - 1e-12) << n;
      ASSERT_LE(a, hi + 1e-12) << n;
    }
  }
}
