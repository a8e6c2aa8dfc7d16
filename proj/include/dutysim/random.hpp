#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace dutysim {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t state) : state_(state) {}

  constexpr std::uint64_t next() {
    state_ += kGoldenGamma;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

class Xoshiro256StarStar {
 public:
  explicit constexpr Xoshiro256StarStar(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& word : s_) word = sm.next();
  }

  constexpr std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> s_{};
};

/// Independent named streams. Environment draws anomalies, Retrain drives
/// the validation-accuracy model, Exploration feeds epsilon-greedy.
enum class StreamId : std::uint8_t { kEnvironment = 0, kRetrain = 1, kExploration = 2 };

constexpr std::string_view to_string(StreamId id) {
  switch (id) {
    case StreamId::kEnvironment: return "environment";
    case StreamId::kRetrain: return "retrain";
    case StreamId::kExploration: return "exploration";
  }
  return "unknown";
}

/// xoshiro256** seeded through SplitMix64 from seed ^ (gamma * (stream + 1)).
/// Sequences are fixed by (seed, stream) alone.
class RandomStream {
 public:
  constexpr RandomStream(std::uint64_t seed, StreamId id)
      : seed_(seed), id_(id), gen_(seed ^ (kGoldenGamma * (static_cast<std::uint64_t>(id) + 1))) {}

  constexpr std::uint64_t next_u64() { return gen_.next(); }

  /// Uniform on [0, 1) from the top 53 bits of the next word.
  constexpr double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  constexpr std::uint64_t seed() const { return seed_; }
  constexpr StreamId id() const { return id_; }

 private:
  std::uint64_t seed_;
  StreamId id_;
  Xoshiro256StarStar gen_;
};

/// Well-mixed child seed, used to give each training episode its own streams.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  SplitMix64 sm(base + kGoldenGamma * (index + 1));
  return sm.next();
}

}  // namespace dutysim
