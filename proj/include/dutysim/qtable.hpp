#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dutysim/node_state.hpp"
#include "dutysim/random.hpp"

namespace dutysim {

/// Dense state-action value table of 32-bit floats, laid out
/// battery-bin major, then count bin, then action.
template <std::size_t BatteryBins, std::size_t CountBins, std::size_t Actions>
class BasicQTable {
 public:
  static constexpr std::size_t kBatteryBins = BatteryBins;
  static constexpr std::size_t kCountBins = CountBins;
  static constexpr std::size_t kActions = Actions;
  static constexpr std::size_t kEntries = BatteryBins * CountBins * Actions;
  static constexpr std::size_t kPayloadBytes = kEntries * sizeof(float);

  static constexpr std::size_t index(StateBins s, std::size_t action) {
    return (static_cast<std::size_t>(s.battery) * CountBins + s.count) * Actions + action;
  }

  float& at(StateBins s, std::size_t action) { return values_.at(index(s, action)); }
  float at(StateBins s, std::size_t action) const { return values_.at(index(s, action)); }

  float max_value(StateBins s) const {
    const auto* row = &values_[index(s, 0)];
    return *std::max_element(row, row + Actions);
  }

  /// Lowest index wins ties, so equal values pick Continue.
  std::size_t argmax(StateBins s) const {
    const auto* row = &values_[index(s, 0)];
    return static_cast<std::size_t>(std::max_element(row, row + Actions) - row);
  }

  std::span<const float, kEntries> values() const { return values_; }
  std::span<float, kEntries> values() { return values_; }

  friend bool operator==(const BasicQTable&, const BasicQTable&) = default;

 private:
  std::array<float, kEntries> values_{};
};

using QTable = BasicQTable<kBatteryBins, kCountBins, 2>;
static_assert(QTable::kPayloadBytes == 800);
static_assert(sizeof(QTable) == 800);

/// Learning rate and exploration schedule. Both decay multiplicatively per
/// schedule step and are derived from the step count, so after k steps
/// epsilon is exactly epsilon0 * epsilon_decay^k.
struct QHyperparams {
  double alpha0 = 0.2;
  double gamma = 0.95;
  double epsilon0 = 1.0;
  double alpha_decay = 0.995;
  double epsilon_decay = 0.99;
  std::uint64_t steps = 0;

  double alpha() const { return alpha0 * std::pow(alpha_decay, static_cast<double>(steps)); }
  double epsilon() const { return epsilon0 * std::pow(epsilon_decay, static_cast<double>(steps)); }
  void step() { ++steps; }

  void validate() const {
    if (!(alpha0 > 0.0 && alpha0 <= 1.0)) throw std::invalid_argument("alpha must lie in (0, 1]");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
    if (!(epsilon0 >= 0.0 && epsilon0 <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
    if (!(alpha_decay > 0.0 && alpha_decay <= 1.0)) throw std::invalid_argument("alpha decay must lie in (0, 1]");
    if (!(epsilon_decay >= 0.0 && epsilon_decay <= 1.0)) throw std::invalid_argument("epsilon decay must lie in [0, 1]");
  }
};

/// Epsilon-greedy action. With epsilon == 0 no draw is taken.
template <class Table>
std::size_t q_select(const Table& table, StateBins s, double epsilon, RandomStream& stream) {
  if (epsilon > 0.0 && stream.uniform() < epsilon) {
    const auto pick = static_cast<std::size_t>(stream.uniform() * static_cast<double>(Table::kActions));
    return std::min(pick, Table::kActions - 1);
  }
  return table.argmax(s);
}

/// One temporal-difference step on Q(s, a). A terminal transition has no
/// successor value.
template <class Table>
void q_update(Table& table, StateBins s, std::size_t action, double reward, const StateBins* next, double alpha,
              double gamma) {
  const double bootstrap = next ? gamma * static_cast<double>(table.max_value(*next)) : 0.0;
  float& q = table.at(s, action);
  const double current = q;
  q = static_cast<float>(current + alpha * (reward + bootstrap - current));
}

template <class Table>
void q_update(Table& table, StateBins s, std::size_t action, double reward, StateBins next, double alpha,
              double gamma) {
  q_update(table, s, action, reward, &next, alpha, gamma);
}

// On-disk layout: 16-byte header followed by the little-endian payload.
//   0..3   magic "QTBL"
//   4..5   version (u16 LE)
//   6      battery bins, 7 count bins, 8 actions, 9 entry size
//   10..15 reserved, zero

class QTableFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kQTableHeaderBytes = 16;
inline constexpr std::size_t kQTableFileBytes = kQTableHeaderBytes + QTable::kPayloadBytes;
inline constexpr std::uint16_t kQTableVersion = 1;

inline std::array<std::uint8_t, kQTableFileBytes> serialize(const QTable& table) {
  std::array<std::uint8_t, kQTableFileBytes> out{};
  out[0] = 'Q';
  out[1] = 'T';
  out[2] = 'B';
  out[3] = 'L';
  out[4] = static_cast<std::uint8_t>(kQTableVersion & 0xFF);
  out[5] = static_cast<std::uint8_t>(kQTableVersion >> 8);
  out[6] = static_cast<std::uint8_t>(QTable::kBatteryBins);
  out[7] = static_cast<std::uint8_t>(QTable::kCountBins);
  out[8] = static_cast<std::uint8_t>(QTable::kActions);
  out[9] = static_cast<std::uint8_t>(sizeof(float));
  std::size_t pos = kQTableHeaderBytes;
  for (float v : table.values()) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    for (int b = 0; b < 4; ++b) out[pos++] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return out;
}

inline QTable deserialize(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kQTableFileBytes) {
    throw QTableFormatError("q-table blob must be " + std::to_string(kQTableFileBytes) + " bytes, got " +
                            std::to_string(bytes.size()));
  }
  if (std::memcmp(bytes.data(), "QTBL", 4) != 0) throw QTableFormatError("bad q-table magic");
  const auto version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
  if (version != kQTableVersion) throw QTableFormatError("unsupported q-table version " + std::to_string(version));
  if (bytes[6] != QTable::kBatteryBins || bytes[7] != QTable::kCountBins || bytes[8] != QTable::kActions ||
      bytes[9] != sizeof(float)) {
    throw QTableFormatError("q-table dimensions do not match 10x10x2 float32");
  }
  QTable table;
  std::size_t pos = kQTableHeaderBytes;
  for (float& v : table.values()) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(bytes[pos++]) << (8 * b);
    v = std::bit_cast<float>(bits);
  }
  return table;
}

inline void write_qtable(const std::filesystem::path& path, const QTable& table) {
  const auto blob = serialize(table);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

inline QTable read_qtable(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(blob);
}

}  // namespace dutysim
