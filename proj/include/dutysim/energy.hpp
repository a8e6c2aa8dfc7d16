#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace dutysim {

class EnergyUnderflow : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Non-negative amount of energy, stored as integer microwatt-hours.
class Energy {
 public:
  constexpr Energy() = default;

  static constexpr Energy uwh(std::uint64_t v) { return Energy(v); }

  constexpr std::uint64_t as_uwh() const { return value_; }
  constexpr double as_mwh() const { return static_cast<double>(value_) / 1000.0; }

  constexpr Energy& operator+=(Energy rhs) {
    if (value_ > std::numeric_limits<std::uint64_t>::max() - rhs.value_) {
      throw std::overflow_error("energy overflow");
    }
    value_ += rhs.value_;
    return *this;
  }

  constexpr Energy& operator-=(Energy rhs) {
    if (rhs.value_ > value_) {
      throw EnergyUnderflow("energy would become negative");
    }
    value_ -= rhs.value_;
    return *this;
  }

  constexpr Energy operator*(std::uint64_t k) const {
    if (k != 0 && value_ > std::numeric_limits<std::uint64_t>::max() / k) {
      throw std::overflow_error("energy overflow");
    }
    return Energy(value_ * k);
  }

  friend constexpr Energy operator+(Energy a, Energy b) { return a += b; }
  friend constexpr Energy operator-(Energy a, Energy b) { return a -= b; }
  friend constexpr auto operator<=>(Energy, Energy) = default;

 private:
  constexpr explicit Energy(std::uint64_t v) : value_(v) {}

  std::uint64_t value_ = 0;
};

namespace literals {
constexpr Energy operator""_uwh(unsigned long long v) { return Energy::uwh(v); }
constexpr Energy operator""_mwh(unsigned long long v) { return Energy::uwh(v * 1000); }
}  // namespace literals

class InvalidEnergyTable : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Per-state and per-action energy costs of the node.
///
/// Upload and per-image training must dominate the capture and inference
/// costs; the optimisation only makes sense under that ordering, so any
/// table that breaks it is rejected by validate().
struct EnergyTable {
  Energy sleep_per_iteration = Energy::uwh(50);
  Energy image_capture = Energy::uwh(180);
  Energy infer = Energy::uwh(17);
  Energy upload = Energy::uwh(3000);
  Energy train_per_image = Energy::uwh(556);

  /// Energy of an iteration that needs no upload and no retrain.
  constexpr Energy baseline_iteration() const { return sleep_per_iteration + image_capture + infer; }

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw InvalidEnergyTable(what);
    };
    const Energy zero{};
    require(sleep_per_iteration > zero, "sleep energy must be positive");
    require(image_capture > zero, "capture energy must be positive");
    require(infer > zero, "inference energy must be positive");
    require(upload > zero, "upload energy must be positive");
    require(train_per_image > zero, "training energy must be positive");
    require(upload > image_capture, "upload energy must exceed capture energy");
    require(upload > infer, "upload energy must exceed inference energy");
    require(train_per_image > infer, "per-image training energy must exceed inference energy");
  }

  friend bool operator==(const EnergyTable&, const EnergyTable&) = default;
};

/// Ideal single-use battery: linear, no recharge, no chemistry effects.
class Battery {
 public:
  /// 5 V x 3.5 Ah.
  static constexpr Energy kDefaultCapacity = Energy::uwh(17'500'000);

  explicit constexpr Battery(Energy capacity = kDefaultCapacity)
      : capacity_(capacity), remaining_(capacity) {}

  constexpr Energy capacity() const { return capacity_; }
  constexpr Energy remaining() const { return remaining_; }
  constexpr Energy drawn() const { return capacity_ - remaining_; }
  constexpr bool exhausted() const { return exhausted_; }

  /// 1.0 for a full battery; 0.0 for an empty or zero-capacity one.
  constexpr double fraction() const {
    if (capacity_.as_uwh() == 0) return 0.0;
    return static_cast<double>(remaining_.as_uwh()) / static_cast<double>(capacity_.as_uwh());
  }

  /// Draws `amount`. If it cannot be funded nothing is drawn, the battery is
  /// flagged exhausted and false is returned.
  [[nodiscard]] constexpr bool consume(Energy amount) {
    if (exhausted_ || amount > remaining_) {
      exhausted_ = true;
      return false;
    }
    remaining_ -= amount;
    return true;
  }

 private:
  Energy capacity_;
  Energy remaining_;
  bool exhausted_ = false;
};

}  // namespace dutysim
