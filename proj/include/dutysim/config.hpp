#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

#include "dutysim/engine.hpp"

namespace dutysim {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::size_t line, std::string key, const std::string& what)
      : std::runtime_error(format(line, key, what)), line_(line), key_(std::move(key)) {}

  std::size_t line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  static std::string format(std::size_t line, const std::string& key, const std::string& what) {
    std::string msg = "config";
    if (line > 0) msg += " line " + std::to_string(line);
    if (!key.empty()) msg += " key '" + key + "'";
    return msg + ": " + what;
  }

  std::size_t line_;
  std::string key_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <class T>
T parse_integer(std::string_view v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw std::invalid_argument("expected an unsigned integer");
  return out;
}

inline double parse_real(std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) throw std::invalid_argument("expected a number");
  return out;
}

inline bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected true or false");
}

using Setter = std::function<void(SimConfig&, std::string_view)>;

inline const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      // Energies in microwatt-hours.
      {"sleep_uwh", [](SimConfig& c, std::string_view v) { c.energy.sleep_per_iteration = Energy::uwh(parse_integer<std::uint64_t>(v)); }},
      {"capture_uwh", [](SimConfig& c, std::string_view v) { c.energy.image_capture = Energy::uwh(parse_integer<std::uint64_t>(v)); }},
      {"infer_uwh", [](SimConfig& c, std::string_view v) { c.energy.infer = Energy::uwh(parse_integer<std::uint64_t>(v)); }},
      {"upload_uwh", [](SimConfig& c, std::string_view v) { c.energy.upload = Energy::uwh(parse_integer<std::uint64_t>(v)); }},
      {"train_per_image_uwh", [](SimConfig& c, std::string_view v) { c.energy.train_per_image = Energy::uwh(parse_integer<std::uint64_t>(v)); }},
      {"battery_capacity_uwh", [](SimConfig& c, std::string_view v) { c.battery_capacity = Energy::uwh(parse_integer<std::uint64_t>(v)); }},
      // Environment.
      {"anomaly_ratio", [](SimConfig& c, std::string_view v) { c.anomaly_ratio = parse_real(v); }},
      {"classification_reset", [](SimConfig& c, std::string_view v) { c.classification_reset = parse_integer<std::uint32_t>(v); }},
      {"dataset_cap", [](SimConfig& c, std::string_view v) { c.dataset_cap = parse_integer<std::uint32_t>(v); }},
      {"sample_period_hours", [](SimConfig& c, std::string_view v) { c.sample_period_hours = parse_real(v); }},
      {"validation_threshold", [](SimConfig& c, std::string_view v) { c.validation_threshold = parse_real(v); }},
      {"seed", [](SimConfig& c, std::string_view v) { c.seed = parse_integer<std::uint64_t>(v); }},
      // Policies.
      {"policy", [](SimConfig& c, std::string_view v) {
         const auto k = parse_policy_kind(v);
         if (!k) throw std::invalid_argument("expected static, dynamic or autonomous");
         c.policy = *k;
       }},
      {"static_threshold", [](SimConfig& c, std::string_view v) { c.static_params.threshold = parse_integer<std::uint32_t>(v); }},
      {"dynamic_initial_threshold", [](SimConfig& c, std::string_view v) { c.dynamic_params.initial_threshold = parse_integer<std::uint32_t>(v); }},
      {"dynamic_success_streak", [](SimConfig& c, std::string_view v) { c.dynamic_params.success_streak = parse_integer<std::uint32_t>(v); }},
      {"dynamic_min_threshold", [](SimConfig& c, std::string_view v) { c.dynamic_params.min_threshold = parse_integer<std::uint32_t>(v); }},
      {"online_learning", [](SimConfig& c, std::string_view v) { c.online_learning = parse_bool(v); }},
      // Q-learning and training.
      {"q_alpha", [](SimConfig& c, std::string_view v) { c.training.hyperparams.alpha0 = parse_real(v); }},
      {"q_gamma", [](SimConfig& c, std::string_view v) { c.training.hyperparams.gamma = parse_real(v); }},
      {"q_epsilon", [](SimConfig& c, std::string_view v) { c.training.hyperparams.epsilon0 = parse_real(v); }},
      {"q_alpha_decay", [](SimConfig& c, std::string_view v) { c.training.hyperparams.alpha_decay = parse_real(v); }},
      {"q_epsilon_decay", [](SimConfig& c, std::string_view v) { c.training.hyperparams.epsilon_decay = parse_real(v); }},
      {"train_episodes", [](SimConfig& c, std::string_view v) { c.training.episodes = parse_integer<std::uint32_t>(v); }},
      {"train_capacity_fraction", [](SimConfig& c, std::string_view v) { c.training.capacity_fraction = parse_real(v); }},
      {"train_decay", [](SimConfig& c, std::string_view v) {
         if (v == "step") c.training.decay = DecaySchedule::kPerStep;
         else if (v == "episode") c.training.decay = DecaySchedule::kPerEpisode;
         else throw std::invalid_argument("expected step or episode");
       }},
      {"reward", [](SimConfig& c, std::string_view v) {
         const auto k = parse_reward_kind(v);
         if (!k) throw std::invalid_argument("expected differential or step_energy");
         c.training.reward = *k;
       }},
  };
  return table;
}

}  // namespace detail

/// Parses `key = value` lines; `#` starts a comment. Keys not given keep
/// their defaults. Unknown or repeated keys, malformed values and invalid
/// results raise ConfigError.
inline SimConfig parse_config(std::string_view text) {
  SimConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "", "expected 'key = value'");
    const std::string_view key = detail::trim(line.substr(0, eq));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, "", "missing key");

    const auto& table = detail::setters();
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError(line_no, std::string(key), "unknown key");
    if (!seen.emplace(key).second) throw ConfigError(line_no, std::string(key), "key given twice");
    if (value.empty()) throw ConfigError(line_no, std::string(key), "missing value");
    try {
      it->second(cfg, value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(line_no, std::string(key), std::string(e.what()) + ", got '" + std::string(value) + "'");
    }
  }
  try {
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(0, "", e.what());
  }
  return cfg;
}

inline SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "", "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace dutysim
