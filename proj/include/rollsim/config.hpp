#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "rollsim/errors.hpp"
#include "rollsim/stencil.hpp"
#include "rollsim/tiling.hpp"

namespace rollsim {

enum class RecoveryStrategy : std::uint8_t { default_rollback, dependency_aware };

inline const char* to_string(RecoveryStrategy s) {
  return s == RecoveryStrategy::default_rollback ? "Default" : "Dependency";
}

struct SimConfig {
  std::string kernel = "Stencil";
  int worker_count = 2;
  int checkpoint_level = 1;
  bool checkpoint_enabled = true;
  RecoveryStrategy recovery = RecoveryStrategy::default_rollback;
  bool fail_enabled = false;
  double mtbf = 1800.0;
  std::uint64_t seed = 0;
  std::string scheduler = "Horizontal";
  double backup_cost = 0.0013;
  double process_cost = 7.1;
  int stencil_size = 128;
  int timesteps = 128;
  double log_cost = 0.0;
  std::optional<double> fetch_cost;  // defaults to backup_cost

  // Key/value pairs as read (after --set overrides), in canonical key order.
  std::vector<std::pair<std::string, std::string>> echo;

  [[nodiscard]] GridSpec grid() const { return GridSpec{stencil_size, timesteps}; }
  [[nodiscard]] double effective_fetch_cost() const {
    return fetch_cost.value_or(backup_cost);
  }

  // Semantic equality; the echo block is ignored.
  friend bool operator==(const SimConfig& a, const SimConfig& b) {
    return a.kernel == b.kernel && a.worker_count == b.worker_count &&
           a.checkpoint_level == b.checkpoint_level &&
           a.checkpoint_enabled == b.checkpoint_enabled &&
           a.recovery == b.recovery && a.fail_enabled == b.fail_enabled &&
           a.mtbf == b.mtbf && a.seed == b.seed && a.scheduler == b.scheduler &&
           a.backup_cost == b.backup_cost && a.process_cost == b.process_cost &&
           a.stencil_size == b.stencil_size && a.timesteps == b.timesteps &&
           a.log_cost == b.log_cost && a.fetch_cost == b.fetch_cost;
  }
};

namespace config_detail {

struct KeySpec {
  std::string_view name;
  bool general;    // [GENERAL] when true, kernel section otherwise
  bool mandatory;
};

inline constexpr std::array<KeySpec, 15> keys{{
    {"Kernel", true, true},
    {"WorkerCount", true, true},
    {"CheckpointLevel", true, true},
    {"Checkpoint", true, true},
    {"Recovery", true, true},
    {"Fail", true, true},
    {"MTBF", true, true},
    {"Seed", true, true},
    {"Scheduler", true, true},
    {"BackupCost", false, true},
    {"ProcessCost", false, true},
    {"StencilSize", false, true},
    {"Timesteps", false, true},
    {"LogCost", false, false},
    {"FetchCost", false, false},
}};

inline const KeySpec* find_key(std::string_view name) {
  for (const auto& k : keys) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct RawValue {
  std::string value;
  int line = 0;  // 0 for command-line overrides
};

inline std::string where(std::string_view key, int line) {
  return line > 0 ? "key '" + std::string(key) + "' (line " + std::to_string(line) + ")"
                  : "key '" + std::string(key) + "' (--set)";
}

template <typename T>
T parse_number(std::string_view key, const RawValue& raw) {
  T out{};
  const char* first = raw.value.data();
  const char* last = first + raw.value.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last || raw.value.empty()) {
    throw ConfigError(where(key, raw.line) + ": cannot parse '" + raw.value +
                      "' as a number");
  }
  return out;
}

inline bool parse_flag(std::string_view key, const RawValue& raw) {
  if (raw.value == "Y") return true;
  if (raw.value == "N") return false;
  throw ConfigError(where(key, raw.line) + ": expected Y|N, got '" + raw.value + "'");
}

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

}  // namespace config_detail

/// Parses the INI configuration. Keys are case-sensitive; [GENERAL] holds the
/// run options and the section named by Kernel holds the kernel costs and
/// sizes. `overrides` are KEY=VALUE strings that replace file values.
inline SimConfig parse_config(std::string_view text,
                              std::span<const std::string> overrides = {}) {
  using namespace config_detail;
  std::map<std::string, RawValue, std::less<>> raw;
  std::map<std::string, std::string, std::less<>> section_of;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto line = trim(text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos));
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (line.empty() || line.front() == ';' || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected KEY = VALUE");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (section.empty()) {
      throw ConfigError(where(key, line_no) + ": appears before any section");
    }
    const KeySpec* spec = find_key(key);
    if (spec == nullptr) throw ConfigError(where(key, line_no) + ": unknown key");
    if (raw.contains(key)) throw ConfigError(where(key, line_no) + ": duplicate key");
    raw[key] = RawValue{value, line_no};
    section_of[key] = section;
  }

  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set '" + ov + "': expected KEY=VALUE");
    }
    const std::string key(trim(std::string_view(ov).substr(0, eq)));
    if (find_key(key) == nullptr) throw ConfigError(where(key, 0) + ": unknown key");
    raw[key] = RawValue{std::string(trim(std::string_view(ov).substr(eq + 1))), 0};
    section_of.erase(key);
  }

  for (const auto& k : keys) {
    if (k.mandatory && !raw.contains(k.name)) {
      throw ConfigError("missing mandatory key '" + std::string(k.name) + "'");
    }
  }

  SimConfig cfg;
  cfg.kernel = raw.at("Kernel").value;
  if (cfg.kernel != "Stencil") {
    throw ConfigError(where("Kernel", raw.at("Kernel").line) + ": unknown kernel '" +
                      cfg.kernel + "' (supported: Stencil)");
  }
  for (const auto& [key, sec] : section_of) {
    const KeySpec* spec = find_key(key);
    const std::string expected = spec->general ? "GENERAL" : cfg.kernel;
    if (sec != expected) {
      throw ConfigError(where(key, raw.at(key).line) + ": belongs in section [" +
                        expected + "], found in [" + sec + "]");
    }
  }

  cfg.worker_count = parse_number<int>("WorkerCount", raw.at("WorkerCount"));
  cfg.checkpoint_level = parse_number<int>("CheckpointLevel", raw.at("CheckpointLevel"));
  cfg.checkpoint_enabled = parse_flag("Checkpoint", raw.at("Checkpoint"));
  const auto& rec = raw.at("Recovery");
  if (rec.value == "Default") {
    cfg.recovery = RecoveryStrategy::default_rollback;
  } else if (rec.value == "Dependency") {
    cfg.recovery = RecoveryStrategy::dependency_aware;
  } else {
    throw ConfigError(where("Recovery", rec.line) +
                      ": expected Default|Dependency, got '" + rec.value + "'");
  }
  cfg.fail_enabled = parse_flag("Fail", raw.at("Fail"));
  cfg.mtbf = parse_number<double>("MTBF", raw.at("MTBF"));
  cfg.seed = parse_number<std::uint64_t>("Seed", raw.at("Seed"));
  cfg.scheduler = raw.at("Scheduler").value;
  if (cfg.scheduler != "Horizontal") {
    throw ConfigError(where("Scheduler", raw.at("Scheduler").line) +
                      ": unknown scheduler '" + cfg.scheduler + "' (supported: Horizontal)");
  }
  cfg.backup_cost = parse_number<double>("BackupCost", raw.at("BackupCost"));
  cfg.process_cost = parse_number<double>("ProcessCost", raw.at("ProcessCost"));
  cfg.stencil_size = parse_number<int>("StencilSize", raw.at("StencilSize"));
  cfg.timesteps = parse_number<int>("Timesteps", raw.at("Timesteps"));
  if (auto it = raw.find("LogCost"); it != raw.end()) {
    cfg.log_cost = parse_number<double>("LogCost", it->second);
  }
  if (auto it = raw.find("FetchCost"); it != raw.end()) {
    cfg.fetch_cost = parse_number<double>("FetchCost", it->second);
  }
  for (const auto& k : keys) {
    if (auto it = raw.find(k.name); it != raw.end()) {
      cfg.echo.emplace_back(std::string(k.name), it->second.value);
    }
  }
  return cfg;
}

/// Checks value constraints; throws one ConfigError listing every violation.
inline void validate(const SimConfig& cfg) {
  std::vector<std::string> problems;
  const bool needs_ring = cfg.checkpoint_enabled || cfg.fail_enabled;
  if (cfg.worker_count < 1 || (needs_ring && cfg.worker_count < 2)) {
    problems.push_back(
        "WorkerCount >= 2 required for the guard/protectee ring (got " +
        std::to_string(cfg.worker_count) +
        "; a single worker is only allowed with Checkpoint = N and Fail = N)");
  }
  if (!(cfg.process_cost > 0.0)) problems.push_back("ProcessCost > 0 required");
  if (!(cfg.backup_cost >= 0.0)) problems.push_back("BackupCost >= 0 required");
  if (!(cfg.log_cost >= 0.0)) problems.push_back("LogCost >= 0 required");
  if (cfg.fetch_cost && !(*cfg.fetch_cost >= 0.0)) {
    problems.push_back("FetchCost >= 0 required");
  }
  if (cfg.fail_enabled && !(cfg.mtbf > 0.0)) {
    problems.push_back("MTBF > 0 required when Fail = Y");
  }
  try {
    check_tiling(cfg.grid(), cfg.checkpoint_level);
  } catch (const ConfigError& e) {
    std::string_view msg = e.what();
    std::size_t p = 0;
    while ((p = msg.find("\n  ", p)) != std::string_view::npos) {
      p += 3;
      const auto end = msg.find('\n', p);
      problems.emplace_back(msg.substr(p, end == std::string_view::npos ? msg.npos : end - p));
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
}

inline SimConfig load_config(std::string_view text,
                             std::span<const std::string> overrides = {}) {
  SimConfig cfg = parse_config(text, overrides);
  validate(cfg);
  return cfg;
}

// Canonical INI rendering; parse_config(print_config(c)) == c.
inline std::string print_config(const SimConfig& cfg) {
  using config_detail::format_double;
  std::string out = "[GENERAL]\n";
  auto line = [&out](std::string_view k, const std::string& v) {
    out += std::string(k) + " = " + v + "\n";
  };
  line("Kernel", cfg.kernel);
  line("WorkerCount", std::to_string(cfg.worker_count));
  line("CheckpointLevel", std::to_string(cfg.checkpoint_level));
  line("Checkpoint", cfg.checkpoint_enabled ? "Y" : "N");
  line("Recovery", to_string(cfg.recovery));
  line("Fail", cfg.fail_enabled ? "Y" : "N");
  line("MTBF", format_double(cfg.mtbf));
  line("Seed", std::to_string(cfg.seed));
  line("Scheduler", cfg.scheduler);
  out += "[" + cfg.kernel + "]\n";
  line("BackupCost", format_double(cfg.backup_cost));
  line("ProcessCost", format_double(cfg.process_cost));
  line("StencilSize", std::to_string(cfg.stencil_size));
  line("Timesteps", std::to_string(cfg.timesteps));
  if (cfg.log_cost != 0.0) line("LogCost", format_double(cfg.log_cost));
  if (cfg.fetch_cost) line("FetchCost", format_double(*cfg.fetch_cost));
  return out;
}

}  // namespace rollsim
