#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rollsim {

// Invalid configuration: bad keys, values, or grid divisibility.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A run or trace violates a simulator invariant.
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The event queue drained while processes were still blocked.
class DeadlockError : public IntegrityError {
 public:
  explicit DeadlockError(std::vector<std::string> wait_for)
      : IntegrityError(describe(wait_for)), wait_for_(std::move(wait_for)) {}

  [[nodiscard]] const std::vector<std::string>& wait_for() const noexcept {
    return wait_for_;
  }

 private:
  static std::string describe(const std::vector<std::string>& edges) {
    std::string msg = "deadlock: " + std::to_string(edges.size()) +
                      " process(es) blocked with an empty event queue";
    for (const auto& e : edges) msg += "\n  " + e;
    return msg;
  }

  std::vector<std::string> wait_for_;
};

}  // namespace rollsim
