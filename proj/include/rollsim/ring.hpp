#pragma once

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "rollsim/errors.hpp"

namespace rollsim {

using WorkerId = int;

/// Guard/protectee ring over the live workers. guard(A) is A's right
/// neighbour and protectee(A) its left one, so guard(A) == B iff
/// protectee(B) == A.
class RingAssignment {
 public:
  RingAssignment() = default;

  explicit RingAssignment(std::vector<WorkerId> workers) : order_(std::move(workers)) {
    if (order_.size() < 2) {
      throw ConfigError("guard/protectee ring needs at least 2 workers (got " +
                        std::to_string(order_.size()) + ")");
    }
    std::vector<WorkerId> sorted = order_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("duplicate worker in ring");
    }
  }

  [[nodiscard]] std::size_t size() const noexcept { return order_.size(); }
  [[nodiscard]] const std::vector<WorkerId>& members() const noexcept { return order_; }

  [[nodiscard]] bool contains(WorkerId w) const {
    return std::find(order_.begin(), order_.end(), w) != order_.end();
  }

  [[nodiscard]] WorkerId guard(WorkerId w) const {
    return order_[(position(w) + 1) % order_.size()];
  }

  [[nodiscard]] WorkerId protectee(WorkerId w) const {
    return order_[(position(w) + order_.size() - 1) % order_.size()];
  }

  // Puts `replacement` where `victim` was: protectee(victim) now guarded by
  // the replacement, which in turn is guarded by guard(victim).
  void splice(WorkerId victim, WorkerId replacement) {
    if (contains(replacement)) {
      throw std::invalid_argument("replacement worker " + std::to_string(replacement) +
                                  " already in ring");
    }
    order_[position(victim)] = replacement;
  }

  // Inverse-bijection and single-cycle check over the members.
  [[nodiscard]] bool consistent() const {
    if (order_.size() < 2) return false;
    for (WorkerId w : order_) {
      if (protectee(guard(w)) != w || guard(protectee(w)) != w) return false;
    }
    std::size_t steps = 0;
    WorkerId w = order_.front();
    do {
      w = guard(w);
      ++steps;
    } while (w != order_.front() && steps <= order_.size());
    return steps == order_.size();
  }

 private:
  [[nodiscard]] std::size_t position(WorkerId w) const {
    const auto it = std::find(order_.begin(), order_.end(), w);
    if (it == order_.end()) {
      throw std::out_of_range("worker " + std::to_string(w) + " not in ring");
    }
    return static_cast<std::size_t>(it - order_.begin());
  }

  std::vector<WorkerId> order_;
};

// guard(i) = i+1 mod W over workers 0..W-1.
inline RingAssignment assign_ring(int worker_count) {
  std::vector<WorkerId> ids(static_cast<std::size_t>(std::max(worker_count, 0)));
  for (int i = 0; i < worker_count; ++i) ids[static_cast<std::size_t>(i)] = i;
  return RingAssignment(std::move(ids));
}

}  // namespace rollsim
