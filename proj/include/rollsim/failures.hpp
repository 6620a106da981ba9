#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rollsim/engine.hpp"

namespace rollsim {

struct FailureDraw {
  VirtualTime time = 0.0;
  double victim_draw = 0.0;  // in [0, 1); picks live[floor(draw * live.size())]
};

/// Lazily draws failures: exponential inter-arrival times with mean `mtbf`
/// and a uniform victim selector. Both come from separate streams seeded by
/// one root generator, so the arrival times do not depend on how many
/// victims were chosen.
class FailureStream {
 public:
  FailureStream(double mtbf, std::uint64_t seed) : arrivals_(mtbf > 0.0 ? 1.0 / mtbf : 1.0) {
    std::mt19937_64 root(seed);
    time_rng_.seed(root());
    victim_rng_.seed(root());
  }

  FailureDraw next() {
    last_ += arrivals_(time_rng_);
    return FailureDraw{last_, uniform_(victim_rng_)};
  }

 private:
  std::mt19937_64 time_rng_;
  std::mt19937_64 victim_rng_;
  std::exponential_distribution<double> arrivals_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  VirtualTime last_ = 0.0;
};

struct FailureSchedule {
  std::uint64_t seed = 0;
  double mtbf = 0.0;
  std::vector<FailureDraw> failures;  // ascending time, all < horizon
};

inline FailureSchedule generate_failures(double mtbf, std::uint64_t seed,
                                         VirtualTime horizon, bool enabled = true) {
  FailureSchedule s{seed, mtbf, {}};
  if (!enabled || !(mtbf > 0.0)) return s;
  FailureStream stream(mtbf, seed);
  for (FailureDraw d = stream.next(); d.time < horizon; d = stream.next()) {
    s.failures.push_back(d);
  }
  return s;
}

template <typename Live>
auto pick_victim(const Live& live_sorted, double draw) {
  auto idx = static_cast<std::size_t>(draw * static_cast<double>(live_sorted.size()));
  if (idx >= live_sorted.size()) idx = live_sorted.size() - 1;
  return live_sorted[idx];
}

}  // namespace rollsim
