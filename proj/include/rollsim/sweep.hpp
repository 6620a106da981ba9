#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rollsim/config.hpp"
#include "rollsim/report.hpp"
#include "rollsim/runtime.hpp"

namespace rollsim {

struct SweepPoint {
  int level = 1;
  RecoveryStrategy strategy = RecoveryStrategy::default_rollback;
  std::uint64_t seed = 0;
};

struct SweepEntry {
  SweepPoint point;
  SimConfig config;
  RunSummary summary;
};

// The config for one sweep point; the echo block records the swept keys as
// if they had been passed with --set.
inline SimConfig sweep_config(const SimConfig& base, const SweepPoint& p) {
  SimConfig c = base;
  c.checkpoint_level = p.level;
  c.recovery = p.strategy;
  c.seed = p.seed;
  auto set = [&c](const std::string& key, const std::string& value) {
    for (auto& [k, v] : c.echo) {
      if (k == key) {
        v = value;
        return;
      }
    }
    c.echo.emplace_back(key, value);
  };
  set("CheckpointLevel", std::to_string(p.level));
  set("Recovery", to_string(p.strategy));
  set("Seed", std::to_string(p.seed));
  return c;
}

inline std::vector<SweepPoint> sweep_points(const std::vector<int>& levels,
                                            const std::vector<RecoveryStrategy>& strategies,
                                            const std::vector<std::uint64_t>& seeds) {
  std::vector<SweepPoint> pts;
  for (int level : levels) {
    for (std::uint64_t seed : seeds) {
      for (RecoveryStrategy s : strategies) pts.push_back(SweepPoint{level, s, seed});
    }
  }
  return pts;
}

/// Runs every point, `threads` at a time. Each run owns its simulator, so
/// the only shared state is the result slot it writes. Results keep the
/// order of `points`.
inline std::vector<SweepEntry> run_sweep(const SimConfig& base, const std::vector<SweepPoint>& points,
                                         unsigned threads = 0) {
  std::vector<SweepEntry> out(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    out[i].point = points[i];
    out[i].config = sweep_config(base, points[i]);
    validate(out[i].config);
  }
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(points.size(), 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto work = [&] {
    for (std::size_t i = next++; i < out.size(); i = next++) {
      try {
        out[i].summary = run_simulation(out[i].config).summary;
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  return out;
}

struct LevelAggregate {
  int level = 0;
  std::size_t runs = 0;
  double makespan = 0.0;  // summed over seeds
  double processing = 0.0;
  std::uint64_t cancelled = 0;
  std::uint64_t replays = 0;
  std::uint64_t failures = 0;
  ProfileBreakdown profile;
};

inline std::map<int, LevelAggregate> aggregate(const std::vector<SweepEntry>& entries,
                                               RecoveryStrategy strategy) {
  std::map<int, LevelAggregate> out;
  for (const auto& e : entries) {
    if (e.point.strategy != strategy) continue;
    auto& a = out[e.point.level];
    a.level = e.point.level;
    ++a.runs;
    a.makespan += e.summary.makespan;
    a.processing += e.summary.aggregated_processing;
    a.cancelled += e.summary.cancelled_count;
    a.replays += e.summary.replay_count;
    a.failures += e.summary.failures.size();
    a.profile += e.summary.profile;
  }
  return out;
}

// One row per level: seed-averaged metrics for a single strategy.
inline std::string series_csv(const std::vector<SweepEntry>& entries, RecoveryStrategy strategy) {
  std::ostringstream os;
  os.precision(12);
  os << "level,runs,makespan_mean_s,aggregated_processing_mean_s,cancelled_mean,"
        "replays_mean,failures_mean,recompute_pct,comm_pct,waiting_pct\n";
  for (const auto& [level, a] : aggregate(entries, strategy)) {
    const double n = static_cast<double>(a.runs);
    os << level << ',' << a.runs << ',' << a.makespan / n << ',' << a.processing / n << ','
       << static_cast<double>(a.cancelled) / n << ',' << static_cast<double>(a.replays) / n
       << ',' << static_cast<double>(a.failures) / n << ','
       << a.profile.percent(Category::recompute) << ','
       << a.profile.percent(Category::communication) << ','
       << a.profile.percent(Category::waiting) << '\n';
  }
  return os.str();
}

// Default versus dependency-aware, per level, over the summed seeds.
inline std::string comparison_csv(const std::vector<SweepEntry>& entries) {
  const auto base = aggregate(entries, RecoveryStrategy::default_rollback);
  const auto cand = aggregate(entries, RecoveryStrategy::dependency_aware);
  std::ostringstream os;
  os.precision(12);
  os << "level,runs,cancelled_default,replays_dependency,processing_default_s,"
        "processing_dependency_s,processing_reduction_pct,makespan_default_s,"
        "makespan_dependency_s,makespan_reduction_pct\n";
  for (const auto& [level, a] : base) {
    const auto it = cand.find(level);
    if (it == cand.end()) continue;
    const auto& b = it->second;
    const MetricDelta proc{a.processing, b.processing};
    const MetricDelta span{a.makespan, b.makespan};
    os << level << ',' << a.runs << ',' << a.cancelled << ',' << b.replays << ','
       << a.processing << ',' << b.processing << ',' << proc.reduction_percent() << ','
       << a.makespan << ',' << b.makespan << ',' << span.reduction_percent() << '\n';
  }
  return os.str();
}

}  // namespace rollsim
