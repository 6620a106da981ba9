#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rollsim/errors.hpp"
#include "rollsim/trace.hpp"

namespace rollsim {

inline constexpr int summary_schema_version = 1;

enum class Category : std::uint8_t { processing, recompute, communication, waiting, idle };
inline constexpr std::size_t category_count = 5;

inline const char* to_string(Category c) {
  switch (c) {
    case Category::processing: return "processing";
    case Category::recompute: return "recompute";
    case Category::communication: return "checkpointing_and_comm";
    case Category::waiting: return "waiting";
    case Category::idle: return "idle";
  }
  return "?";
}

struct ProfileBreakdown {
  std::array<double, category_count> seconds{};

  double& operator[](Category c) { return seconds[static_cast<std::size_t>(c)]; }
  double operator[](Category c) const { return seconds[static_cast<std::size_t>(c)]; }

  [[nodiscard]] double total() const {
    double t = 0.0;
    for (double s : seconds) t += s;
    return t;
  }
  [[nodiscard]] double percent(Category c) const {
    const double t = total();
    return t > 0.0 ? 100.0 * (*this)[c] / t : 0.0;
  }
  ProfileBreakdown& operator+=(const ProfileBreakdown& o) {
    for (std::size_t i = 0; i < category_count; ++i) seconds[i] += o.seconds[i];
    return *this;
  }
};

struct FailureRecord {
  VirtualTime time = 0.0;
  int victim = -1;
  int replacement = -1;
  friend bool operator==(const FailureRecord&, const FailureRecord&) = default;
};

struct RecoveryStats {
  VirtualTime time = 0.0;
  int victim = -1;
  int secured_band = 0;
  std::size_t l1 = 0;
  std::size_t l2 = 0;
  std::size_t l3 = 0;
  std::uint64_t cancelled = 0;
  std::uint64_t replays = 0;
  friend bool operator==(const RecoveryStats&, const RecoveryStats&) = default;
};

struct RunSummary {
  double makespan = 0.0;
  double aggregated_processing = 0.0;  // processing + recompute seconds
  std::uint64_t cancelled_count = 0;
  std::uint64_t replay_count = 0;
  std::uint64_t checkpoint_sends = 0;
  ProfileBreakdown profile;
  std::vector<FailureRecord> failures;
  std::map<int, std::uint64_t> worker_tasks;  // completed attempts per worker
  std::uint64_t tc_triangles = 0;
  std::vector<RecoveryStats> recoveries;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;
};

/// Rebuilds the metrics of a run from its trace, one event at a time.
/// Category time is attributed from each worker's state transitions;
/// structural problems (a run_end without run_begin, events after
/// run_complete, no run_complete at all) raise IntegrityError.
class Summarizer {
 public:
  void on_event(const TraceEvent& e) {
    if (done_) fail("event after run_complete", e);
    if (e.time < last_time_) fail("time went backwards", e);
    last_time_ = e.time;
    switch (e.kind) {
      case TraceKind::join: {
        auto& w = workers_[e.worker];
        if (w.joined) fail("worker joined twice", e);
        w = Worker{true, true, false, Category::idle, e.time};
        out_.worker_tasks.try_emplace(e.worker, 0);
        break;
      }
      case TraceKind::pop:
      case TraceKind::wait_begin:
        switch_to(e, Category::waiting);
        break;
      case TraceKind::release:
        switch_to(e, Category::idle);
        break;
      case TraceKind::fetch:
      case TraceKind::log:
        switch_to(e, Category::communication);
        break;
      case TraceKind::checkpoint:
        switch_to(e, Category::communication);
        ++out_.checkpoint_sends;
        break;
      case TraceKind::run_begin: {
        auto& w = live(e);
        if (w.running) fail("run_begin while already running", e);
        switch_to(e, e.replay || e.attempt > 1 ? Category::recompute : Category::processing);
        w.running = true;
        break;
      }
      case TraceKind::run_end: {
        auto& w = live(e);
        if (!w.running) fail("run_end without matching run_begin", e);
        w.running = false;
        ++out_.worker_tasks[e.worker];
        switch_to(e, Category::idle);
        break;
      }
      case TraceKind::abandon:
        live(e).running = false;
        switch_to(e, Category::idle);
        break;
      case TraceKind::leave: {
        auto& w = live(e);
        close(w, e.time);
        w.alive = false;
        break;
      }
      case TraceKind::cancel:
        ++out_.cancelled_count;
        break;
      case TraceKind::replay_enqueue:
        ++out_.replay_count;
        break;
      case TraceKind::failure:
        out_.failures.push_back(
            FailureRecord{e.time, e.worker, static_cast<int>(e.value)});
        break;
      case TraceKind::run_complete:
        for (auto& [id, w] : workers_) {
          if (!w.alive) continue;
          if (w.running) fail("worker still running at run_complete", e);
          close(w, e.time);
          w.alive = false;
        }
        out_.makespan = e.time;
        done_ = true;
        break;
      case TraceKind::enqueue:
      case TraceKind::wait_end:
      case TraceKind::recovery_begin:
      case TraceKind::recovery_end:
        break;
    }
  }

  // The summary so far; throws unless run_complete was seen.
  [[nodiscard]] RunSummary finish() const {
    if (!done_) throw IntegrityError("trace has no run_complete event");
    RunSummary s = out_;
    s.aggregated_processing = s.profile[Category::processing] + s.profile[Category::recompute];
    return s;
  }

 private:
  struct Worker {
    bool joined = false;
    bool alive = false;
    bool running = false;
    Category category = Category::idle;
    VirtualTime since = 0.0;
  };

  [[noreturn]] static void fail(const std::string& what, const TraceEvent& e) {
    throw IntegrityError("malformed trace at seq " + std::to_string(e.sequence) + " (" +
                         to_string(e.kind) + ", worker " + std::to_string(e.worker) +
                         "): " + what);
  }

  Worker& live(const TraceEvent& e) {
    auto it = workers_.find(e.worker);
    if (it == workers_.end() || !it->second.alive) fail("event for a worker not in the run", e);
    return it->second;
  }

  void close(Worker& w, VirtualTime t) {
    out_.profile[w.category] += t - w.since;
    w.since = t;
  }

  void switch_to(const TraceEvent& e, Category c) {
    auto& w = live(e);
    close(w, e.time);
    w.category = c;
  }

  std::map<int, Worker> workers_;
  RunSummary out_;
  VirtualTime last_time_ = 0.0;
  bool done_ = false;
};

inline RunSummary summarize(const std::vector<TraceEvent>& trace) {
  Summarizer s;
  for (const auto& e : trace) s.on_event(e);
  return s.finish();
}

// ---- JSON ----

inline nlohmann::ordered_json to_json(const RunSummary& s) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["schema_version"] = summary_schema_version;
  j["makespan_s"] = s.makespan;
  j["aggregated_processing_s"] = s.aggregated_processing;
  j["cancelled_count"] = s.cancelled_count;
  j["replay_count"] = s.replay_count;
  j["checkpoint_sends"] = s.checkpoint_sends;
  ordered_json profile = ordered_json::object();
  for (std::size_t i = 0; i < category_count; ++i) {
    const auto c = static_cast<Category>(i);
    profile[to_string(c)] = {{"seconds", s.profile[c]}, {"percent", s.profile.percent(c)}};
  }
  j["profile"] = profile;
  ordered_json failures = ordered_json::array();
  for (const auto& f : s.failures) {
    failures.push_back({{"time_s", f.time}, {"victim", f.victim}, {"replacement", f.replacement}});
  }
  j["failures"] = failures;
  ordered_json tasks = ordered_json::object();
  for (const auto& [w, n] : s.worker_tasks) tasks[std::to_string(w)] = n;
  j["worker_tasks"] = tasks;
  j["tc_triangles"] = s.tc_triangles;
  ordered_json rec = ordered_json::array();
  for (const auto& r : s.recoveries) {
    rec.push_back({{"time_s", r.time},
                   {"victim", r.victim},
                   {"secured_band", r.secured_band},
                   {"l1", r.l1},
                   {"l2", r.l2},
                   {"l3", r.l3},
                   {"cancelled", r.cancelled},
                   {"replays", r.replays}});
  }
  j["recoveries"] = rec;
  j["seed"] = s.seed;
  ordered_json cfg = ordered_json::object();
  for (const auto& [k, v] : s.config) cfg[k] = v;
  j["config"] = cfg;
  return j;
}

inline RunSummary summary_from_json(const nlohmann::ordered_json& j) {
  try {
    if (j.at("schema_version").get<int>() != summary_schema_version) {
      throw IntegrityError("unsupported summary schema_version " +
                           j.at("schema_version").dump());
    }
    RunSummary s;
    s.makespan = j.at("makespan_s").get<double>();
    s.aggregated_processing = j.at("aggregated_processing_s").get<double>();
    s.cancelled_count = j.at("cancelled_count").get<std::uint64_t>();
    s.replay_count = j.at("replay_count").get<std::uint64_t>();
    s.checkpoint_sends = j.at("checkpoint_sends").get<std::uint64_t>();
    for (std::size_t i = 0; i < category_count; ++i) {
      const auto c = static_cast<Category>(i);
      s.profile[c] = j.at("profile").at(to_string(c)).at("seconds").get<double>();
    }
    for (const auto& f : j.at("failures")) {
      s.failures.push_back(FailureRecord{f.at("time_s").get<double>(), f.at("victim").get<int>(),
                                         f.at("replacement").get<int>()});
    }
    for (const auto& [k, v] : j.at("worker_tasks").items()) {
      s.worker_tasks[std::stoi(k)] = v.get<std::uint64_t>();
    }
    s.tc_triangles = j.at("tc_triangles").get<std::uint64_t>();
    for (const auto& r : j.at("recoveries")) {
      s.recoveries.push_back(RecoveryStats{
          r.at("time_s").get<double>(), r.at("victim").get<int>(),
          r.at("secured_band").get<int>(), r.at("l1").get<std::size_t>(),
          r.at("l2").get<std::size_t>(), r.at("l3").get<std::size_t>(),
          r.at("cancelled").get<std::uint64_t>(), r.at("replays").get<std::uint64_t>()});
    }
    s.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [k, v] : j.at("config").items()) {
      s.config.emplace_back(k, v.get<std::string>());
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw IntegrityError(std::string("malformed summary JSON: ") + e.what());
  }
}

inline std::string emit_json(const RunSummary& s) { return to_json(s).dump(2) + "\n"; }

inline RunSummary parse_summary(const std::string& text) {
  try {
    return summary_from_json(nlohmann::ordered_json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw IntegrityError(std::string("malformed summary JSON: ") + e.what());
  }
}

// ---- comparison ----

struct MetricDelta {
  double baseline = 0.0;   // default rollback
  double candidate = 0.0;  // dependency-aware
  [[nodiscard]] double delta() const { return baseline - candidate; }
  // Percentage reduction relative to the baseline; 0 when the baseline is 0.
  [[nodiscard]] double reduction_percent() const {
    return baseline != 0.0 ? 100.0 * (baseline - candidate) / baseline : 0.0;
  }
};

struct Comparison {
  MetricDelta cancelled;
  MetricDelta processing;
  MetricDelta makespan;
};

/// `a` and `b` must come from the same configuration apart from Recovery.
inline Comparison compare(const RunSummary& a, const RunSummary& b) {
  auto strip = [](std::vector<std::pair<std::string, std::string>> cfg) {
    std::erase_if(cfg, [](const auto& kv) { return kv.first == "Recovery"; });
    return cfg;
  };
  if (strip(a.config) != strip(b.config) || a.seed != b.seed) {
    throw ConfigError("compare: summaries come from different configurations");
  }
  return Comparison{
      {static_cast<double>(a.cancelled_count), static_cast<double>(b.replay_count)},
      {a.aggregated_processing, b.aggregated_processing},
      {a.makespan, b.makespan}};
}

// ---- files ----

/// Writes to a sibling temporary and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw std::runtime_error("cannot rename " + tmp + " to " + path.string() + ": " + ec.message());
  }
}

inline std::string profile_table(const ProfileBreakdown& p) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << "category,seconds,percent\n";
  for (std::size_t i = 0; i < category_count; ++i) {
    const auto c = static_cast<Category>(i);
    os << to_string(c) << ',' << p[c] << ',' << p.percent(c) << '\n';
  }
  return os.str();
}

}  // namespace rollsim
