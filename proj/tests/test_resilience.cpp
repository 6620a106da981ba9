#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <tuple>
#include <set>
#include <vector>

#include "rollsim/rollsim.hpp"
#include "rollsim/verify.hpp"

using namespace rollsim;

namespace {

std::vector<TaskIndex> idx(const GridSpec& g, std::initializer_list<TaskId> ids) {
  std::vector<TaskIndex> out;
  for (TaskId id : ids) out.push_back(index_of(id, g));
  std::sort(out.begin(), out.end());
  return out;
}

SimConfig small_config(int s, int t, int level, int workers, RecoveryStrategy strategy) {
  SimConfig c;
  c.stencil_size = s;
  c.timesteps = t;
  c.checkpoint_level = level;
  c.worker_count = workers;
  c.checkpoint_enabled = true;
  c.fail_enabled = true;
  c.recovery = strategy;
  c.process_cost = 5.0;
  c.backup_cost = 0.1;
  return c;
}

}  // namespace

// ---- ring ----

TEST(Ring, ThreeWorkers) {
  const auto r = assign_ring(3);
  EXPECT_EQ(r.guard(0), 1);
  EXPECT_EQ(r.guard(1), 2);
  EXPECT_EQ(r.guard(2), 0);
  EXPECT_EQ(r.protectee(0), 2);
  EXPECT_TRUE(r.consistent());
}

TEST(Ring, TwoWorkersAreMutual) {
  const auto r = assign_ring(2);
  EXPECT_EQ(r.guard(0), 1);
  EXPECT_EQ(r.protectee(0), 1);
  EXPECT_EQ(r.guard(1), 0);
}

TEST(Ring, FewerThanTwoIsAnError) {
  EXPECT_THROW(assign_ring(1), ConfigError);
  EXPECT_THROW(assign_ring(0), ConfigError);
  EXPECT_THROW(RingAssignment({1, 1}), std::invalid_argument);
}

TEST(Ring, SpliceReplacesVictim) {
  auto r = assign_ring(3);
  r.splice(1, 3);
  EXPECT_EQ(r.guard(0), 3);
  EXPECT_EQ(r.guard(3), 2);
  EXPECT_EQ(r.protectee(3), 0);
  EXPECT_FALSE(r.contains(1));
  EXPECT_TRUE(r.consistent());
  EXPECT_THROW(r.splice(0, 2), std::invalid_argument);
}

TEST(Ring, BijectionAfterManyRepairs) {
  auto r = assign_ring(7);
  int next = 7;
  for (int round = 0; round < 50; ++round) {
    const auto& m = r.members();
    const WorkerId victim = m[static_cast<std::size_t>((round * 5) % static_cast<int>(m.size()))];
    r.splice(victim, next++);
    ASSERT_TRUE(r.consistent());
    for (WorkerId w : r.members()) {
      EXPECT_EQ(r.protectee(r.guard(w)), w);
      EXPECT_EQ(r.guard(r.protectee(w)), w);
    }
  }
}

// ---- failures ----

TEST(Failures, SameSeedSameSchedule) {
  const auto a = generate_failures(1800.0, 17, 20000.0);
  const auto b = generate_failures(1800.0, 17, 20000.0);
  ASSERT_EQ(a.failures.size(), b.failures.size());
  for (std::size_t i = 0; i < a.failures.size(); ++i) {
    EXPECT_EQ(a.failures[i].time, b.failures[i].time);
    EXPECT_EQ(a.failures[i].victim_draw, b.failures[i].victim_draw);
  }
  const auto c = generate_failures(1800.0, 18, 20000.0);
  EXPECT_TRUE(c.failures.empty() || a.failures.empty() ||
              c.failures.front().time != a.failures.front().time);
}

TEST(Failures, DisabledGivesEmptySchedule) {
  EXPECT_TRUE(generate_failures(1800.0, 1, 1e9, false).failures.empty());
}

TEST(Failures, AscendingAndBoundedByHorizon) {
  const auto s = generate_failures(10.0, 3, 1000.0);
  ASSERT_FALSE(s.failures.empty());
  for (std::size_t i = 0; i < s.failures.size(); ++i) {
    EXPECT_LT(s.failures[i].time, 1000.0);
    EXPECT_GE(s.failures[i].victim_draw, 0.0);
    EXPECT_LT(s.failures[i].victim_draw, 1.0);
    if (i > 0) {
      EXPECT_GT(s.failures[i].time, s.failures[i - 1].time);
    }
  }
}

// Mean inter-arrival over a long stream is close to the MTBF (3 standard errors).
TEST(Failures, MeanMatchesMtbf) {
  FailureStream stream(1800.0, 99);
  const int n = 20000;
  double last = 0.0;
  for (int i = 0; i < n; ++i) last = stream.next().time;
  EXPECT_NEAR(last / n, 1800.0, 3.0 * 1800.0 / std::sqrt(static_cast<double>(n)));
}

TEST(Failures, PickVictim) {
  const std::vector<int> live{2, 5, 9};
  EXPECT_EQ(pick_victim(live, 0.0), 2);
  EXPECT_EQ(pick_victim(live, 0.5), 5);
  EXPECT_EQ(pick_victim(live, 0.999), 9);
}

// ---- stores ----

TEST(CheckpointStore, SecuredBandExamples) {
  const StencilKernel k(GridSpec{4, 4}, 2);
  CheckpointStore store(k);
  EXPECT_EQ(store.secured_band(), 0);
  std::vector<TaskIndex> band1;
  std::vector<TaskIndex> band2;
  for (TaskIndex v = 0; v < 16; ++v) {
    if (!k.is_entry(v)) continue;
    (k.band_of(v) == 1 ? band1 : band2).push_back(v);
  }
  for (std::size_t i = 0; i + 1 < band1.size(); ++i) store.record(1, 0, band1[i], 1.0);
  EXPECT_EQ(store.secured_band(), 0);
  store.record(1, 0, band1.back(), 2.0);
  EXPECT_EQ(store.secured_band(), 1);
  store.record(1, 0, band2.front(), 3.0);
  EXPECT_EQ(store.secured_band(), 1);
  for (TaskIndex v : band2) store.record(1, 0, v, 4.0);
  EXPECT_EQ(store.secured_band(), 2);
  store.rollback_to(1);
  EXPECT_EQ(store.secured_band(), 1);
  EXPECT_FALSE(store.is_recorded(band2.front()));
  EXPECT_TRUE(store.is_recorded(band1.front()));
}

TEST(CheckpointStore, DoubleBufferKeepsTwoGenerations) {
  const StencilKernel k(GridSpec{4, 8}, 2);
  CheckpointStore store(k);
  for (TaskIndex v = 0; v < 32; ++v) {
    if (k.is_entry(v)) store.record(1, 0, v, static_cast<double>(v));
    EXPECT_LE(store.max_generations(), 2u);
  }
  EXPECT_EQ(store.max_generations(), 2u);
  EXPECT_EQ(store.generations(1, 0, 0), 2u);
  EXPECT_EQ(store.secured_band(), 4);
  store.transfer_guard(1, 7);
  EXPECT_EQ(store.generations(1, 0, 0), 0u);
  EXPECT_EQ(store.generations(7, 0, 0), 2u);
}

TEST(TaskLogStore, TransferKeepsRecords) {
  TaskLogStore logs;
  logs.append(1, 0, LogRecord{0, 3, 1.0});
  logs.append(1, 0, LogRecord{1, 4, 2.0});
  logs.append(2, 1, LogRecord{2, 5, 3.0});
  logs.transfer_guard(1, 9);
  EXPECT_TRUE(logs.logs(1, 0).empty());
  EXPECT_EQ(logs.logs(9, 0).size(), 2u);
  EXPECT_EQ(logs.total(), 3u);
}

// ---- L2 / L3 ----

TEST(ComputeL2, Examples) {
  const GridSpec g{4, 2};
  const StencilKernel k(g, 2);
  EXPECT_EQ(compute_l2(k, idx(g, {{2, 4}}), true), idx(g, {{1, 4}}));
  EXPECT_TRUE(compute_l2(k, {}, true).empty());
  const StencilKernel k1(GridSpec{4, 4}, 1);
  EXPECT_EQ(compute_l2(k1, idx(GridSpec{4, 4}, {{1, 1}}), true), idx(GridSpec{4, 4}, {{1, 1}}));
}

TEST(ComputeL2, WithoutCheckpointsUsesInitialData) {
  const GridSpec g{8, 4};
  const StencilKernel k(g, 1);
  const auto l2 = compute_l2(k, idx(g, {{2, 2}}), false);
  for (TaskIndex v : l2) EXPECT_TRUE(k.graph().dependencies(v).empty());
  EXPECT_EQ(l2, idx(g, {{1, 1}, {1, 3}}));
}

TEST(ComputeL3, Examples) {
  const GridSpec g{4, 2};
  const TaskGraph graph = build_stencil_graph(g);
  EXPECT_EQ(compute_l3(graph, idx(g, {{2, 4}}), idx(g, {{1, 4}})), idx(g, {{1, 4}, {2, 4}}));
  const auto t = idx(g, {{1, 3}});
  EXPECT_EQ(compute_l3(graph, t, t), t);
  EXPECT_TRUE(compute_l3(graph, {}, t).empty());
}

// The narrative set includes T(2,3), which never started; only started tasks
// enter L1, and with the remaining two the replay set is the three listed.
TEST(ComputeL3, NarrativeExampleWithStartedFilter) {
  const GridSpec g{8, 4};
  const StencilKernel k(g, 2);
  const auto l1 = idx(g, {{1, 4}, {2, 5}});
  const auto expected = idx(g, {{1, 4}, {2, 4}, {2, 5}});
  EXPECT_EQ(compute_l3(k.graph(), l1, compute_l2(k, l1, true)), expected);
  EXPECT_EQ(compute_l3(k.graph(), l1, idx(g, {{1, 4}, {2, 4}, {2, 5}})), expected);
  // Unfiltered, T(2,3) is on a path from T(1,4) and recovers itself too.
  const auto all = idx(g, {{2, 3}, {1, 4}, {2, 5}});
  EXPECT_EQ(compute_l3(k.graph(), all, idx(g, {{1, 4}, {2, 4}, {2, 5}})),
            idx(g, {{1, 4}, {2, 3}, {2, 4}, {2, 5}}));
}

TEST(ComputeL3, MatchesBruteForceOnRandomSets) {
  const GridSpec g{12, 12};
  const TaskGraph graph = build_stencil_graph(g);
  const auto reach = oracle::reachability(g);
  std::mt19937 rng(5);
  std::uniform_int_distribution<TaskIndex> pick(0, static_cast<TaskIndex>(g.task_count() - 1));
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<TaskIndex> l1;
    std::vector<TaskIndex> l2;
    for (int i = 0; i < 1 + trial % 4; ++i) l1.push_back(pick(rng));
    for (int i = 0; i < 1 + trial % 3; ++i) l2.push_back(pick(rng));
    l1 = recovery_detail::sorted_unique(l1);
    l2 = recovery_detail::sorted_unique(l2);
    EXPECT_EQ(compute_l3(graph, l1, l2), oracle::l3_brute_force(reach, l1, l2));
  }
}

// ---- recovery in the simulator ----

// Searches single failures at every event boundary of a 2-worker level-2 run
// for the narrative situation: the victim crashes while running T(2,5).
TEST(Recovery, NarrativeScenarioReplaysThreeTasks) {
  const GridSpec g{8, 4};
  const auto cfg = small_config(8, 4, 2, 2, RecoveryStrategy::dependency_aware);
  const TaskIndex t25 = index_of({2, 5}, g);
  bool found = false;
  for (const auto& scenario : boundary_scenarios(g, 2, 2)) {
    for (WorkerId victim : {0, 1}) {
      SimOptions opts;
      opts.keep_plans = true;
      opts.keep_trace = true;
      opts.scripted_failures = std::vector<ScriptedFailure>{{scenario.front().time, victim}};
      Simulator sim(cfg, opts);
      const auto r = sim.run();
      ASSERT_EQ(r.plans.size(), 1u);
      bool running_t25 = false;
      for (const auto& e : r.trace) {
        if (e.kind == TraceKind::abandon && e.worker == victim && e.task == t25 &&
            e.time == scenario.front().time) {
          running_t25 = true;
        }
      }
      if (!running_t25 || r.plans[0].secured_band != 1) continue;
      found = true;
      EXPECT_EQ(r.plans[0].l3, idx(g, {{1, 4}, {2, 4}, {2, 5}}));
      EXPECT_EQ(r.summary.recoveries.at(0).replays, 3u);
      EXPECT_TRUE(check_run(r, sim.kernel().graph()).empty());
    }
  }
  EXPECT_TRUE(found);
}

TEST(Recovery, IdleVictimWithNothingUnsecuredCancelsNothing) {
  for (auto strategy : {RecoveryStrategy::default_rollback, RecoveryStrategy::dependency_aware}) {
    auto cfg = small_config(4, 2, 1, 3, strategy);
    SimOptions opts;
    opts.keep_plans = true;
    // Level 1 secures every band as it completes; at time 0 nothing has started.
    opts.scripted_failures = std::vector<ScriptedFailure>{{0.0, 2}};
    const auto r = run_simulation(cfg, opts);
    EXPECT_EQ(r.summary.cancelled_count, 0u);
    EXPECT_EQ(r.summary.replay_count, 0u);
    ASSERT_EQ(r.summary.failures.size(), 1u);
    EXPECT_EQ(r.summary.failures[0].replacement, 3);
  }
}

TEST(Recovery, FailureBeforeAnyCheckpointRestartsEverythingStarted) {
  auto cfg = small_config(8, 4, 2, 2, RecoveryStrategy::default_rollback);
  SimOptions opts;
  opts.keep_trace = true;
  opts.keep_plans = true;
  opts.scripted_failures = std::vector<ScriptedFailure>{{6.0, 0}};
  const auto r = run_simulation(cfg, opts);
  ASSERT_EQ(r.plans.size(), 1u);
  EXPECT_EQ(r.plans[0].secured_band, 0);
  std::size_t started = 0;
  for (const auto& e : r.trace) {
    if (e.time > 6.0) break;
    if (e.kind == TraceKind::run_begin) ++started;
  }
  EXPECT_EQ(r.summary.cancelled_count, started);
}

TEST(Recovery, DefaultOnlyCancelsBeyondSecuredBand) {
  const GridSpec g{4, 4};
  const StencilKernel k(g, 2);
  auto cfg = small_config(4, 4, 2, 2, RecoveryStrategy::default_rollback);
  bool saw_secured = false;
  for (const auto& scenario : boundary_scenarios(g, 2, 2)) {
    SimOptions opts;
    opts.keep_trace = true;
    opts.keep_plans = true;
    opts.scripted_failures = scenario;
    const auto r = run_simulation(cfg, opts);
    ASSERT_EQ(r.plans.size(), 1u);
    const int secured = r.plans[0].secured_band;
    saw_secured = saw_secured || secured == 1;
    const double at = scenario.front().time;
    for (const auto& e : r.trace) {
      if (e.kind != TraceKind::cancel || e.time != at) continue;
      const bool in_flight_on_victim = [&] {
        for (const auto& f : r.trace) {
          if (f.kind == TraceKind::abandon && f.time == at && f.worker == scenario.front().victim &&
              f.task == e.task)
            return true;
        }
        return false;
      }();
      EXPECT_TRUE(k.band_of(e.task) > secured || in_flight_on_victim);
    }
  }
  EXPECT_TRUE(saw_secured);
}

TEST(Recovery, L1OnlyHoldsStartedVictimTasks) {
  const GridSpec g{8, 8};
  const auto cfg = small_config(8, 8, 2, 3, RecoveryStrategy::dependency_aware);
  for (const auto& scenario : boundary_scenarios(g, 2, 3)) {
    SimOptions opts;
    opts.keep_plans = true;
    opts.keep_trace = true;
    opts.scripted_failures = scenario;
    Simulator sim(cfg, opts);
    const auto r = sim.run();
    const double at = scenario.front().time;
    const WorkerId victim = scenario.front().victim;
    std::set<TaskIndex> started_on_victim;
    for (const auto& e : r.trace) {
      if (e.time > at) break;
      if (e.kind == TraceKind::run_begin && e.worker == victim) started_on_victim.insert(e.task);
    }
    const auto& plan = r.plans.at(0);
    for (TaskIndex t1 : plan.l1) {
      EXPECT_TRUE(started_on_victim.contains(t1));
      EXPECT_TRUE(std::binary_search(plan.l3.begin(), plan.l3.end(), t1));
    }
    EXPECT_TRUE(check_run(r, sim.kernel().graph()).empty());
  }
}

TEST(Recovery, RandomFailuresStaySound) {
  for (auto strategy : {RecoveryStrategy::default_rollback, RecoveryStrategy::dependency_aware}) {
    for (int level = 1; level <= 3; ++level) {
      for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        auto cfg = small_config(16, 16, level, 6, strategy);
        cfg.mtbf = 40.0;
        cfg.seed = seed;
        Simulator sim(cfg, {});
        const auto r = sim.run();
        EXPECT_FALSE(r.summary.failures.empty());
        EXPECT_TRUE(r.ring_consistent);
        EXPECT_LE(r.max_checkpoint_generations, 2u);
        const auto bad = check_run(r, sim.kernel().graph());
        EXPECT_TRUE(bad.empty()) << to_string(strategy) << " level " << level << " seed " << seed
                                 << ": " << (bad.empty() ? "" : bad.front());
      }
    }
  }
}

TEST(Recovery, LogPrecedesRun) {
  auto cfg = small_config(8, 8, 2, 3, RecoveryStrategy::dependency_aware);
  cfg.mtbf = 30.0;
  cfg.seed = 4;
  cfg.log_cost = 0.05;
  SimOptions opts;
  opts.keep_trace = true;
  const auto r = run_simulation(cfg, opts);
  std::set<std::tuple<TaskIndex, int, bool>> logged;
  for (const auto& e : r.trace) {
    if (e.kind == TraceKind::log) logged.insert({e.task, e.attempt, e.replay});
    if (e.kind == TraceKind::run_begin) {
      EXPECT_TRUE(logged.contains({e.task, e.attempt, e.replay}));
    }
  }
}

TEST(Recovery, SecuredBandNeverDecreasesBetweenFailures) {
  auto cfg = small_config(16, 16, 2, 4, RecoveryStrategy::default_rollback);
  cfg.fail_enabled = false;
  SimOptions opts;
  opts.keep_trace = true;
  Simulator sim(cfg, opts);
  const auto r = sim.run();
  // Replay the checkpoint events into a fresh store and watch B*.
  CheckpointStore store(sim.kernel());
  int last = 0;
  for (const auto& e : r.trace) {
    if (e.kind != TraceKind::checkpoint) continue;
    store.record((e.worker + 1) % 4, e.worker, e.task, e.time);
    EXPECT_GE(store.secured_band(), last);
    last = store.secured_band();
  }
  EXPECT_EQ(last, 16 / 2);
}
