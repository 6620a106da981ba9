#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rollsim/config.hpp"
#include "rollsim/engine.hpp"
#include "rollsim/failures.hpp"
#include "rollsim/kernel.hpp"
#include "rollsim/recovery.hpp"
#include "rollsim/report.hpp"
#include "rollsim/ring.hpp"
#include "rollsim/stores.hpp"
#include "rollsim/trace.hpp"

namespace rollsim {

enum class InstanceStatus : std::uint8_t { pending, waiting, fetching, running, completed, cancelled };

inline constexpr InstanceId no_instance = std::numeric_limits<InstanceId>::max();

struct TaskInstance {
  TaskIndex task = 0;
  int attempt = 1;
  InstanceStatus status = InstanceStatus::pending;
  WorkerId worker = -1;
  VirtualTime enqueue_time = 0.0;
  VirtualTime start_time = -1.0;   // RUNNING phase start
  VirtualTime finish_time = -1.0;  // set once the run completed, kept if later cancelled
  bool is_replay = false;
  int group = -1;  // recovery group a replay belongs to
  InstanceId superseded_by = no_instance;
  std::vector<InstanceId> inputs;  // dependency instances consumed

  [[nodiscard]] bool started() const noexcept { return start_time >= 0.0; }
};

struct ScriptedFailure {
  VirtualTime time = 0.0;
  WorkerId victim = 0;
};

struct SimOptions {
  bool keep_trace = false;
  bool keep_plans = false;
  // Replaces the random failure stream when set (Fail = Y is still required).
  std::optional<std::vector<ScriptedFailure>> scripted_failures;
};

struct SimResult {
  RunSummary summary;
  std::vector<TraceEvent> trace;
  std::vector<RecoveryPlan> plans;
  std::vector<TaskInstance> instances;
  std::vector<InstanceId> current;
  std::map<WorkerId, std::pair<VirtualTime, VirtualTime>> lifetimes;  // join, leave
  std::map<WorkerId, ProfileBreakdown> worker_profiles;
  std::size_t max_checkpoint_generations = 0;
  bool ring_consistent = true;  // after every repair
  std::vector<std::string> warnings;
};

/// One simulated execution. Workers pull instances from a global queue kept
/// in scheduling order, wait for their inputs, fetch remote inputs, send the
/// task log (and entry checkpoint) to their guard, then run. Failures are
/// handled synchronously at the failure instant.
class Simulator {
 public:
  Simulator(const SimConfig& cfg, SimOptions opts = {})
      : cfg_(cfg),
        opts_(std::move(opts)),
        kernel_(cfg.grid(), cfg.checkpoint_level),
        graph_(kernel_.graph()),
        checkpoints_(kernel_) {
    validate(cfg_);
    use_ring_ = cfg_.worker_count >= 2;
    fetch_cost_ = cfg_.effective_fetch_cost();
  }

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  SimResult run() {
    const std::size_t n = graph_.size();
    current_.assign(n, no_instance);
    attempts_.assign(n, 0);
    if (use_ring_) ring_ = assign_ring(cfg_.worker_count);
    for (TaskIndex v : graph_.schedule()) current_[v] = enqueue_new(v, false, -1);
    for (int i = 0; i < cfg_.worker_count; ++i) add_worker();
    if (cfg_.fail_enabled) {
      injector_ = std::make_unique<Injector>(this);
      injector_handle_ = engine_.spawn(*injector_, "failure-injector");
      if (!opts_.scripted_failures) stream_.emplace(cfg_.mtbf, cfg_.seed);
    }
    engine_.run_until_idle();
    if (!done_) throw IntegrityError("run ended before every task completed");
    return collect();
  }

  [[nodiscard]] const StencilKernel& kernel() const noexcept { return kernel_; }

 private:
  enum class Phase : std::uint8_t { start, idle, dep_wait, fetch, log, checkpoint, run };

  struct Worker final : Process {
    Worker(Simulator* s, WorkerId i) : sim(s), id(i) {}
    void resume(Engine&, const Wakeup& wake) override { sim->step(*this, wake); }

    Simulator* sim;
    WorkerId id;
    ProcessHandle handle;
    bool alive = true;
    bool idle_listed = false;
    Phase phase = Phase::start;
    InstanceId held = no_instance;
    Category category = Category::idle;
    VirtualTime since = 0.0;
    VirtualTime joined = 0.0;
    VirtualTime left = -1.0;
    ProfileBreakdown profile;
  };

  struct Injector final : Process {
    explicit Injector(Simulator* s) : sim(s) {}
    void resume(Engine&, const Wakeup&) override { sim->injector_step(); }
    Simulator* sim;
    bool armed = false;
    std::size_t next_scripted = 0;
    std::optional<FailureDraw> pending;
  };

  struct QueueEntry {
    std::uint32_t rank;
    std::uint64_t sequence;
    InstanceId instance;
  };
  struct QueueAfter {
    bool operator()(const QueueEntry& a, const QueueEntry& b) const noexcept {
      if (a.rank != b.rank) return a.rank > b.rank;
      return a.sequence > b.sequence;
    }
  };

  // ---- bookkeeping ----

  VirtualTime now() const noexcept { return engine_.now(); }

  void emit(TraceKind kind, int worker, InstanceId inst = no_instance, double value = 0.0) {
    TraceEvent e{now(), trace_seq_++, kind, worker, no_task, 0, false, value};
    if (inst != no_instance) {
      const auto& ti = instances_[inst];
      e.task = ti.task;
      e.attempt = ti.attempt;
      e.replay = ti.is_replay;
    }
    summarizer_.on_event(e);
    if (opts_.keep_trace) trace_.push_back(e);
  }

  void set_category(Worker& w, Category c) {
    w.profile[w.category] += now() - w.since;
    w.since = now();
    w.category = c;
  }

  InstanceId enqueue_new(TaskIndex task, bool replay, int group) {
    const auto id = static_cast<InstanceId>(instances_.size());
    TaskInstance inst;
    inst.task = task;
    inst.attempt = ++attempts_[task];
    inst.is_replay = replay;
    inst.group = group;
    inst.enqueue_time = now();
    instances_.push_back(std::move(inst));
    waiters_.emplace_back();
    push_queue(id);
    emit(replay ? TraceKind::replay_enqueue : TraceKind::enqueue, -1, id);
    if (replay) ++replay_count_;
    return id;
  }

  void push_queue(InstanceId id) {
    queue_.push(QueueEntry{graph_.rank(instances_[id].task), queue_seq_++, id});
  }

  void add_worker() {
    const auto id = static_cast<WorkerId>(workers_.size());
    workers_.push_back(std::make_unique<Worker>(this, id));
    Worker& w = *workers_.back();
    w.joined = now();
    w.since = now();
    emit(TraceKind::join, id);
    w.handle = engine_.spawn(w, "worker-" + std::to_string(id));
  }

  [[nodiscard]] bool is_current(InstanceId id) const {
    return current_[instances_[id].task] == id;
  }

  InstanceId latest(InstanceId id) const {
    while (instances_[id].superseded_by != no_instance) id = instances_[id].superseded_by;
    return id;
  }

  // The instance whose output `inst` consumes for dependency `u`.
  InstanceId producer(const TaskInstance& inst, TaskIndex u) const {
    if (inst.group >= 0) {
      const auto& members = groups_[static_cast<std::size_t>(inst.group)];
      if (auto it = members.find(u); it != members.end()) return latest(it->second);
    }
    return current_[u];
  }

  // ---- worker state machine ----

  void step(Worker& w, const Wakeup& wake) {
    if (done_) {
      engine_.terminate(w.handle);
      return;
    }
    if (wake.kind == EventKind::interrupt) {
      try_pop(w);
      return;
    }
    switch (w.phase) {
      case Phase::start:
      case Phase::idle: try_pop(w); break;
      case Phase::dep_wait: check_ready(w); break;
      case Phase::fetch: begin_log(w); break;
      case Phase::log: after_log(w); break;
      case Phase::checkpoint: after_checkpoint(w); break;
      case Phase::run: finish_run(w); break;
    }
  }

  void try_pop(Worker& w) {
    w.idle_listed = false;
    while (!queue_.empty()) {
      const QueueEntry head = queue_.top();
      queue_.pop();
      auto& inst = instances_[head.instance];
      if (inst.status != InstanceStatus::pending || inst.worker != -1) continue;
      inst.status = InstanceStatus::waiting;
      inst.worker = w.id;
      w.held = head.instance;
      emit(TraceKind::pop, w.id, head.instance);
      set_category(w, Category::waiting);
      check_ready(w);
      return;
    }
    w.phase = Phase::idle;
    w.held = no_instance;
    w.idle_listed = true;
    engine_.wait_signal(w.handle, "global queue");
  }

  void check_ready(Worker& w) {
    auto& inst = instances_[w.held];
    for (TaskIndex u : graph_.dependencies(inst.task)) {
      const InstanceId p = producer(inst, u);
      if (instances_[p].status != InstanceStatus::completed) {
        if (w.phase != Phase::dep_wait) {
          emit(TraceKind::wait_begin, w.id, w.held);
          set_category(w, Category::waiting);
          w.phase = Phase::dep_wait;
        }
        waiters_[p].push_back(w.id);
        engine_.wait_signal(w.handle, kernel_.label(u) + " attempt " +
                                          std::to_string(instances_[p].attempt));
        return;
      }
    }
    if (w.phase == Phase::dep_wait) emit(TraceKind::wait_end, w.id, w.held);
    begin_fetch(w);
  }

  void begin_fetch(Worker& w) {
    auto& inst = instances_[w.held];
    inst.status = InstanceStatus::fetching;
    inst.inputs.clear();
    int remote = 0;
    for (TaskIndex u : graph_.dependencies(inst.task)) {
      const InstanceId p = producer(inst, u);
      inst.inputs.push_back(p);
      if (instances_[p].worker != w.id) ++remote;
    }
    w.phase = Phase::fetch;
    if (remote > 0) {
      emit(TraceKind::fetch, w.id, w.held, remote);
      set_category(w, Category::communication);
      const double cost = remote * fetch_cost_;
      if (cost > 0.0) {
        engine_.schedule_timeout(w.handle, cost);
        return;
      }
    }
    begin_log(w);
  }

  void begin_log(Worker& w) {
    w.phase = Phase::log;
    if (!use_ring_) {
      begin_checkpoint(w);
      return;
    }
    emit(TraceKind::log, w.id, w.held);
    set_category(w, Category::communication);
    if (cfg_.log_cost > 0.0) {
      engine_.schedule_timeout(w.handle, cfg_.log_cost);
      return;
    }
    after_log(w);
  }

  void after_log(Worker& w) {
    const auto& inst = instances_[w.held];
    logs_.append(ring_.guard(w.id), w.id, LogRecord{w.held, inst.task, now()});
    begin_checkpoint(w);
  }

  void begin_checkpoint(Worker& w) {
    w.phase = Phase::checkpoint;
    const auto& inst = instances_[w.held];
    // Side replays work on copies and never touch checkpoint state.
    const bool send = cfg_.checkpoint_enabled && kernel_.is_entry(inst.task) &&
                      is_current(w.held) && !checkpoints_.is_recorded(inst.task);
    if (!send) {
      begin_run(w);
      return;
    }
    emit(TraceKind::checkpoint, w.id, w.held);
    ++checkpoint_sends_;
    set_category(w, Category::communication);
    if (cfg_.backup_cost > 0.0) {
      engine_.schedule_timeout(w.handle, cfg_.backup_cost);
      return;
    }
    after_checkpoint(w);
  }

  void after_checkpoint(Worker& w) {
    checkpoints_.record(ring_.guard(w.id), w.id, instances_[w.held].task, now());
    begin_run(w);
  }

  void begin_run(Worker& w) {
    auto& inst = instances_[w.held];
    inst.status = InstanceStatus::running;
    inst.start_time = now();
    emit(TraceKind::run_begin, w.id, w.held);
    set_category(w, inst.is_replay || inst.attempt > 1 ? Category::recompute
                                                        : Category::processing);
    w.phase = Phase::run;
    engine_.schedule_timeout(w.handle, cfg_.process_cost);
  }

  void finish_run(Worker& w) {
    const InstanceId id = w.held;
    auto& inst = instances_[id];
    inst.status = InstanceStatus::completed;
    inst.finish_time = now();
    emit(TraceKind::run_end, w.id, id);
    set_category(w, Category::idle);
    w.held = no_instance;
    for (WorkerId waiter : waiters_[id]) engine_.signal(workers_[static_cast<std::size_t>(waiter)]->handle);
    waiters_[id].clear();
    if (is_current(id) && ++completed_current_ == graph_.size()) {
      complete_run();
      return;
    }
    try_pop(w);
  }

  void complete_run() {
    done_ = true;
    for (auto& wp : workers_) {
      Worker& w = *wp;
      if (!w.alive) continue;
      if (w.held != no_instance && instances_[w.held].status == InstanceStatus::running) {
        emit(TraceKind::abandon, w.id, w.held);
      }
    }
    emit(TraceKind::run_complete, -1);
    for (auto& wp : workers_) {
      Worker& w = *wp;
      if (!w.alive) continue;
      set_category(w, w.category);
      w.left = now();
      engine_.terminate(w.handle);
    }
    if (injector_) engine_.terminate(injector_handle_);
  }

  // ---- failures ----

  void injector_step() {
    Injector& inj = *injector_;
    if (done_) {
      engine_.terminate(injector_handle_);
      return;
    }
    if (inj.armed) fail_now();
    inj.armed = true;
    VirtualTime at = 0.0;
    if (opts_.scripted_failures) {
      const auto& list = *opts_.scripted_failures;
      if (inj.next_scripted >= list.size()) {
        engine_.terminate(injector_handle_);
        return;
      }
      at = list[inj.next_scripted].time;
    } else {
      inj.pending = stream_->next();
      at = inj.pending->time;
    }
    engine_.schedule_timeout(injector_handle_, std::max(0.0, at - now()));
  }

  void fail_now() {
    Injector& inj = *injector_;
    WorkerId victim = -1;
    if (opts_.scripted_failures) {
      victim = (*opts_.scripted_failures)[inj.next_scripted++].victim;
      if (victim < 0 || static_cast<std::size_t>(victim) >= workers_.size() ||
          !workers_[static_cast<std::size_t>(victim)]->alive) {
        warnings_.push_back("scripted failure of worker " + std::to_string(victim) +
                            " at " + std::to_string(now()) + " skipped: not alive");
        return;
      }
    } else {
      std::vector<WorkerId> live;
      for (const auto& w : workers_) {
        if (w->alive) live.push_back(w->id);
      }
      victim = pick_victim(live, inj.pending->victim_draw);
    }
    // Recovery runs to completion inside this call, so a second failure can
    // only be handled after it; that is the single-failure-at-a-time rule.
    on_failure(victim);
  }

  void on_failure(WorkerId victim_id) {
    Worker& victim = *workers_[static_cast<std::size_t>(victim_id)];
    const auto replacement_id = static_cast<WorkerId>(workers_.size());
    emit(TraceKind::failure, victim_id, no_instance, replacement_id);
    failures_.push_back(FailureRecord{now(), victim_id, replacement_id});

    InstanceId in_flight = no_instance;
    if (victim.held != no_instance) {
      if (instances_[victim.held].status == InstanceStatus::running) {
        in_flight = victim.held;
        emit(TraceKind::abandon, victim_id, in_flight);
      } else {
        release(victim);
      }
    }
    set_category(victim, victim.category);
    victim.alive = false;
    victim.left = now();
    victim.held = no_instance;
    emit(TraceKind::leave, victim_id);
    engine_.terminate(victim.handle);

    const WorkerId old_guard = ring_.guard(victim_id);
    add_worker();
    ring_.splice(victim_id, replacement_id);
    ring_ok_ = ring_ok_ && ring_.consistent() && !ring_.contains(victim_id);
    logs_.transfer_guard(victim_id, replacement_id);
    checkpoints_.transfer_guard(victim_id, replacement_id);

    const int secured = cfg_.checkpoint_enabled ? checkpoints_.secured_band() : 0;
    emit(TraceKind::recovery_begin, -1, no_instance, secured);

    // Every held instance that has not started goes back to the queue so no
    // worker sits on a task whose inputs are about to be recomputed.
    for (auto& wp : workers_) {
      Worker& w = *wp;
      if (!w.alive || w.held == no_instance) continue;
      if (instances_[w.held].status != InstanceStatus::running) {
        release(w);
        engine_.interrupt(w.handle, "recovery");
      }
    }
    for (auto& list : waiters_) list.clear();

    const std::uint64_t cancelled_before = cancelled_count_;
    const std::uint64_t replays_before = replay_count_;
    RecoveryPlan plan;
    plan.strategy = cfg_.recovery;
    plan.secured_band = secured;
    if (cfg_.recovery == RecoveryStrategy::default_rollback) {
      default_rollback(plan, victim_id, in_flight);
    } else {
      dependency_rollback(plan, victim_id, old_guard, in_flight);
    }
    recoveries_.push_back(RecoveryStats{now(), victim_id, secured, plan.l1.size(),
                                        plan.l2.size(), plan.l3.size(),
                                        cancelled_count_ - cancelled_before,
                                        replay_count_ - replays_before});
    if (opts_.keep_plans) plans_.push_back(std::move(plan));

    for (auto& wp : workers_) {
      Worker& w = *wp;
      if (w.alive && w.idle_listed) engine_.signal(w.handle);
    }
    emit(TraceKind::recovery_end, -1);
  }

  // Hands a held, not yet running instance back to the queue.
  void release(Worker& w) {
    auto& inst = instances_[w.held];
    inst.status = InstanceStatus::pending;
    inst.worker = -1;
    inst.inputs.clear();
    emit(TraceKind::release, w.id, w.held);
    set_category(w, Category::idle);
    push_queue(w.held);
    w.held = no_instance;
    w.phase = Phase::idle;
  }

  // Stops a survivor that is running an instance being cancelled.
  void abandon_running(InstanceId id) {
    auto& inst = instances_[id];
    Worker& w = *workers_[static_cast<std::size_t>(inst.worker)];
    if (!w.alive || w.held != id) return;
    emit(TraceKind::abandon, w.id, id);
    set_category(w, Category::idle);
    w.held = no_instance;
    w.phase = Phase::idle;
    engine_.interrupt(w.handle, "recovery");
  }

  // Retires `old` (cancelling it if it had started) in favour of `fresh`.
  void supersede(InstanceId old, InstanceId fresh) {
    auto& inst = instances_[old];
    if (inst.started()) {
      emit(TraceKind::cancel, -1, old);
      ++cancelled_count_;
      if (inst.status == InstanceStatus::running) abandon_running(old);
    }
    if (inst.status == InstanceStatus::completed && is_current(old)) --completed_current_;
    inst.status = InstanceStatus::cancelled;
    inst.superseded_by = fresh;
  }

  void default_rollback(RecoveryPlan& plan, WorkerId victim, InstanceId in_flight) {
    (void)victim;
    const int secured = plan.secured_band;
    std::vector<TaskIndex> redo;
    for (TaskIndex v : graph_.schedule()) {
      const InstanceId c = current_[v];
      const auto& inst = instances_[c];
      if (!inst.started() || inst.status == InstanceStatus::cancelled) continue;
      if (kernel_.band_of(v) > secured || c == in_flight) redo.push_back(v);
    }
    for (TaskIndex v : redo) {
      const InstanceId old = current_[v];
      const InstanceId fresh = enqueue_new(v, false, -1);
      supersede(old, fresh);
      current_[v] = fresh;
    }
    if (cfg_.checkpoint_enabled) checkpoints_.rollback_to(secured);
  }

  void dependency_rollback(RecoveryPlan& plan, WorkerId victim, WorkerId old_guard,
                           InstanceId in_flight) {
    const int secured = plan.secured_band;
    for (const LogRecord& rec : logs_.logs(old_guard, victim)) {
      const auto& inst = instances_[rec.instance];
      if (!is_current(rec.instance) || !inst.started() || inst.worker != victim) continue;
      if (rec.instance == in_flight || kernel_.band_of(rec.task) > secured) {
        plan.l1.push_back(rec.task);
      }
    }
    plan.l1 = recovery_detail::sorted_unique(std::move(plan.l1));
    plan.l2 = compute_l2(kernel_, plan.l1, cfg_.checkpoint_enabled);
    plan.l3 = compute_l3(graph_, plan.l1, plan.l2);

    // Earlier replays lost with the victim: running there, or completed there
    // while a not yet started member of their group still needs the output.
    reissue_lost_replays(victim);

    if (plan.l3.empty()) return;
    const int group = static_cast<int>(groups_.size());
    groups_.emplace_back();
    std::vector<TaskIndex> order = plan.l3;
    std::sort(order.begin(), order.end(),
              [this](TaskIndex a, TaskIndex b) { return graph_.rank(a) < graph_.rank(b); });
    for (TaskIndex t3 : order) {
      const InstanceId c = current_[t3];
      const bool in_l1 = std::binary_search(plan.l1.begin(), plan.l1.end(), t3);
      const InstanceId fresh = enqueue_new(t3, true, group);
      groups_.back()[t3] = fresh;
      if (in_l1 || instances_[c].status != InstanceStatus::completed) {
        supersede(c, fresh);
        current_[t3] = fresh;
      }
    }
  }

  void reissue_lost_replays(WorkerId victim) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t g = 0; g < groups_.size(); ++g) {
        std::vector<InstanceId> lost;
        for (const auto& [task, first] : groups_[g]) {
          const InstanceId r = latest(first);
          const auto& inst = instances_[r];
          if (is_current(r) || inst.worker != victim) continue;
          if (inst.status == InstanceStatus::running) {
            lost.push_back(r);
            continue;
          }
          if (inst.status != InstanceStatus::completed) continue;
          for (TaskIndex s : graph_.successors(task)) {
            auto it = groups_[g].find(s);
            if (it == groups_[g].end()) continue;
            if (!instances_[latest(it->second)].started()) {
              lost.push_back(r);
              break;
            }
          }
        }
        for (InstanceId r : lost) {
          const TaskIndex task = instances_[r].task;
          const InstanceId fresh = enqueue_new(task, true, static_cast<int>(g));
          supersede(r, fresh);
          groups_[g][task] = fresh;
          changed = true;
        }
      }
    }
  }

  // ---- results ----

  SimResult collect() {
    SimResult res;
    RunSummary& s = res.summary;
    s.makespan = now();
    for (const auto& wp : workers_) {
      s.profile += wp->profile;
      res.worker_profiles[wp->id] = wp->profile;
      res.lifetimes[wp->id] = {wp->joined, wp->left};
      s.worker_tasks[wp->id] = 0;
    }
    for (const auto& inst : instances_) {
      if (inst.finish_time >= 0.0) ++s.worker_tasks[inst.worker];
    }
    s.aggregated_processing = s.profile[Category::processing] + s.profile[Category::recompute];
    s.cancelled_count = cancelled_count_;
    s.replay_count = replay_count_;
    s.checkpoint_sends = checkpoint_sends_;
    s.failures = failures_;
    s.tc_triangles = kernel_.region_count();
    s.recoveries = recoveries_;
    s.seed = cfg_.seed;
    s.config = cfg_.echo;

    cross_check(s, summarizer_.finish());

    res.trace = std::move(trace_);
    res.plans = std::move(plans_);
    res.instances = std::move(instances_);
    res.current = std::move(current_);
    res.max_checkpoint_generations = checkpoints_.max_generations();
    res.ring_consistent = ring_ok_;
    res.warnings = warnings_;
    for (const auto& w : engine_.warnings()) res.warnings.push_back(w);
    return res;
  }

  static void cross_check(const RunSummary& sim, const RunSummary& trace) {
    std::vector<std::string> bad;
    if (sim.makespan != trace.makespan) bad.push_back("makespan");
    if (sim.cancelled_count != trace.cancelled_count) bad.push_back("cancelled_count");
    if (sim.replay_count != trace.replay_count) bad.push_back("replay_count");
    if (sim.checkpoint_sends != trace.checkpoint_sends) bad.push_back("checkpoint_sends");
    if (sim.worker_tasks != trace.worker_tasks) bad.push_back("worker_tasks");
    if (sim.failures != trace.failures) bad.push_back("failures");
    const double tol = 1e-9 * std::max(1.0, sim.profile.total());
    for (std::size_t i = 0; i < category_count; ++i) {
      if (std::abs(sim.profile.seconds[i] - trace.profile.seconds[i]) > tol) {
        bad.push_back(std::string("profile.") + to_string(static_cast<Category>(i)));
      }
    }
    if (!bad.empty()) {
      std::string msg = "simulator accounting disagrees with its trace:";
      for (const auto& b : bad) msg += " " + b;
      throw IntegrityError(msg);
    }
  }

  SimConfig cfg_;
  SimOptions opts_;
  StencilKernel kernel_;
  const TaskGraph& graph_;
  Engine engine_;
  bool use_ring_ = true;
  double fetch_cost_ = 0.0;
  RingAssignment ring_;
  TaskLogStore logs_;
  CheckpointStore checkpoints_;

  std::vector<TaskInstance> instances_;
  std::vector<InstanceId> current_;
  std::vector<int> attempts_;
  std::vector<std::vector<WorkerId>> waiters_;
  std::vector<std::unordered_map<TaskIndex, InstanceId>> groups_;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, QueueAfter> queue_;
  std::uint64_t queue_seq_ = 0;
  std::size_t completed_current_ = 0;
  bool done_ = false;

  std::vector<std::unique_ptr<Worker>> workers_;
  std::unique_ptr<Injector> injector_;
  ProcessHandle injector_handle_;
  std::optional<FailureStream> stream_;

  std::uint64_t cancelled_count_ = 0;
  std::uint64_t replay_count_ = 0;
  std::uint64_t checkpoint_sends_ = 0;  // started, including ones cut short by a failure
  std::vector<FailureRecord> failures_;
  std::vector<RecoveryStats> recoveries_;
  std::vector<RecoveryPlan> plans_;
  bool ring_ok_ = true;
  std::vector<std::string> warnings_;

  Summarizer summarizer_;
  std::vector<TraceEvent> trace_;
  std::uint64_t trace_seq_ = 0;
};

inline SimResult run_simulation(const SimConfig& cfg, SimOptions opts = {}) {
  Simulator sim(cfg, std::move(opts));
  return sim.run();
}

// Completed attempts per worker.
inline std::map<int, std::uint64_t> fairness_report(const RunSummary& summary) {
  return summary.worker_tasks;
}

/// Post-run invariants: every task has a current completed attempt, each
/// completed attempt consumed completed instances of exactly its
/// dependencies, and each worker's category time adds up to its lifetime.
/// Returns the violations found (empty when the run is sound).
inline std::vector<std::string> check_run(const SimResult& r, const TaskGraph& g) {
  std::vector<std::string> bad;
  for (TaskIndex v = 0; v < r.current.size(); ++v) {
    const auto& inst = r.instances[r.current[v]];
    if (inst.status != InstanceStatus::completed) {
      bad.push_back("task " + std::to_string(v) + " has no current completed attempt");
    }
  }
  for (std::size_t id = 0; id < r.instances.size(); ++id) {
    const auto& inst = r.instances[id];
    if (inst.finish_time < 0.0) continue;
    const auto deps = g.dependencies(inst.task);
    if (inst.inputs.size() != deps.size()) {
      bad.push_back("instance " + std::to_string(id) + " consumed the wrong number of inputs");
      continue;
    }
    for (std::size_t k = 0; k < deps.size(); ++k) {
      const auto& in = r.instances[inst.inputs[k]];
      if (in.task != deps[k] || in.finish_time < 0.0 || in.finish_time > inst.start_time) {
        bad.push_back("instance " + std::to_string(id) + " started before input " +
                      std::to_string(deps[k]) + " completed");
      }
    }
  }
  for (const auto& [w, life] : r.lifetimes) {
    const double span = life.second - life.first;
    const double sum = r.worker_profiles.at(w).total();
    if (std::abs(span - sum) > 1e-6 * std::max(1.0, span)) {
      bad.push_back("worker " + std::to_string(w) + " accounting does not close");
    }
  }
  return bad;
}

}  // namespace rollsim
