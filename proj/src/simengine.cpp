#include "robusched/simengine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace robusched {

const std::vector<double>& default_price_rates() {
  // $/hour: general purpose, compute, memory and accelerated flavours.
  static const std::vector<double> rates{0.096, 0.085, 0.17, 0.192, 0.252, 0.34, 0.526, 0.90};
  return rates;
}

double SimConfig::price_rate(int machine) const {
  const auto& r = price_rates.empty() ? default_price_rates() : price_rates;
  return r[static_cast<std::size_t>(machine) % r.size()];
}

void SimConfig::validate() const {
  if (queue_capacity < 1) throw ConfigError("queue_capacity must be at least 1");
  if (trim_count < 0) throw ConfigError("trim_count must be non-negative");
  if (fairness_factor < 0.0 || fairness_factor > 1.0) throw ConfigError("fairness_factor must lie in [0, 1]");
  if (moc_cull_threshold < 0.0 || moc_cull_threshold > 1.0)
    throw ConfigError("moc_cull_threshold must lie in [0, 1]");
  for (double r : price_rates)
    if (r < 0.0) throw ConfigError("price rates must be non-negative");
  pruner.validate();
}

bool operator==(const TrialMetrics& a, const TrialMetrics& b) {
  const auto same = [](double x, double y) { return x == y || (std::isnan(x) && std::isnan(y)); };
  if (a.counted_ontime != b.counted_ontime || a.counted_total != b.counted_total) return false;
  if (a.per_type_ontime_pct.size() != b.per_type_ontime_pct.size()) return false;
  for (std::size_t i = 0; i < a.per_type_ontime_pct.size(); ++i)
    if (!same(a.per_type_ontime_pct[i], b.per_type_ontime_pct[i])) return false;
  return a.machine_busy == b.machine_busy && same(a.variance_per_type, b.variance_per_type) &&
         same(a.total_cost, b.total_cost) && same(a.robustness_pct, b.robustness_pct) &&
         same(a.cost_per_robustness, b.cost_per_robustness);
}

namespace {

constexpr Time kNever = std::numeric_limits<Time>::max();

void check_trim(const SimConfig& cfg, std::size_t n) {
  const auto trim = static_cast<std::size_t>(cfg.trim_count);
  if (!(2 * trim < n || (n == 0 && trim == 0)))
    throw ConfigError("trim_count " + std::to_string(cfg.trim_count) + " leaves no counted tasks out of " +
                      std::to_string(n));
}

// `ontime[i]` refers to trace position i.
TrialMetrics finalize_metrics(const std::vector<char>& ontime, std::vector<double> busy,
                              const std::vector<Task>& trace, const SimConfig& cfg,
                              int task_type_count) {
  TrialMetrics m;
  const auto trim = static_cast<std::size_t>(cfg.trim_count);
  std::vector<int> type_total(static_cast<std::size_t>(task_type_count), 0);
  std::vector<int> type_ontime(static_cast<std::size_t>(task_type_count), 0);
  for (std::size_t i = trim; i + trim < trace.size(); ++i) {
    const auto type = static_cast<std::size_t>(trace[i].task_type);
    ++m.counted_total;
    ++type_total.at(type);
    if (ontime[i]) {
      ++m.counted_ontime;
      ++type_ontime[type];
    }
  }
  m.robustness_pct = m.counted_total > 0 ? 100.0 * m.counted_ontime / m.counted_total : 0.0;

  double sum = 0.0;
  int types_seen = 0;
  m.per_type_ontime_pct.assign(type_total.size(), std::numeric_limits<double>::quiet_NaN());
  for (std::size_t f = 0; f < type_total.size(); ++f) {
    if (type_total[f] == 0) continue;
    m.per_type_ontime_pct[f] = 100.0 * type_ontime[f] / type_total[f];
    sum += m.per_type_ontime_pct[f];
    ++types_seen;
  }
  if (types_seen > 0) {
    const double mean = sum / types_seen;
    double ss = 0.0;
    for (double p : m.per_type_ontime_pct)
      if (!std::isnan(p)) ss += (p - mean) * (p - mean);
    m.variance_per_type = ss / types_seen;
  }

  for (std::size_t j = 0; j < busy.size(); ++j) m.total_cost += cfg.price_rate(static_cast<int>(j)) * busy[j];
  m.machine_busy = std::move(busy);
  m.cost_per_robustness = m.robustness_pct > 0.0 ? m.total_cost / m.robustness_pct
                                                  : std::numeric_limits<double>::infinity();
  return m;
}

class Engine {
 public:
  Engine(const SimConfig& cfg, const PetMatrix& pet, const std::vector<Task>& trace)
      : cfg_(cfg),
        pet_(pet),
        tasks_(trace),
        machines_(static_cast<std::size_t>(pet.machine_count())),
        rng_(cfg.seed),
        pruner_(cfg.pruner),
        sufferage_(pet.task_type_count(), cfg.fairness_factor),
        announced_defer_(trace.size(), 0) {
    cfg_.validate();
    check_trim(cfg_, tasks_.size());
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      Task& t = tasks_[i];
      if (i > 0 && (t.arrival < tasks_[i - 1].arrival ||
                    (t.arrival == tasks_[i - 1].arrival && t.id <= tasks_[i - 1].id)))
        throw TrialAborted("trace is not sorted by (arrival, id) at position " + std::to_string(i));
      if (t.task_type < 0 || t.task_type >= pet.task_type_count())
        throw TrialAborted("task " + std::to_string(t.id) + " has a task type outside the PET");
      if (t.deadline <= t.arrival) throw TrialAborted("task " + std::to_string(t.id) + " has deadline <= arrival");
      t.state = TaskState::unmapped;
    }
  }

  TrialResult run() {
    std::size_t next_arrival = 0;
    while (true) {
      Time t = next_arrival < tasks_.size() ? tasks_[next_arrival].arrival : kNever;
      for (const auto& m : machines_) {
        if (!m.exec_start) continue;
        t = std::min(t, m.exec_end);
        if (cfg_.scenario == DropScenario::evict) t = std::min(t, tasks_[m.queue.front()].deadline);
      }
      if (t == kNever) {
        if (batch_.empty()) break;
        // Only held-back tasks remain: wake at the earliest batch deadline.
        for (std::size_t i : batch_) t = std::min(t, tasks_[i].deadline);
      }
      if (t < now_) throw TrialAborted("event time moved backwards");
      now_ = t;

      for (std::size_t j = 0; j < machines_.size(); ++j) {
        Machine& m = machines_[j];
        if (m.exec_start && m.exec_end <= now_) {
          const std::size_t i = m.queue.front();
          finish(i, j, tasks_[i].deadline >= m.exec_end ? EventKind::completed_ontime : EventKind::completed_late);
        }
      }
      if (cfg_.scenario == DropScenario::evict) {
        for (std::size_t j = 0; j < machines_.size(); ++j) {
          Machine& m = machines_[j];
          if (m.exec_start && tasks_[m.queue.front()].deadline <= now_) finish(m.queue.front(), j, EventKind::evicted);
        }
      }
      while (next_arrival < tasks_.size() && tasks_[next_arrival].arrival == now_) {
        batch_.push_back(next_arrival);
        log(EventKind::arrival, next_arrival, -1, 0);
        ++next_arrival;
      }
      mapping_event();
    }

    for (const auto& task : tasks_)
      if (!is_terminal(task.state))
        throw TrialAborted("task " + std::to_string(task.id) + " ended in state " + to_token(task.state));

    TrialResult r;
    std::vector<char> ontime(tasks_.size(), 0);
    for (std::size_t i = 0; i < tasks_.size(); ++i) ontime[i] = tasks_[i].state == TaskState::completed_ontime;
    std::vector<double> busy;
    for (const auto& m : machines_) busy.push_back(static_cast<double>(m.busy));
    r.metrics = finalize_metrics(ontime, std::move(busy), tasks_, cfg_, pet_.task_type_count());
    r.log = std::move(log_);
    r.final_tasks = std::move(tasks_);
    r.mapping_events = mapping_events_;
    return r;
  }

 private:
  struct Machine {
    std::vector<std::size_t> queue;  // trace positions; front executes when exec_start is set
    std::optional<Time> exec_start;
    Time exec_end = 0;
    Time busy = 0;
  };

  void log(EventKind k, std::size_t task, int machine, std::int64_t detail) {
    log_.push_back({now_, k, tasks_[task].id, machine, detail});
  }

  // Terminal transition for task i; j is its machine or SIZE_MAX.
  void finish(std::size_t i, std::size_t j, EventKind kind) {
    Task& t = tasks_[i];
    const int machine = j == SIZE_MAX ? -1 : static_cast<int>(j);
    std::int64_t detail = 0;
    if (j != SIZE_MAX) {
      Machine& m = machines_[j];
      const auto pos = std::find(m.queue.begin(), m.queue.end(), i);
      if (pos == m.queue.end()) throw TrialAborted("task not found on its machine");
      if (pos == m.queue.begin() && m.exec_start) {
        const Time end = kind == EventKind::completed_ontime || kind == EventKind::completed_late ? m.exec_end : now_;
        m.busy += end - *m.exec_start;
        m.exec_start.reset();
        detail = kind == EventKind::dropped_pruned ? 1 : 0;
      }
      m.queue.erase(pos);
    } else {
      batch_.erase(std::remove(batch_.begin(), batch_.end(), i), batch_.end());
    }
    switch (kind) {
      case EventKind::completed_ontime: t.state = TaskState::completed_ontime; break;
      case EventKind::completed_late: t.state = TaskState::completed_late; ++missed_; break;
      case EventKind::dropped_deadline:
      case EventKind::evicted: t.state = TaskState::dropped; ++missed_; break;
      case EventKind::dropped_pruned: t.state = TaskState::dropped; break;
      default: throw TrialAborted("non-terminal event used as a terminal transition");
    }
    sufferage_ = update_sufferage(std::move(sufferage_), t.task_type, kind == EventKind::completed_ontime);
    log(kind, i, machine, detail);
  }

  MachineQueue snapshot(std::size_t j) const {
    MachineQueue q;
    q.machine = static_cast<int>(j);
    q.exec_start = machines_[j].exec_start;
    for (std::size_t i : machines_[j].queue)
      q.tasks.push_back({tasks_[i].id, tasks_[i].task_type, tasks_[i].deadline});
    return q;
  }

  std::size_t position_of(TaskId id) const {
    // Trace positions are ordered by id within equal arrivals but ids need not
    // be dense, so look up through a lazily built index.
    if (index_.empty())
      for (std::size_t i = 0; i < tasks_.size(); ++i) index_.emplace(tasks_[i].id, i);
    return index_.at(id);
  }

  void mapping_event() {
    ++mapping_events_;
    // (1) deadline-passed removal
    for (std::size_t k = 0; k < batch_.size();) {
      const std::size_t i = batch_[k];
      if (tasks_[i].deadline <= now_) {
        finish(i, SIZE_MAX, EventKind::dropped_deadline);
      } else {
        ++k;
      }
    }
    if (cfg_.scenario != DropScenario::no_drop) {
      for (std::size_t j = 0; j < machines_.size(); ++j) {
        Machine& m = machines_[j];
        for (std::size_t k = m.exec_start ? 1 : 0; k < m.queue.size();) {
          if (tasks_[m.queue[k]].deadline <= now_)
            finish(m.queue[k], j, EventKind::dropped_deadline);
          else
            ++k;
        }
      }
    }

    // (2) oversubscription estimate
    pruner_ = update_oversubscription(pruner_, missed_);
    missed_ = 0;

    // (3) probabilistic dropping
    if (cfg_.dropping_enabled() && pruner_.dropping_engaged) {
      std::vector<MachineQueue> queues;
      for (std::size_t j = 0; j < machines_.size(); ++j) queues.push_back(snapshot(j));
      for (const auto& d : drop_pass(queues, pet_, pruner_, now_, cfg_.scenario))
        finish(position_of(d.id), static_cast<std::size_t>(d.machine), EventKind::dropped_pruned);
    }

    // (4) batch mapping
    if (!batch_.empty()) {
      std::vector<MachineQueue> queues;
      bool room = false;
      for (std::size_t j = 0; j < machines_.size(); ++j) {
        queues.push_back(snapshot(j));
        room = room || static_cast<int>(machines_[j].queue.size()) < cfg_.queue_capacity;
      }
      if (room) {
        VirtualQueues vq(queues, cfg_.queue_capacity, pet_, cfg_.scenario, now_);
        std::vector<Task> batch;
        batch.reserve(batch_.size());
        for (std::size_t i : batch_) batch.push_back(tasks_[i]);
        MappingOptions opts;
        opts.moc_cull_threshold = cfg_.moc_cull_threshold;
        const MappingResult res = map_batch(cfg_.heuristic, batch, vq, pet_, pruner_, sufferage_, opts);
        for (const auto& a : res.assignments) {
          const std::size_t i = position_of(a.task);
          Machine& m = machines_[static_cast<std::size_t>(a.machine)];
          m.queue.push_back(i);
          tasks_[i].state = TaskState::queued;
          log(EventKind::mapped, i, a.machine, static_cast<std::int64_t>(m.queue.size() - 1));
          batch_.erase(std::find(batch_.begin(), batch_.end(), i));
        }
        for (const auto& lists : {&res.deferred, &res.culled}) {
          for (TaskId id : *lists) {
            const std::size_t i = position_of(id);
            tasks_[i].state = TaskState::deferred;
            if (!announced_defer_[i]) {
              announced_defer_[i] = 1;
              log(EventKind::deferred, i, -1, 0);
            }
          }
        }
      }
    }

    // (5) start idle machines
    for (std::size_t j = 0; j < machines_.size(); ++j) {
      Machine& m = machines_[j];
      if (m.exec_start || m.queue.empty()) continue;
      const std::size_t i = m.queue.front();
      const Task& t = tasks_[i];
      const Time run = cfg_.sample_from_gamma
                           ? sample_execution_gamma(pet_, t.task_type, static_cast<int>(j), rng_)
                           : sample_execution(pet_, t.task_type, static_cast<int>(j), rng_);
      m.exec_start = now_;
      m.exec_end = now_ + std::max<Time>(run, 0);
      tasks_[i].state = TaskState::executing;
      log(EventKind::started, i, static_cast<int>(j), m.exec_end - now_);
    }
  }

  SimConfig cfg_;
  const PetMatrix& pet_;
  std::vector<Task> tasks_;
  std::vector<Machine> machines_;
  std::vector<std::size_t> batch_;  // trace positions in arrival order
  Rng rng_;
  PrunerState pruner_;
  SufferageTable sufferage_;
  std::vector<char> announced_defer_;
  mutable std::unordered_map<TaskId, std::size_t> index_;
  EventLog log_;
  Time now_ = 0;
  int missed_ = 0;
  std::int64_t mapping_events_ = 0;
};

}  // namespace

TrialResult run_trial(const SimConfig& cfg, const PetMatrix& pet, const std::vector<Task>& trace) {
  return Engine(cfg, pet, trace).run();
}

TrialMetrics compute_metrics(const EventLog& log, const std::vector<Task>& trace,
                             const SimConfig& cfg, int machine_count, int task_type_count) {
  check_trim(cfg, trace.size());
  std::unordered_map<TaskId, std::size_t> pos;
  for (std::size_t i = 0; i < trace.size(); ++i) pos.emplace(trace[i].id, i);
  std::vector<char> ontime(trace.size(), 0);
  std::vector<char> terminal(trace.size(), 0);
  std::unordered_map<TaskId, std::pair<Time, int>> running;
  std::vector<double> busy(static_cast<std::size_t>(machine_count), 0.0);
  for (const auto& e : log) {
    switch (e.kind) {
      case EventKind::started: running[e.task] = {e.time, e.machine}; break;
      case EventKind::completed_ontime:
      case EventKind::completed_late:
      case EventKind::dropped_deadline:
      case EventKind::evicted:
      case EventKind::dropped_pruned: {
        const std::size_t i = pos.at(e.task);
        if (terminal[i]) throw ParseError("task " + std::to_string(e.task) + " terminated twice in the log");
        terminal[i] = 1;
        ontime[i] = e.kind == EventKind::completed_ontime;
        if (auto it = running.find(e.task); it != running.end()) {
          busy.at(static_cast<std::size_t>(it->second.second)) += static_cast<double>(e.time - it->second.first);
          running.erase(it);
        }
        break;
      }
      default: break;
    }
  }
  return finalize_metrics(ontime, std::move(busy), trace, cfg, task_type_count);
}

}  // namespace robusched
