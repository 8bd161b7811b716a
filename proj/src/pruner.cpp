#include "robusched/pruner.hpp"

#include <algorithm>

namespace robusched {

void PrunerState::validate() const {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in (0, 1]");
  if (!(trigger_off < trigger_on)) throw ConfigError("trigger_off must be below trigger_on");
  if (!(0.0 <= base_drop_threshold && base_drop_threshold <= defer_threshold &&
        defer_threshold <= 1.0))
    throw ConfigError("thresholds must satisfy 0 <= drop <= defer <= 1");
  if (rho < 0.0) throw ConfigError("rho must be non-negative");
  if (level < 0.0) throw ConfigError("oversubscription level must be non-negative");
}

PrunerState update_oversubscription(PrunerState s, int missed) {
  s.level = missed * s.lambda + s.level * (1.0 - s.lambda);
  if (s.level >= s.trigger_on)
    s.dropping_engaged = true;
  else if (s.level <= s.trigger_off)
    s.dropping_engaged = false;
  return s;
}

double adjusted_drop_threshold(const PrunerState& s, double skew, int queue_pos) {
  const double adjust = (-skew * s.rho) / (queue_pos + 1);
  return std::clamp(s.base_drop_threshold + adjust, 0.0, 1.0);
}

std::vector<DropRecord> drop_pass(std::vector<MachineQueue>& machines, const PetMatrix& pet,
                                  const PrunerState& s, Time now, DropScenario scenario) {
  std::vector<DropRecord> dropped;
  for (auto& q : machines) {
    std::vector<QueuedTask> kept;
    kept.reserve(q.tasks.size());
    Pct prev = idle_pct(now);
    bool head_running = q.exec_start.has_value();
    for (std::size_t i = 0; i < q.tasks.size(); ++i) {
      const QueuedTask& t = q.tasks[i];
      const Pmf& exec = pet.entry(t.task_type, q.machine);
      const bool executing = i == 0 && head_running;
      Pct pct = executing ? executing_pct(scenario, exec, *q.exec_start, now, t.deadline)
                          : convolve(scenario, prev, exec, t.deadline);
      const int pos = static_cast<int>(kept.size());
      const double rob = robustness(pct, t.deadline);
      const double thr = adjusted_drop_threshold(s, skewness(pct.release_view()), pos);
      if (rob <= thr) {
        dropped.push_back({t.id, q.machine, pos, rob, thr, executing});
        if (executing) head_running = false;
        continue;
      }
      kept.push_back(t);
      prev = std::move(pct);
    }
    q.tasks = std::move(kept);
    if (!head_running) q.exec_start.reset();
  }
  return dropped;
}

}  // namespace robusched
