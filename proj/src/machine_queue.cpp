#include "robusched/machine_queue.hpp"

namespace robusched {

std::vector<Pct> queue_pcts(const MachineQueue& q, const PetMatrix& pet, DropScenario scenario,
                            Time now) {
  std::vector<Pct> out;
  out.reserve(q.tasks.size());
  Pct prev = idle_pct(now);
  for (std::size_t i = 0; i < q.tasks.size(); ++i) {
    const QueuedTask& t = q.tasks[i];
    const Pmf& exec = pet.entry(t.task_type, q.machine);
    if (i == 0 && q.exec_start)
      out.push_back(executing_pct(scenario, exec, *q.exec_start, now, t.deadline));
    else
      out.push_back(convolve(scenario, prev, exec, t.deadline));
    prev = out.back();
  }
  return out;
}

Pct queue_tail(const MachineQueue& q, const PetMatrix& pet, DropScenario scenario, Time now) {
  auto pcts = queue_pcts(q, pet, scenario, now);
  return pcts.empty() ? idle_pct(now) : std::move(pcts.back());
}

}  // namespace robusched
