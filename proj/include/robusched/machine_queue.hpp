#pragma once

#include <optional>
#include <vector>

#include "robusched/pet.hpp"
#include "robusched/workload.hpp"

namespace robusched {

struct QueuedTask {
  TaskId id = 0;
  int task_type = 0;
  Time deadline = 0;

  friend bool operator==(const QueuedTask&, const QueuedTask&) = default;
};

// Snapshot of one FCFS machine queue. When `exec_start` is set, tasks[0] is
// executing and started at that time; otherwise every task is pending.
struct MachineQueue {
  int machine = 0;
  std::optional<Time> exec_start;
  std::vector<QueuedTask> tasks;
};

// Pct of every task in the queue, head first, folded with `scenario`.
std::vector<Pct> queue_pcts(const MachineQueue& q, const PetMatrix& pet, DropScenario scenario,
                            Time now);

// Pct of the last task in the queue (idle_pct(now) for an empty queue).
Pct queue_tail(const MachineQueue& q, const PetMatrix& pet, DropScenario scenario, Time now);

}  // namespace robusched
