#pragma once

#include <vector>

#include "robusched/machine_queue.hpp"

namespace robusched {

// Oversubscription tracker and pruning thresholds.
//
// `level` is an exponentially weighted moving average of the number of tasks
// that missed their deadline between mapping events. Dropping engages when
// the level reaches `trigger_on` and disengages once it falls to
// `trigger_off`; in between the previous state holds.
struct PrunerState {
  double lambda = 0.9;
  double level = 0.0;
  double trigger_on = 1.0;
  double trigger_off = 0.8;
  bool dropping_engaged = false;
  double base_drop_threshold = 0.50;
  double defer_threshold = 0.90;
  double rho = 0.1;

  void validate() const;
};

PrunerState update_oversubscription(PrunerState s, int missed);

// Dropping threshold for a task at queue position `queue_pos` (0 = executing
// head) whose completion PMF has bounded skewness `skew`. Positive skew lowers
// the threshold, and the adjustment fades with distance from the head.
double adjusted_drop_threshold(const PrunerState& s, double skew, int queue_pos);

// Defer only on strict inequality.
inline bool should_defer(double robustness_best, double effective_defer_threshold) {
  return robustness_best < effective_defer_threshold;
}

struct DropRecord {
  TaskId id = 0;
  int machine = 0;
  int queue_pos = 0;
  double robustness = 0.0;
  double threshold = 0.0;
  bool was_executing = false;
};

// Walks every queue from head to tail and removes tasks whose robustness is
// at or below their adjusted dropping threshold. Pcts behind a dropped task
// are recomputed before they are judged. Queues are edited in place; a queue
// that loses its executing head has exec_start cleared.
std::vector<DropRecord> drop_pass(std::vector<MachineQueue>& machines, const PetMatrix& pet,
                                  const PrunerState& s, Time now,
                                  DropScenario scenario = DropScenario::evict);

}  // namespace robusched
