#pragma once

#include <span>
#include <string>
#include <vector>

#include "robusched/machine_queue.hpp"
#include "robusched/pruner.hpp"

namespace robusched {

enum class Heuristic { mm, msd, mmu, moc, pam, pamf };

const char* to_token(Heuristic h);
Heuristic parse_heuristic(const std::string& token);
// PAM and PAMF prune; the baselines never drop probabilistically.
bool uses_pruning(Heuristic h);

inline constexpr double kMocCullThreshold = 0.30;

// Provisional copies of the machine queues used while a batch is mapped.
class VirtualQueues {
 public:
  VirtualQueues(const std::vector<MachineQueue>& machines, int queue_capacity,
                const PetMatrix& pet, DropScenario scenario, Time now);

  int machine_count() const { return static_cast<int>(slots_.size()); }
  int length(int m) const { return slots_[static_cast<std::size_t>(m)].length; }
  int capacity() const { return capacity_; }
  int free_slots(int m) const { return capacity_ - length(m); }
  bool any_free() const;
  const Pct& tail(int m) const { return slots_[static_cast<std::size_t>(m)].tail; }
  const Pmf& tail_release(int m) const { return slots_[static_cast<std::size_t>(m)].release; }
  double tail_release_mean(int m) const { return slots_[static_cast<std::size_t>(m)].release_mean; }
  DropScenario scenario() const { return scenario_; }

  // Convolves the task onto machine m's tail.
  void append(int m, const Task& task, const PetMatrix& pet);

  // Robustness of appending `task` to machine m, without committing.
  double candidate_robustness(int m, const Task& task, const PetMatrix& pet) const;
  // Expected completion time of `task` on machine m with no dropping of the
  // task itself: E[tail release] + E[execution].
  double candidate_completion(int m, const Task& task, const PetMatrix& pet) const;

 private:
  struct Slot {
    int length = 0;
    Pct tail;
    Pmf release;
    double release_mean = 0.0;
  };

  int capacity_;
  DropScenario scenario_;
  std::vector<Slot> slots_;
};

struct SufferageTable {
  std::vector<double> value;  // per task type, clamped to [0, 1]
  double fairness_factor = 0.05;

  SufferageTable() = default;
  SufferageTable(int task_type_count, double fairness) : value(task_type_count, 0.0), fairness_factor(fairness) {}
};

SufferageTable update_sufferage(SufferageTable t, int task_type, bool on_time);

// 1 / (deadline - expected_completion); +infinity when the two coincide.
double urgency(Time deadline, double expected_completion);

struct Assignment {
  TaskId task = 0;
  int machine = 0;
};

struct MappingResult {
  std::vector<Assignment> assignments;  // in commit order
  std::vector<TaskId> deferred;         // PAM/PAMF: below the deferring threshold
  std::vector<TaskId> culled;           // MOC: below the culling threshold
};

struct MappingOptions {
  double moc_cull_threshold = kMocCullThreshold;
};

// One mapping event: repeats phase 1 (best machine per task) and phase 2 (one
// pair committed per the heuristic's rule) until the virtual queues are full
// or the batch is exhausted. `batch` must be in arrival order.
MappingResult map_batch(Heuristic h, std::span<const Task> batch, VirtualQueues& vq,
                        const PetMatrix& pet, const PrunerState& pruner,
                        const SufferageTable& sufferage, const MappingOptions& opts = {});

}  // namespace robusched
