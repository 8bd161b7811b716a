#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "robusched/pet.hpp"

namespace robusched {

using TaskId = std::int64_t;

enum class TaskState {
  unmapped,
  deferred,
  queued,
  executing,
  completed_ontime,
  completed_late,
  dropped,
};

bool is_terminal(TaskState s);
const char* to_token(TaskState s);

struct Task {
  TaskId id = 0;
  int task_type = 0;
  Time arrival = 0;
  Time deadline = 0;
  TaskState state = TaskState::unmapped;

  friend bool operator==(const Task&, const Task&) = default;
};

struct WorkloadConfig {
  int total_tasks = 800;
  int task_type_count = 12;
  Time span = 3000;
  double arrival_variance_ratio = 0.10;  // inter-arrival variance as a fraction of its mean
  double slack_beta = 1.0;
  std::uint64_t seed = 1;

  void validate() const;
};

// deadline = arrival + avg_type + beta * avg_all, rounded to the nearest unit
// and kept strictly after the arrival.
Time deadline_for(Time arrival, double avg_type, double beta, double avg_all);

// Mean inter-arrival time of one task type.
double type_interarrival_mean(const WorkloadConfig& cfg);

// Per task type, arrivals follow a gamma renewal process; output is sorted by
// arrival with ids assigned in that order.
std::vector<Task> generate_trace(const WorkloadConfig& cfg, const PetMatrix& pet);

// Columnar text: a "robusched-trace 1" header, a column row
// "id,type,arrival,deadline", then one row per task.
std::string serialize_trace(const std::vector<Task>& trace);
std::vector<Task> parse_trace(const std::string& text);
void save_trace(const std::vector<Task>& trace, const std::filesystem::path& path);
std::vector<Task> load_trace(const std::filesystem::path& path);

}  // namespace robusched
