#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "robusched/heuristics.hpp"
#include "robusched/pruner.hpp"
#include "robusched/workload.hpp"

namespace robusched {

class TrialAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hourly on-demand prices of eight cloud VM flavours, reused cyclically when
// a system has more machines.
const std::vector<double>& default_price_rates();

struct SimConfig {
  DropScenario scenario = DropScenario::evict;
  int queue_capacity = 6;  // counts the executing task
  int trim_count = 100;
  Heuristic heuristic = Heuristic::pam;
  PrunerState pruner;
  // Unset: enabled exactly for the pruning heuristics (PAM, PAMF).
  std::optional<bool> probabilistic_dropping;
  double fairness_factor = 0.05;
  double moc_cull_threshold = kMocCullThreshold;
  // Draw actual run times from the generating gamma instead of the PET.
  bool sample_from_gamma = false;
  std::vector<double> price_rates;  // empty: default_price_rates()
  std::uint64_t seed = 1;

  bool dropping_enabled() const {
    return probabilistic_dropping.value_or(uses_pruning(heuristic));
  }
  double price_rate(int machine) const;
  void validate() const;
};

enum class EventKind {
  arrival,
  mapped,           // detail: position in the machine queue
  deferred,         // first time a task is held back by the mapper
  started,          // detail: sampled run time
  completed_ontime,
  completed_late,
  dropped_deadline, // missed its deadline before starting
  evicted,          // executing task stopped at its deadline
  dropped_pruned,   // removed by the probabilistic drop pass; detail 1 if it was executing
};

const char* to_token(EventKind k);
EventKind parse_event_kind(const std::string& token);

struct Event {
  Time time = 0;
  EventKind kind = EventKind::arrival;
  TaskId task = -1;
  int machine = -1;
  std::int64_t detail = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

using EventLog = std::vector<Event>;

// Delimiter-separated rows "time,kind,task,machine,detail" under a
// "robusched-events 1" header.
std::string serialize_event_log(const EventLog& log);
EventLog parse_event_log(const std::string& text);
void save_event_log(const EventLog& log, const std::filesystem::path& path);
EventLog load_event_log(const std::filesystem::path& path);

struct TrialMetrics {
  int counted_ontime = 0;
  int counted_total = 0;
  std::vector<double> per_type_ontime_pct;  // NaN for types with no counted task
  double variance_per_type = 0.0;
  std::vector<double> machine_busy;
  double total_cost = 0.0;
  double robustness_pct = 0.0;
  double cost_per_robustness = 0.0;  // +infinity when robustness is 0

  friend bool operator==(const TrialMetrics&, const TrialMetrics&);
};

struct TrialResult {
  TrialMetrics metrics;
  EventLog log;
  std::vector<Task> final_tasks;  // trace order, with terminal states
  std::int64_t mapping_events = 0;
};

TrialResult run_trial(const SimConfig& cfg, const PetMatrix& pet, const std::vector<Task>& trace);

// Metrics from an event log alone (plus the trace for types and arrival
// order). Tasks are trimmed by arrival order.
TrialMetrics compute_metrics(const EventLog& log, const std::vector<Task>& trace,
                             const SimConfig& cfg, int machine_count, int task_type_count);

}  // namespace robusched
