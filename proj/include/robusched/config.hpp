#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "robusched/pet.hpp"
#include "robusched/simengine.hpp"
#include "robusched/workload.hpp"

namespace robusched {

// Everything needed to build a PET, synthesize a trace and run a trial.
struct RunConfig {
  PetGenConfig pet;
  std::optional<std::filesystem::path> pet_file;  // load instead of generating
  WorkloadConfig workload;
  SimConfig sim;

  void validate() const;
};

// Sets one named parameter from its textual value. Keys: heuristic, scenario,
// lambda, rho, drop_threshold, defer_threshold, defer_gap, trigger_on,
// trigger_off, fairness_factor, moc_cull_threshold, queue_capacity,
// trim_count, probabilistic_dropping, sample_from_gamma, total_tasks, span,
// slack_beta, arrival_variance_ratio.
void apply_param(RunConfig& cfg, const std::string& key, const std::string& value);
bool is_known_param(const std::string& key);
const std::vector<std::string>& param_names();

// JSON config file (see README for the schema). Missing keys keep defaults.
RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);
std::string dump_run_config(const RunConfig& cfg);

PetMatrix build_pet(const RunConfig& cfg);

}  // namespace robusched
