#include "robusched/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace robusched {

using nlohmann::json;

namespace {

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError("parameter " + key + ": '" + v + "' is not a number");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError("parameter " + key + ": '" + v + "' is not an integer");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("parameter " + key + ": '" + v + "' is not a boolean");
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void RunConfig::validate() const {
  workload.validate();
  sim.validate();
  if (!pet_file && pet.task_type_count != workload.task_type_count)
    throw ConfigError("pet.task_types must equal workload.task_types");
}

const std::vector<std::string>& param_names() {
  static const std::vector<std::string> keys{
      "heuristic", "scenario", "lambda", "rho", "drop_threshold", "defer_threshold", "defer_gap",
      "trigger_on", "trigger_off", "fairness_factor", "moc_cull_threshold", "queue_capacity",
      "trim_count", "probabilistic_dropping", "sample_from_gamma", "total_tasks", "span",
      "slack_beta", "arrival_variance_ratio"};
  return keys;
}

bool is_known_param(const std::string& key) {
  for (const auto& k : param_names())
    if (key == k) return true;
  return false;
}

void apply_param(RunConfig& cfg, const std::string& key, const std::string& value) {
  auto& p = cfg.sim.pruner;
  if (key == "heuristic") cfg.sim.heuristic = parse_heuristic(value);
  else if (key == "scenario") cfg.sim.scenario = parse_scenario(value);
  else if (key == "lambda") p.lambda = to_double(key, value);
  else if (key == "rho") p.rho = to_double(key, value);
  else if (key == "drop_threshold") p.base_drop_threshold = to_double(key, value);
  else if (key == "defer_threshold") p.defer_threshold = to_double(key, value);
  else if (key == "defer_gap") p.defer_threshold = p.base_drop_threshold + to_double(key, value);
  else if (key == "trigger_on") p.trigger_on = to_double(key, value);
  else if (key == "trigger_off") p.trigger_off = to_double(key, value);
  else if (key == "fairness_factor") cfg.sim.fairness_factor = to_double(key, value);
  else if (key == "moc_cull_threshold") cfg.sim.moc_cull_threshold = to_double(key, value);
  else if (key == "queue_capacity") cfg.sim.queue_capacity = static_cast<int>(to_int(key, value));
  else if (key == "trim_count") cfg.sim.trim_count = static_cast<int>(to_int(key, value));
  else if (key == "probabilistic_dropping") {
    if (value == "auto") cfg.sim.probabilistic_dropping.reset();
    else cfg.sim.probabilistic_dropping = to_bool(key, value);
  }
  else if (key == "sample_from_gamma") cfg.sim.sample_from_gamma = to_bool(key, value);
  else if (key == "total_tasks") cfg.workload.total_tasks = static_cast<int>(to_int(key, value));
  else if (key == "span") cfg.workload.span = to_int(key, value);
  else if (key == "slack_beta") cfg.workload.slack_beta = to_double(key, value);
  else if (key == "arrival_variance_ratio") cfg.workload.arrival_variance_ratio = to_double(key, value);
  else throw ConfigError("unknown parameter '" + key + "'");
}

RunConfig parse_run_config(const std::string& json_text) {
  RunConfig cfg;
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  try {
    if (root.contains("pet")) {
      const json& j = root.at("pet");
      read(j, "task_types", cfg.pet.task_type_count);
      read(j, "machines", cfg.pet.machine_count);
      read(j, "mean_lo", cfg.pet.mean_lo);
      read(j, "mean_hi", cfg.pet.mean_hi);
      read(j, "shape_lo", cfg.pet.shape_lo);
      read(j, "shape_hi", cfg.pet.shape_hi);
      read(j, "samples_per_cell", cfg.pet.samples_per_cell);
      read(j, "bin_width", cfg.pet.bin_width);
      read(j, "seed", cfg.pet.seed);
      if (j.contains("file")) cfg.pet_file = j.at("file").get<std::string>();
    }
    cfg.workload.task_type_count = cfg.pet.task_type_count;
    if (root.contains("workload")) {
      const json& j = root.at("workload");
      read(j, "total_tasks", cfg.workload.total_tasks);
      read(j, "task_types", cfg.workload.task_type_count);
      read(j, "span", cfg.workload.span);
      read(j, "arrival_variance_ratio", cfg.workload.arrival_variance_ratio);
      read(j, "slack_beta", cfg.workload.slack_beta);
      read(j, "seed", cfg.workload.seed);
    }
    if (root.contains("sim")) {
      const json& j = root.at("sim");
      if (j.contains("scenario")) cfg.sim.scenario = parse_scenario(j.at("scenario").get<std::string>());
      if (j.contains("heuristic")) cfg.sim.heuristic = parse_heuristic(j.at("heuristic").get<std::string>());
      read(j, "queue_capacity", cfg.sim.queue_capacity);
      read(j, "trim_count", cfg.sim.trim_count);
      if (j.contains("probabilistic_dropping") && !j.at("probabilistic_dropping").is_null())
        cfg.sim.probabilistic_dropping = j.at("probabilistic_dropping").get<bool>();
      read(j, "fairness_factor", cfg.sim.fairness_factor);
      read(j, "moc_cull_threshold", cfg.sim.moc_cull_threshold);
      read(j, "sample_from_gamma", cfg.sim.sample_from_gamma);
      read(j, "price_rates", cfg.sim.price_rates);
      read(j, "seed", cfg.sim.seed);
    }
    if (root.contains("pruner")) {
      const json& j = root.at("pruner");
      auto& p = cfg.sim.pruner;
      read(j, "lambda", p.lambda);
      read(j, "trigger_on", p.trigger_on);
      read(j, "trigger_off", p.trigger_off);
      read(j, "drop_threshold", p.base_drop_threshold);
      read(j, "defer_threshold", p.defer_threshold);
      read(j, "rho", p.rho);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string dump_run_config(const RunConfig& cfg) {
  json root;
  root["pet"] = {{"task_types", cfg.pet.task_type_count}, {"machines", cfg.pet.machine_count},
                 {"mean_lo", cfg.pet.mean_lo},            {"mean_hi", cfg.pet.mean_hi},
                 {"shape_lo", cfg.pet.shape_lo},          {"shape_hi", cfg.pet.shape_hi},
                 {"samples_per_cell", cfg.pet.samples_per_cell},
                 {"bin_width", cfg.pet.bin_width},        {"seed", cfg.pet.seed}};
  if (cfg.pet_file) root["pet"]["file"] = cfg.pet_file->string();
  root["workload"] = {{"total_tasks", cfg.workload.total_tasks},
                      {"task_types", cfg.workload.task_type_count},
                      {"span", cfg.workload.span},
                      {"arrival_variance_ratio", cfg.workload.arrival_variance_ratio},
                      {"slack_beta", cfg.workload.slack_beta},
                      {"seed", cfg.workload.seed}};
  root["sim"] = {{"scenario", to_token(cfg.sim.scenario)},
                 {"heuristic", to_token(cfg.sim.heuristic)},
                 {"queue_capacity", cfg.sim.queue_capacity},
                 {"trim_count", cfg.sim.trim_count},
                 {"fairness_factor", cfg.sim.fairness_factor},
                 {"moc_cull_threshold", cfg.sim.moc_cull_threshold},
                 {"sample_from_gamma", cfg.sim.sample_from_gamma},
                 {"price_rates", cfg.sim.price_rates.empty() ? default_price_rates() : cfg.sim.price_rates},
                 {"seed", cfg.sim.seed}};
  root["sim"]["probabilistic_dropping"] =
      cfg.sim.probabilistic_dropping ? json(*cfg.sim.probabilistic_dropping) : json(nullptr);
  const auto& p = cfg.sim.pruner;
  root["pruner"] = {{"lambda", p.lambda},
                    {"trigger_on", p.trigger_on},
                    {"trigger_off", p.trigger_off},
                    {"drop_threshold", p.base_drop_threshold},
                    {"defer_threshold", p.defer_threshold},
                    {"rho", p.rho}};
  return root.dump(2) + "\n";
}

PetMatrix build_pet(const RunConfig& cfg) {
  if (cfg.pet_file) return load_pet(*cfg.pet_file);
  return generate_synthetic_pet(cfg.pet);
}

}  // namespace robusched
