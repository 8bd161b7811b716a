#include "robusched/harness.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace robusched {

namespace {

using ojson = nlohmann::ordered_json;

std::string as_param_text(const ojson& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw ConfigError("sweep values must be strings, numbers or booleans");
}

std::vector<std::string> value_list(const ojson& arr) {
  std::vector<std::string> out;
  for (const auto& v : arr) out.push_back(as_param_text(v));
  return out;
}

std::string pct_text(int pct) {
  std::ostringstream s;
  s << pct / 100 << '.' << (pct % 100 < 10 ? "0" : "") << pct % 100;
  return s.str();
}

// Arrival intensity is set by the task count over a fixed span. High leaves
// 800 counted tasks after trimming; low keeps the 19:34 ratio of the two
// levels.
constexpr Time kDeskSpan = 5000;
constexpr int kHighOversubTasks = 1000;
constexpr int kLowOversubTasks = 559;

}  // namespace

RunConfig desk_scale_config() {
  RunConfig cfg;
  cfg.pet.task_type_count = 12;
  cfg.pet.machine_count = 8;
  cfg.pet.bin_width = 1;
  cfg.pet.seed = 42;
  cfg.workload.task_type_count = 12;
  cfg.workload.total_tasks = kHighOversubTasks;
  cfg.workload.span = kDeskSpan;
  cfg.sim.heuristic = Heuristic::pam;
  cfg.sim.scenario = DropScenario::evict;
  return cfg;
}

std::vector<std::string> preset_names() {
  return {"lambda-sweep", "threshold-gap", "fairness", "heuristic-comparison", "cost"};
}

ExperimentSpec preset(const std::string& name) {
  ExperimentSpec spec;
  spec.name = name;
  spec.base = desk_scale_config();
  if (name == "lambda-sweep") {
    // "single" narrows the hysteresis band to a near-single threshold.
    spec.series_param = "trigger";
    spec.axis_param = "lambda";
    for (const auto& [label, off] : {std::pair{"schmitt", "0.8"}, std::pair{"single", "0.999"}})
      for (const char* l : {"0.5", "0.6", "0.7", "0.8", "0.9", "1.0"})
        spec.points.push_back({label, l, {{"trigger_off", off}, {"lambda", l}}});
  } else if (name == "threshold-gap") {
    spec.series_param = "drop_threshold";
    spec.axis_param = "defer_gap";
    for (int drop : {25, 50, 75}) {
      for (int gap = 0; drop + gap <= 90; gap += 5) {
        spec.points.push_back({pct_text(drop), pct_text(gap),
                               {{"drop_threshold", pct_text(drop)}, {"defer_threshold", pct_text(drop + gap)}}});
      }
    }
  } else if (name == "fairness") {
    spec.base.sim.heuristic = Heuristic::pamf;
    spec.axis_param = "fairness_factor";
    spec.points = sweep_points("fairness_factor", {"0.00", "0.05", "0.10", "0.15", "0.20", "0.25"});
  } else if (name == "heuristic-comparison") {
    spec.axis_param = "heuristic";
    spec.points = sweep_points("heuristic", {"mm", "msd", "mmu", "moc", "pam", "pamf"});
  } else if (name == "cost") {
    spec.series_param = "oversubscription";
    spec.axis_param = "heuristic";
    const std::pair<const char*, int> levels[] = {{"low", kLowOversubTasks}, {"high", kHighOversubTasks}};
    for (const auto& [label, tasks] : levels)
      for (const char* h : {"mm", "msd", "mmu", "moc", "pam", "pamf"})
        spec.points.push_back({label, h, {{"total_tasks", std::to_string(tasks)}, {"heuristic", h}}});
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown preset '" + name + "' (known: " + known + ")");
  }
  return spec;
}

ExperimentSpec parse_experiment_spec(const std::string& json_text) {
  ojson root;
  try {
    root = ojson::parse(json_text);
  } catch (const ojson::parse_error& e) {
    throw ParseError(std::string("experiment: ") + e.what());
  }
  ExperimentSpec spec;
  try {
    if (root.contains("preset")) spec = preset(root.at("preset").get<std::string>());
    else spec.base = desk_scale_config();
    if (root.contains("name")) spec.name = root.at("name").get<std::string>();
    if (root.contains("base")) spec.base = parse_run_config(root.at("base").dump());
    if (root.contains("trials_per_point")) spec.trials_per_point = root.at("trials_per_point").get<int>();
    if (root.contains("base_seed")) spec.base_seed = root.at("base_seed").get<std::uint64_t>();
    if (root.contains("seed_stride")) spec.seed_stride = root.at("seed_stride").get<std::uint64_t>();
    if (root.contains("sweep")) {
      const ojson& sw = root.at("sweep");
      const ojson& axis = sw.at("axis");
      spec.axis_param = axis.at("param").get<std::string>();
      std::vector<std::string> series_values;
      spec.series_param.clear();
      if (sw.contains("series")) {
        spec.series_param = sw.at("series").at("param").get<std::string>();
        series_values = value_list(sw.at("series").at("values"));
      }
      spec.points = sweep_points(spec.axis_param, value_list(axis.at("values")), spec.series_param, series_values);
    }
    if (root.contains("points")) {
      if (root.contains("series_param")) spec.series_param = root.at("series_param").get<std::string>();
      if (root.contains("axis_param")) spec.axis_param = root.at("axis_param").get<std::string>();
      spec.points.clear();
      for (const auto& p : root.at("points")) {
        SweepPoint sp;
        sp.series = p.contains("series") ? as_param_text(p.at("series")) : "";
        sp.x = as_param_text(p.at("x"));
        if (p.contains("overrides"))
          for (const auto& [k, v] : p.at("overrides").items()) sp.overrides.emplace_back(k, as_param_text(v));
        spec.points.push_back(std::move(sp));
      }
    }
  } catch (const ojson::exception& e) {
    throw ConfigError(std::string("experiment: ") + e.what());
  }
  if (spec.name.empty()) spec.name = "experiment";
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_spec(ss.str());
}

}  // namespace robusched
