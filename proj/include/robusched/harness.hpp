#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "robusched/config.hpp"

namespace robusched {

// One sweep point: parameter overrides applied on top of the base config.
// `series` and `x` are the labels the point is reported under.
struct SweepPoint {
  std::string series;
  std::string x;
  std::vector<std::pair<std::string, std::string>> overrides;
};

struct ExperimentSpec {
  std::string name;
  RunConfig base;
  std::string series_param;  // label of the series dimension ("" if none)
  std::string axis_param;    // label of the x dimension
  std::vector<SweepPoint> points;
  int trials_per_point = 30;
  std::uint64_t base_seed = 1;
  // Trial k uses seed base_seed + k * seed_stride; 0 repeats one seed.
  std::uint64_t seed_stride = 1;

  void validate() const;
};

// Cartesian product axis x series (series optional).
std::vector<SweepPoint> sweep_points(const std::string& axis_param,
                                     const std::vector<std::string>& axis_values,
                                     const std::string& series_param = "",
                                     const std::vector<std::string>& series_values = {});

// Reported metrics, in output order.
inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"robustness_pct", "type_variance", "total_cost",
                                              "cost_per_robustness"};
  return names;
}

struct Summary {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int n = 0;
};

// Mean and two-sided 95% Student-t interval (n - 1 degrees of freedom).
Summary summarize(const std::vector<double>& values);

struct ResultRow {
  std::string series;
  std::string x;
  std::string metric;
  Summary summary;
};

struct ResultTable {
  std::string experiment;
  std::string series_param;
  std::string axis_param;
  std::vector<ResultRow> rows;

  const ResultRow& find(const std::string& series, const std::string& x,
                        const std::string& metric) const;
};

struct RunOptions {
  int workers = 1;
  // Called after every finished trial with (done, total).
  std::function<void(int, int)> progress;
};

// Seeds of trial k: workload uses trial_seed(k), execution sampling a
// decorrelated derivative of it. The PET is built once and shared.
std::uint64_t trial_seed(const ExperimentSpec& spec, int trial);
std::uint64_t sim_seed_for(std::uint64_t workload_seed);
ResultTable run_experiment(const ExperimentSpec& spec, const RunOptions& opts = {});
ResultTable run_experiment(const ExperimentSpec& spec, const PetMatrix& pet, const RunOptions& opts = {});

enum class ReportFormat { csv, plotdata };
ReportFormat parse_report_format(const std::string& token);

// CSV columns: experiment,series_param,series,axis_param,x,metric,mean,ci_low,ci_high,n
std::string render_csv(const ResultTable& t);
ResultTable parse_results_csv(const std::string& text);
// Whitespace-separated blocks per (metric, series), separated by two blank
// lines, for gnuplot-style "index" selection.
std::string render_plotdata(const ResultTable& t);
std::string render_report(const ResultTable& t, ReportFormat f);
void emit_report(const ResultTable& t, ReportFormat f, const std::filesystem::path& path);

// JSON experiment file (see README).
ExperimentSpec parse_experiment_spec(const std::string& json_text);
ExperimentSpec load_experiment_spec(const std::filesystem::path& path);

// Desk-scale presets: lambda-sweep, threshold-gap, fairness,
// heuristic-comparison, cost.
std::vector<std::string> preset_names();
ExperimentSpec preset(const std::string& name);
// Base config the presets share (high oversubscription, 800 counted tasks).
RunConfig desk_scale_config();

}  // namespace robusched
