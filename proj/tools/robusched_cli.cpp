// robusched: generate PETs and traces, run single trials, run experiment
// sweeps and convert result tables.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "robusched/config.hpp"
#include "robusched/harness.hpp"

namespace fs = std::filesystem;
using namespace robusched;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  int workers = 1;
  fs::path out_dir = ".";
  std::optional<fs::path> config;
  std::map<std::string, std::string> params;  // heuristic, lambda, ...

  // PET generation flags.
  std::optional<int> task_types, machines, samples_per_cell, bin_width;
  std::optional<double> mean_lo, mean_hi, shape_lo, shape_hi;
  std::optional<std::uint64_t> pet_seed;
  std::optional<fs::path> pet_file;
};

std::string flag_for(const std::string& key) {
  std::string f = "--" + key;
  for (char& c : f)
    if (c == '_') c = '-';
  return f;
}

void add_config_flags(CLI::App& app, Globals& g) {
  auto* fg = "Configuration";
  app.add_option("--config", g.config, "JSON run config")->check(CLI::ExistingFile)->group(fg);
  for (const auto& key : param_names()) {
    app.add_option_function<std::string>(
           flag_for(key), [&g, key](const std::string& v) { g.params[key] = v; }, "Set " + key)
        ->group(fg);
  }
  app.add_option("--task-types", g.task_types, "Task types in the generated PET")->group(fg);
  app.add_option("--machines", g.machines, "Machines in the generated PET")->group(fg);
  app.add_option("--samples-per-cell", g.samples_per_cell, "Samples per PET histogram")->group(fg);
  app.add_option("--bin-width", g.bin_width, "PET histogram bin width")->group(fg);
  app.add_option("--mean-lo", g.mean_lo, "Lowest synthetic cell mean")->group(fg);
  app.add_option("--mean-hi", g.mean_hi, "Highest synthetic cell mean")->group(fg);
  app.add_option("--shape-lo", g.shape_lo, "Lowest gamma shape")->group(fg);
  app.add_option("--shape-hi", g.shape_hi, "Highest gamma shape")->group(fg);
  app.add_option("--pet-seed", g.pet_seed, "PET generation seed")->group(fg);
  app.add_option("--pet", g.pet_file, "Load the PET from a file instead of generating it")
      ->check(CLI::ExistingFile)
      ->group(fg);
}

RunConfig resolve_config(const Globals& g, RunConfig cfg) {
  if (g.config) cfg = load_run_config(*g.config);
  if (g.task_types) {
    cfg.pet.task_type_count = *g.task_types;
    cfg.workload.task_type_count = *g.task_types;
  }
  if (g.machines) cfg.pet.machine_count = *g.machines;
  if (g.samples_per_cell) cfg.pet.samples_per_cell = *g.samples_per_cell;
  if (g.bin_width) cfg.pet.bin_width = *g.bin_width;
  if (g.mean_lo) cfg.pet.mean_lo = *g.mean_lo;
  if (g.mean_hi) cfg.pet.mean_hi = *g.mean_hi;
  if (g.shape_lo) cfg.pet.shape_lo = *g.shape_lo;
  if (g.shape_hi) cfg.pet.shape_hi = *g.shape_hi;
  if (g.pet_seed) cfg.pet.seed = *g.pet_seed;
  if (g.pet_file) cfg.pet_file = *g.pet_file;
  // drop_threshold before defer_gap so the gap is relative to the new value.
  for (const char* first : {"drop_threshold", "defer_threshold"})
    if (auto it = g.params.find(first); it != g.params.end()) apply_param(cfg, it->first, it->second);
  for (const auto& [k, v] : g.params)
    if (k != "drop_threshold" && k != "defer_threshold") apply_param(cfg, k, v);
  if (g.seed) {
    cfg.workload.seed = *g.seed;
    cfg.sim.seed = sim_seed_for(*g.seed);
  }
  if (cfg.pet_file) {
    const PetMatrix pet = load_pet(*cfg.pet_file);
    cfg.workload.task_type_count = pet.task_type_count();
  }
  cfg.validate();
  return cfg;
}

fs::path in_out_dir(const Globals& g, const fs::path& p) {
  fs::create_directories(g.out_dir);
  return p.is_absolute() ? p : g.out_dir / p;
}

void print_metrics(const TrialMetrics& m, std::int64_t mapping_events) {
  std::printf("counted_tasks        %d\n", m.counted_total);
  std::printf("on_time              %d\n", m.counted_ontime);
  std::printf("robustness_pct       %.4f\n", m.robustness_pct);
  std::printf("type_variance        %.4f\n", m.variance_per_type);
  std::printf("total_cost           %.4f\n", m.total_cost);
  std::printf("cost_per_robustness  %.6g\n", m.cost_per_robustness);
  std::printf("mapping_events       %lld\n", static_cast<long long>(mapping_events));
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robustness-oriented scheduling simulator for oversubscribed heterogeneous systems"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Workload seed (run, gen-trace) or base seed (experiment)");
  app.add_option("--workers", g.workers, "Concurrent trials")->check(CLI::PositiveNumber);
  app.add_option("--out-dir", g.out_dir, "Directory for outputs");

  auto* gen_pet = app.add_subcommand("gen-pet", "Generate a synthetic PET matrix");
  fs::path pet_out = "pet.txt";
  gen_pet->add_option("-o,--output", pet_out, "Output file (relative to --out-dir)");
  add_config_flags(*gen_pet, g);

  auto* gen_trace = app.add_subcommand("gen-trace", "Generate a task arrival trace");
  fs::path trace_out = "trace.csv";
  gen_trace->add_option("-o,--output", trace_out, "Output file (relative to --out-dir)");
  add_config_flags(*gen_trace, g);

  auto* run = app.add_subcommand("run", "Run one trial and write its event log");
  std::optional<fs::path> trace_in;
  fs::path events_out = "events.csv";
  bool dump_cfg = false;
  run->add_option("--trace", trace_in, "Use this trace instead of generating one")->check(CLI::ExistingFile);
  run->add_option("--events", events_out, "Event log output (relative to --out-dir)");
  run->add_flag("--dump-config", dump_cfg, "Print the resolved config as JSON and exit");
  add_config_flags(*run, g);

  auto* exp = app.add_subcommand("experiment", "Run a multi-trial sweep");
  std::optional<std::string> preset_name;
  std::optional<fs::path> spec_file;
  std::optional<int> trials;
  std::string format = "csv";
  std::optional<fs::path> exp_out;
  bool list_presets = false;
  auto* preset_opt = exp->add_option("--preset", preset_name, "Bundled preset");
  exp->add_option("--spec", spec_file, "JSON experiment file")->check(CLI::ExistingFile)->excludes(preset_opt);
  exp->add_option("--trials", trials, "Trials per sweep point");
  exp->add_option("--format", format, "csv or plotdata");
  exp->add_option("-o,--output", exp_out, "Output file (default <name>.csv / .dat in --out-dir)");
  exp->add_flag("--list", list_presets, "List bundled presets");
  add_config_flags(*exp, g);

  auto* rep = app.add_subcommand("report", "Convert a result CSV to another format");
  fs::path rep_in;
  std::string rep_format = "plotdata";
  std::optional<fs::path> rep_out;
  rep->add_option("input", rep_in, "Result CSV")->required()->check(CLI::ExistingFile);
  rep->add_option("--format", rep_format, "csv or plotdata");
  rep->add_option("-o,--output", rep_out, "Output file (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen_pet) {
      RunConfig cfg;
      g.pet_file.reset();
      Globals local = g;
      if (g.seed && !g.pet_seed) local.pet_seed = g.seed;
      local.seed.reset();
      cfg = resolve_config(local, cfg);
      const PetMatrix pet = generate_synthetic_pet(cfg.pet);
      const fs::path out = in_out_dir(g, pet_out);
      save_pet(pet, out);
      std::printf("wrote %s (%d task types x %d machines)\n", out.c_str(), pet.task_type_count(),
                  pet.machine_count());
    } else if (*gen_trace) {
      const RunConfig cfg = resolve_config(g, RunConfig{});
      const PetMatrix pet = build_pet(cfg);
      const auto trace = generate_trace(cfg.workload, pet);
      const fs::path out = in_out_dir(g, trace_out);
      save_trace(trace, out);
      std::printf("wrote %s (%zu tasks)\n", out.c_str(), trace.size());
    } else if (*run) {
      const RunConfig cfg = resolve_config(g, RunConfig{});
      if (dump_cfg) {
        std::fputs(dump_run_config(cfg).c_str(), stdout);
        return 0;
      }
      const PetMatrix pet = build_pet(cfg);
      const auto trace = trace_in ? load_trace(*trace_in) : generate_trace(cfg.workload, pet);
      const TrialResult r = run_trial(cfg.sim, pet, trace);
      const fs::path out = in_out_dir(g, events_out);
      save_event_log(r.log, out);
      print_metrics(r.metrics, r.mapping_events);
      std::printf("event_log            %s\n", out.c_str());
    } else if (*exp) {
      if (list_presets) {
        for (const auto& n : preset_names()) std::printf("%s\n", n.c_str());
        return 0;
      }
      ExperimentSpec spec;
      if (spec_file) spec = load_experiment_spec(*spec_file);
      else if (preset_name) spec = preset(*preset_name);
      else throw ConfigError("experiment needs --preset or --spec");
      Globals local = g;
      local.seed.reset();
      if (local.config || !local.params.empty() || local.pet_file || local.pet_seed || local.bin_width ||
          local.machines || local.task_types || local.samples_per_cell || local.mean_lo || local.mean_hi ||
          local.shape_lo || local.shape_hi)
        spec.base = resolve_config(local, spec.base);
      if (g.seed) spec.base_seed = *g.seed;
      if (trials) spec.trials_per_point = *trials;
      const ReportFormat f = parse_report_format(format);
      const fs::path out =
          in_out_dir(g, exp_out ? *exp_out : fs::path(spec.name + (f == ReportFormat::csv ? ".csv" : ".dat")));
      RunOptions opts;
      opts.workers = g.workers;
      opts.progress = [](int done, int total) {
        std::fprintf(stderr, "\r%d/%d trials", done, total);
        if (done == total) std::fputc('\n', stderr);
      };
      const ResultTable table = run_experiment(spec, opts);
      emit_report(table, f, out);
      std::printf("wrote %s (%zu rows)\n", out.c_str(), table.rows.size());
    } else if (*rep) {
      const ResultTable table = parse_results_csv(read_file(rep_in));
      const ReportFormat f = parse_report_format(rep_format);
      if (rep_out) {
        const fs::path out = in_out_dir(g, *rep_out);
        emit_report(table, f, out);
        std::printf("wrote %s\n", out.c_str());
      } else {
        std::fputs(render_report(table, f).c_str(), stdout);
      }
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "robusched: %s\n", e.what());
    return 1;
  }
  return 0;
}
