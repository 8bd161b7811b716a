#include "robusched/harness.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

namespace robusched {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

void ExperimentSpec::validate() const {
  if (trials_per_point < 2) throw ConfigError("trials_per_point must be at least 2");
  if (points.empty()) throw ConfigError("experiment '" + name + "' has no sweep points");
  for (const auto& p : points) {
    for (const auto& [k, v] : p.overrides)
      if (!is_known_param(k)) throw ConfigError("unknown sweep parameter '" + k + "'");
    for (const std::string* label : {&p.series, &p.x})
      if (label->find_first_of(",\n\"") != std::string::npos)
        throw ConfigError("sweep label '" + *label + "' may not contain commas, quotes or newlines");
  }
  base.validate();
}

std::vector<SweepPoint> sweep_points(const std::string& axis_param,
                                     const std::vector<std::string>& axis_values,
                                     const std::string& series_param,
                                     const std::vector<std::string>& series_values) {
  std::vector<SweepPoint> out;
  const std::vector<std::string> series = series_param.empty() ? std::vector<std::string>{""} : series_values;
  for (const auto& s : series) {
    for (const auto& x : axis_values) {
      SweepPoint p{s, x, {}};
      if (!series_param.empty()) p.overrides.emplace_back(series_param, s);
      p.overrides.emplace_back(axis_param, x);
      out.push_back(std::move(p));
    }
  }
  return out;
}

Summary summarize(const std::vector<double>& values) {
  Summary s;
  s.n = static_cast<int>(values.size());
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / s.n;
  if (!std::isfinite(s.mean) || s.n < 2) {
    s.ci_low = s.ci_high = s.mean;
    return s;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  const double sd = std::sqrt(ss / (s.n - 1));
  const boost::math::students_t dist(s.n - 1);
  const double half = boost::math::quantile(boost::math::complement(dist, 0.025)) * sd / std::sqrt(s.n);
  s.ci_low = s.mean - half;
  s.ci_high = s.mean + half;
  return s;
}

const ResultRow& ResultTable::find(const std::string& series, const std::string& x,
                                   const std::string& metric) const {
  for (const auto& r : rows)
    if (r.series == series && r.x == x && r.metric == metric) return r;
  throw std::out_of_range("no result row for series '" + series + "', x '" + x + "', metric '" + metric + "'");
}

std::uint64_t sim_seed_for(std::uint64_t workload_seed) { return splitmix64(workload_seed); }

std::uint64_t trial_seed(const ExperimentSpec& spec, int trial) {
  return spec.base_seed + static_cast<std::uint64_t>(trial) * spec.seed_stride;
}

ResultTable run_experiment(const ExperimentSpec& spec, const RunOptions& opts) {
  spec.validate();
  return run_experiment(spec, build_pet(spec.base), opts);
}

ResultTable run_experiment(const ExperimentSpec& spec, const PetMatrix& pet, const RunOptions& opts) {
  spec.validate();
  const std::size_t points = spec.points.size();
  const auto trials = static_cast<std::size_t>(spec.trials_per_point);
  const std::size_t jobs = points * trials;

  // Resolve every point's config up front so configuration errors surface
  // before any trial runs.
  std::vector<RunConfig> point_cfg;
  for (const auto& p : spec.points) {
    RunConfig cfg = spec.base;
    for (const auto& [k, v] : p.overrides) apply_param(cfg, k, v);
    cfg.validate();
    point_cfg.push_back(std::move(cfg));
  }

  std::vector<TrialMetrics> results(jobs);
  std::atomic<std::size_t> next{0};
  std::atomic<int> done{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  std::size_t first_error_job = jobs;
  std::mutex progress_mu;

  const auto worker = [&] {
    while (true) {
      const std::size_t job = next.fetch_add(1);
      if (job >= jobs) return;
      {
        std::lock_guard lock(err_mu);
        if (first_error) return;
      }
      const std::size_t point = job / trials;
      const int trial = static_cast<int>(job % trials);
      try {
        RunConfig cfg = point_cfg[point];
        const std::uint64_t seed = trial_seed(spec, trial);
        cfg.workload.seed = seed;
        cfg.sim.seed = sim_seed_for(seed);
        const auto trace = generate_trace(cfg.workload, pet);
        results[job] = run_trial(cfg.sim, pet, trace).metrics;
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mu);
        if (job < first_error_job) {
          first_error_job = job;
          first_error = std::make_exception_ptr(TrialAborted(
              "experiment '" + spec.name + "', point (" + spec.points[point].series + ", " +
              spec.points[point].x + "), trial " + std::to_string(trial) + ": " + e.what()));
        }
        return;
      }
      const int d = ++done;
      if (opts.progress) {
        std::lock_guard lock(progress_mu);
        opts.progress(d, static_cast<int>(jobs));
      }
    }
  };

  const int workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(jobs)));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  ResultTable table{spec.name, spec.series_param, spec.axis_param, {}};
  for (std::size_t p = 0; p < points; ++p) {
    std::vector<std::vector<double>> values(metric_names().size());
    for (std::size_t k = 0; k < trials; ++k) {
      const TrialMetrics& m = results[p * trials + k];
      values[0].push_back(m.robustness_pct);
      values[1].push_back(m.variance_per_type);
      values[2].push_back(m.total_cost);
      values[3].push_back(m.cost_per_robustness);
    }
    for (std::size_t mi = 0; mi < values.size(); ++mi)
      table.rows.push_back({spec.points[p].series, spec.points[p].x, metric_names()[mi], summarize(values[mi])});
  }
  return table;
}

}  // namespace robusched
