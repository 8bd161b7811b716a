// Acceptance gate. One PASS/FAIL line per criterion; non-zero exit if any
// fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <thread>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "robusched/harness.hpp"
#include "robusched/heuristics.hpp"

using namespace robusched;

namespace {

// Tolerances and thresholds.
constexpr double kMonteCarloTol = 0.01;
constexpr int kMonteCarloSamples = 100000;
constexpr double kMassTol = 1e-9;
constexpr double kConvolutionSeconds = 60.0;
constexpr double kMassSeconds = 10.0;
constexpr double kComparisonSeconds = 600.0;
constexpr double kMinPamLeadPts = 10.0;
constexpr double kMaxFairnessLoss = 0.15;
constexpr double kMinCostSaving = 0.20;

struct Verdict {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const Verdict& v) {
  std::printf("criterion %2d %s  %s: %s\n", id, v.pass ? "PASS" : "FAIL", title.c_str(), v.detail.c_str());
  std::fflush(stdout);
  failures += !v.pass;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", prec, v);
  return buf;
}

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

std::string ci(const Summary& s) {
  return num(s.mean, 2) + " [" + num(s.ci_low, 2) + ", " + num(s.ci_high, 2) + "]";
}

Verdict convolution_vs_monte_carlo() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  int estimates = 0;
  for (int q = 0; q < 200; ++q) {
    const Pmf initial = oracle::random_pmf(rng, 8, 0, 20);
    const int depth = 1 + static_cast<int>(rng() % 4);
    std::vector<Pmf> pets;
    std::vector<Time> deadlines;
    std::vector<oracle::QueueTask> queue;
    for (int k = 0; k < depth; ++k) {
      pets.push_back(oracle::random_pmf(rng, 8, 1, 30));
      deadlines.push_back(15 * (k + 1) + static_cast<Time>(rng() % 25));
      oracle::QueueTask t{{}, {}, deadlines.back()};
      for (const auto& i : pets.back().impulses()) {
        t.exec_times.push_back(i.time);
        t.exec_probs.push_back(i.prob);
      }
      queue.push_back(std::move(t));
    }
    for (auto rule : {DropScenario::no_drop, DropScenario::pending_only, DropScenario::evict}) {
      const auto mc = oracle::monte_carlo_success(rule, initial, queue, kMonteCarloSamples, rng());
      Pct prev{initial, Pmf{}, 0};
      for (int k = 0; k < depth; ++k) {
        prev = convolve(rule, prev, pets[static_cast<std::size_t>(k)], deadlines[static_cast<std::size_t>(k)]);
        const double p = robustness(prev, deadlines[static_cast<std::size_t>(k)]);
        worst = std::max(worst, std::abs(p - mc[static_cast<std::size_t>(k)]));
        ++estimates;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= kMonteCarloTol && secs < kConvolutionSeconds,
          "max |analytic - sampled| = " + num(worst) + " over " + std::to_string(estimates) +
              " task estimates (tol " + num(kMonteCarloTol, 2) + "), " + num(secs, 1) + " s"};
}

Verdict mass_conservation() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1002);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const auto rule = static_cast<DropScenario>(k % 3);
    const Pct prev{oracle::random_pmf(rng, 8, 0, 60), oracle::random_pmf(rng, 3, 0, 60), 0};
    // Rescale to unit mass across both parts.
    const double w = 0.1 + 0.8 * std::uniform_real_distribution<double>(0, 1)(rng);
    std::vector<Impulse> s, p;
    for (const auto& i : prev.success.impulses()) s.push_back({i.time, i.prob * w});
    for (const auto& i : prev.passthrough.impulses()) p.push_back({i.time, i.prob * (1 - w)});
    const Pct in{Pmf::from_impulses(s), Pmf::from_impulses(p), 0};
    const Pct out = convolve(rule, in, oracle::random_pmf(rng, 8, 1, 60), static_cast<Time>(rng() % 150) + 1);
    worst = std::max(worst, std::abs(out.mass() - 1.0));
  }
  const double secs = seconds_since(t0);
  return {worst <= kMassTol && secs < kMassSeconds,
          "max |mass - 1| = " + sci(worst) + " over 10000 calls, " + num(secs, 2) + " s"};
}

Verdict degeneracy() {
  std::mt19937_64 rng(1003);
  int pending_mismatch = 0, evict_mismatch = 0;
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const Pct prev{oracle::random_pmf(rng, 8, 0, 50), Pmf{}, 0};
    const Pmf pet = oracle::random_pmf(rng, 8, 1, 50);
    const Time beyond = prev.success.max_time() + pet.max_time() + 1 + static_cast<Time>(rng() % 10);
    if (!(convolve_pending(prev, pet, beyond) == convolve_no_drop(prev, pet, beyond))) ++pending_mismatch;

    const Pct mixed{oracle::random_pmf(rng, 8, 0, 60), Pmf{}, 0};
    const Time d = static_cast<Time>(rng() % 110) + 1;
    const double a = robustness(convolve_evict(mixed, pet, d), d);
    const double b = robustness(convolve_pending(mixed, pet, d), d);
    worst = std::max(worst, std::abs(a - b));
    if (a != b) ++evict_mismatch;
  }
  return {pending_mismatch == 0 && evict_mismatch == 0,
          "pending != no-drop past support: " + std::to_string(pending_mismatch) +
              "/1000, evict vs pending robustness differs: " + std::to_string(evict_mismatch) +
              "/1000 (max " + sci(worst) + ")"};
}

Verdict hysteresis() {
  bool trace_ok = true;
  PrunerState s;  // on 1.0, off 0.8
  s.lambda = 1.0;
  s = update_oversubscription(s, 0);
  trace_ok = trace_ok && !s.dropping_engaged;
  s = update_oversubscription(s, 1);
  trace_ok = trace_ok && s.dropping_engaged;
  s.level = 0.95;
  s.lambda = 0.5;
  s = update_oversubscription(s, 1);  // 0.975
  trace_ok = trace_ok && s.dropping_engaged;
  s.level = 1.8;
  s = update_oversubscription(s, 0);  // 0.9
  trace_ok = trace_ok && s.dropping_engaged;
  s = update_oversubscription(s, 0);  // 0.45
  trace_ok = trace_ok && !s.dropping_engaged;

  int toggles = 0;
  bool confined = true;
  for (bool start : {false, true}) {
    PrunerState p;
    p.lambda = 0.1;
    p.level = 0.9;
    p.dropping_engaged = start;
    for (int k = 0; k < 10000; ++k) {
      const bool before = p.dropping_engaged;
      p = update_oversubscription(p, p.level < 0.9 ? 1 : 0);
      confined = confined && p.level > p.trigger_off && p.level < p.trigger_on;
      toggles += p.dropping_engaged != before;
    }
  }
  return {trace_ok && confined && toggles == 0,
          std::string("trace ") + (trace_ok ? "ok" : "wrong") + ", level confined " + (confined ? "yes" : "no") +
              ", toggles in 2x10^4 steps = " + std::to_string(toggles)};
}

Verdict heuristic_sanity(const PetMatrix& desk_pet, const RunConfig& desk) {
  std::mt19937_64 rng(1005);
  int mismatches = 0;
  for (int k = 0; k < 100; ++k) {
    const int n = 1 + static_cast<int>(rng() % 6);
    const int m = 1 + static_cast<int>(rng() % 3);
    std::vector<std::vector<Time>> times(static_cast<std::size_t>(n));
    for (auto& row : times)
      for (int j = 0; j < m; ++j) row.push_back(1 + static_cast<Time>(rng() % 20));
    const PetMatrix pet = fixture::point_pet(times);
    std::vector<MachineQueue> queues;
    for (int j = 0; j < m; ++j) queues.push_back({j, std::nullopt, {}});
    std::vector<Task> batch;
    std::vector<std::vector<double>> exec;
    for (int i = 0; i < n; ++i) {
      batch.push_back({i, i, 0, 1000000, TaskState::unmapped});
      exec.emplace_back(times[static_cast<std::size_t>(i)].begin(), times[static_cast<std::size_t>(i)].end());
    }
    const int capacity = 1 + static_cast<int>(rng() % 3);
    VirtualQueues vq(queues, capacity, pet, DropScenario::evict, 0);
    const auto got = map_batch(Heuristic::mm, batch, vq, pet, PrunerState{}, SufferageTable(n, 0.05));
    const auto want = oracle::min_min(exec, std::vector<double>(static_cast<std::size_t>(m), 0.0),
                                      std::vector<int>(static_cast<std::size_t>(m), capacity));
    bool same = got.assignments.size() == want.size();
    for (std::size_t c = 0; same && c < want.size(); ++c)
      same = got.assignments[c].task == want[c].first && got.assignments[c].machine == want[c].second;
    mismatches += !same;
  }

  int log_diffs = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RunConfig cfg = desk;
    cfg.workload.seed = seed;
    cfg.sim.seed = sim_seed_for(seed);
    const auto trace = generate_trace(cfg.workload, desk_pet);
    SimConfig pam = cfg.sim;
    pam.heuristic = Heuristic::pam;
    SimConfig pamf = cfg.sim;
    pamf.heuristic = Heuristic::pamf;
    pamf.fairness_factor = 0.0;
    log_diffs += run_trial(pam, desk_pet, trace).log != run_trial(pamf, desk_pet, trace).log;
  }
  return {mismatches == 0 && log_diffs == 0,
          "MM vs brute-force Min-Min mismatches " + std::to_string(mismatches) +
              "/100, PAMF(0) vs PAM differing logs " + std::to_string(log_diffs) + "/10"};
}

std::map<std::string, std::string> first_csv;

ResultTable run_preset(const std::string& name, const PetMatrix& pet, double* secs = nullptr) {
  RunOptions opts;
  opts.workers = std::max(2u, std::thread::hardware_concurrency());
  const auto t0 = std::chrono::steady_clock::now();
  std::fprintf(stderr, "running preset %s\n", name.c_str());
  ResultTable t = run_experiment(preset(name), pet, opts);
  if (secs) *secs = seconds_since(t0);
  first_csv[name] = render_csv(t);
  return t;
}

Verdict heuristic_ordering(const ResultTable& t, double secs) {
  const auto pam = t.find("", "pam", "robustness_pct").summary;
  std::string detail = "PAM " + ci(pam);
  bool ok = true;
  for (const char* h : {"moc", "mm", "msd", "mmu"}) {
    const auto s = t.find("", h, "robustness_pct").summary;
    ok = ok && pam.mean > s.mean;
    detail += std::string(", ") + h + " " + ci(s);
  }
  const auto mm = t.find("", "mm", "robustness_pct").summary;
  const double lead = pam.mean - mm.mean;
  ok = ok && lead >= kMinPamLeadPts && pam.ci_low > mm.ci_high && secs < kComparisonSeconds;
  detail += ", PAMF " + ci(t.find("", "pamf", "robustness_pct").summary) + "; PAM-MM " + num(lead, 2) +
            " pts; " + num(secs, 0) + " s";
  return {ok, detail};
}

Verdict threshold_gap(const ResultTable& t) {
  const auto wide = t.find("0.50", "0.40", "robustness_pct").summary;
  const auto none = t.find("0.50", "0.00", "robustness_pct").summary;
  return {wide.mean > none.mean && wide.ci_low > none.ci_high,
          "drop 0.50/defer 0.90 " + ci(wide) + " vs drop 0.50/defer 0.50 " + ci(none)};
}

Verdict fairness(const ResultTable& t) {
  const auto v0 = t.find("", "0.00", "type_variance").summary;
  const auto v5 = t.find("", "0.05", "type_variance").summary;
  const auto r0 = t.find("", "0.00", "robustness_pct").summary;
  const auto r5 = t.find("", "0.05", "robustness_pct").summary;
  const double loss = (r0.mean - r5.mean) / r0.mean;
  return {v5.mean < v0.mean && loss <= kMaxFairnessLoss,
          "variance " + num(v0.mean, 1) + " -> " + num(v5.mean, 1) + ", robustness " + ci(r0) + " -> " + ci(r5) +
              " (relative loss " + num(100 * loss, 1) + "%, max " + num(100 * kMaxFairnessLoss, 0) + "%)"};
}

Verdict cost(const ResultTable& t) {
  const auto pam = t.find("high", "pam", "cost_per_robustness").summary;
  const auto mm = t.find("high", "mm", "cost_per_robustness").summary;
  const double saving = 1.0 - pam.mean / mm.mean;
  return {std::isfinite(pam.mean) && std::isfinite(mm.mean) && saving >= kMinCostSaving,
          "cost per robustness PAM " + ci(pam) + " vs MM " + ci(mm) + ", saving " + num(100 * saving, 1) +
              "% (min " + num(100 * kMinCostSaving, 0) + "%)"};
}

// Every trial counts the same number of tasks, so the mean robustness
// maps back to a whole number of on-time tasks summed over trials; the
// comparison is made on those counts so equal means compare equal.
long ontime_total(const Summary& s, int counted_per_trial) {
  return std::lround(s.mean * s.n * counted_per_trial / 100.0);
}

Verdict lambda_effect(const ResultTable& t, int counted_per_trial) {
  const auto hi = t.find("schmitt", "0.9", "robustness_pct").summary;
  const auto lo = t.find("schmitt", "0.5", "robustness_pct").summary;
  const long nhi = ontime_total(hi, counted_per_trial);
  const long nlo = ontime_total(lo, counted_per_trial);
  return {nhi >= nlo, "lambda 0.9 " + ci(hi) + " (" + std::to_string(nhi) + " on time) vs lambda 0.5 " + ci(lo) +
                          " (" + std::to_string(nlo) + " on time)"};
}

Verdict determinism(const PetMatrix& pet) {
  int differing = 0;
  std::string names;
  for (const auto& name : preset_names()) {
    RunOptions opts;
    opts.workers = 1;
    std::fprintf(stderr, "rerunning preset %s\n", name.c_str());
    const std::string again = render_csv(run_experiment(preset(name), pet, opts));
    const bool same = first_csv.count(name) && again == first_csv[name];
    differing += !same;
    names += (names.empty() ? "" : ", ") + name + (same ? " same" : " DIFFERS");
  }
  return {differing == 0, names + " (first run multi-worker, rerun single-worker)"};
}

Verdict guarded(const std::function<Verdict()>& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return {false, std::string("error: ") + e.what()};
  }
}

}  // namespace

int main() {
  report(1, "convolution vs Monte-Carlo", guarded(convolution_vs_monte_carlo));
  report(2, "mass conservation", guarded(mass_conservation));
  report(3, "degeneracy", guarded(degeneracy));
  report(4, "Schmitt hysteresis", guarded(hysteresis));

  const RunConfig desk = desk_scale_config();
  const PetMatrix pet = build_pet(desk);
  const int counted = desk.workload.total_tasks - 2 * desk.sim.trim_count;
  report(5, "heuristic sanity", guarded([&] { return heuristic_sanity(pet, desk); }));

  report(6, "heuristic comparison", guarded([&] {
           double secs = 0;
           const ResultTable t = run_preset("heuristic-comparison", pet, &secs);
           return heuristic_ordering(t, secs);
         }));
  report(7, "threshold gap", guarded([&] { return threshold_gap(run_preset("threshold-gap", pet)); }));
  report(8, "fairness", guarded([&] { return fairness(run_preset("fairness", pet)); }));
  report(9, "cost", guarded([&] { return cost(run_preset("cost", pet)); }));
  report(10, "lambda", guarded([&] { return lambda_effect(run_preset("lambda-sweep", pet), counted); }));
  report(11, "determinism", guarded([&] { return determinism(pet); }));

  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
