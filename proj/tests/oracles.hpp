#pragma once

// Reference implementations used only by the tests. They are written from the
// verbal rules, not from the library, and favour obviousness over speed.

#include <algorithm>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "robusched/pmf.hpp"

namespace oracle {

using robusched::DropScenario;
using robusched::Pmf;
using robusched::Time;

using Dist = std::map<Time, double>;

inline Dist to_dist(const Pmf& p) {
  Dist d;
  for (const auto& i : p.impulses()) d[i.time] += i.prob;
  return d;
}

inline double mass(const Dist& d) {
  double m = 0.0;
  for (const auto& [t, p] : d) m += p;
  return m;
}

// Split completion distribution, as pairs of maps.
struct SplitDist {
  Dist success;
  Dist passthrough;
};

inline Dist release(const SplitDist& s) {
  Dist d = s.success;
  for (const auto& [t, p] : s.passthrough) d[t] += p;
  return d;
}

// Enumerates every (release, execution) pair under one dropping rule.
//   no_drop: the task always starts at the release time.
//   pending: it starts only if the machine frees strictly before its
//            deadline; otherwise the machine release passes through.
//   evict:   as pending, and a run still going at the deadline is stopped
//            there, freeing the machine at the deadline.
inline SplitDist step(DropScenario rule, const Dist& rel, const Dist& exec, Time deadline) {
  SplitDist out;
  for (const auto& [r, pr] : rel) {
    if (rule != DropScenario::no_drop && r >= deadline) {
      out.passthrough[r] += pr;
      continue;
    }
    for (const auto& [e, pe] : exec) {
      const Time finish = r + e;
      if (rule == DropScenario::evict && finish > deadline)
        out.passthrough[deadline] += pr * pe;
      else
        out.success[finish] += pr * pe;
    }
  }
  return out;
}

inline double success_by(const SplitDist& s, Time deadline) {
  double p = 0.0;
  for (const auto& [t, m] : s.success)
    if (t <= deadline) p += m;
  return p;
}

// One queued task for the Monte-Carlo oracle.
struct QueueTask {
  std::vector<Time> exec_times;
  std::vector<double> exec_probs;
  Time deadline;
};

// Simulates the queue `samples` times and returns each task's on-time
// frequency. The machine is initially free at a time drawn from `initial`.
inline std::vector<double> monte_carlo_success(DropScenario rule, const Pmf& initial,
                                               const std::vector<QueueTask>& tasks, int samples,
                                               std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Time> init_t;
  std::vector<double> init_p;
  for (const auto& i : initial.impulses()) {
    init_t.push_back(i.time);
    init_p.push_back(i.prob);
  }
  std::discrete_distribution<std::size_t> init_pick(init_p.begin(), init_p.end());
  std::vector<std::discrete_distribution<std::size_t>> picks;
  for (const auto& t : tasks) picks.emplace_back(t.exec_probs.begin(), t.exec_probs.end());

  std::vector<long> hits(tasks.size(), 0);
  for (int s = 0; s < samples; ++s) {
    Time free_at = init_t[init_pick(rng)];
    for (std::size_t k = 0; k < tasks.size(); ++k) {
      const Time exec = tasks[k].exec_times[picks[k](rng)];
      const Time deadline = tasks[k].deadline;
      if (rule != DropScenario::no_drop && free_at >= deadline) continue;  // dropped unstarted
      const Time finish = free_at + exec;
      if (finish <= deadline) {
        ++hits[k];
        free_at = finish;
      } else if (rule == DropScenario::evict) {
        free_at = deadline;
      } else {
        free_at = finish;
      }
    }
  }
  std::vector<double> out;
  for (long h : hits) out.push_back(static_cast<double>(h) / samples);
  return out;
}

// Random Pmf with 1..max_impulses impulses on [lo, hi].
inline Pmf random_pmf(std::mt19937_64& rng, int max_impulses, Time lo, Time hi) {
  std::uniform_int_distribution<int> count(1, max_impulses);
  std::uniform_int_distribution<Time> when(lo, hi);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  const int n = count(rng);
  std::map<Time, double> d;
  for (int i = 0; i < n; ++i) d[when(rng)] += weight(rng);
  double total = 0.0;
  for (const auto& [t, w] : d) total += w;
  std::vector<robusched::Impulse> imp;
  for (const auto& [t, w] : d) imp.push_back({t, w / total});
  return Pmf::from_impulses(std::move(imp));
}

// Classical deterministic Min-Min on a batch with known execution times and
// machine ready times. Repeatedly evaluates every unassigned task on every
// machine and commits the globally smallest completion. Ties: lowest task
// index, then lowest machine index. Returns (task index, machine) in commit
// order; stops when machines are full.
inline std::vector<std::pair<int, int>> min_min(const std::vector<std::vector<double>>& exec,
                                                std::vector<double> ready,
                                                std::vector<int> free_slots) {
  const int n = static_cast<int>(exec.size());
  const int m = static_cast<int>(ready.size());
  std::vector<bool> done(static_cast<std::size_t>(n), false);
  std::vector<std::pair<int, int>> order;
  while (true) {
    double best = std::numeric_limits<double>::infinity();
    int bt = -1, bm = -1;
    for (int t = 0; t < n; ++t) {
      if (done[static_cast<std::size_t>(t)]) continue;
      for (int j = 0; j < m; ++j) {
        if (free_slots[static_cast<std::size_t>(j)] <= 0) continue;
        const double c = ready[static_cast<std::size_t>(j)] + exec[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)];
        if (c < best) {
          best = c;
          bt = t;
          bm = j;
        }
      }
    }
    if (bt < 0) break;
    done[static_cast<std::size_t>(bt)] = true;
    ready[static_cast<std::size_t>(bm)] = best;
    --free_slots[static_cast<std::size_t>(bm)];
    order.emplace_back(bt, bm);
  }
  return order;
}

}  // namespace oracle
