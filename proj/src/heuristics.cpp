#include "robusched/heuristics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace robusched {

const char* to_token(Heuristic h) {
  switch (h) {
    case Heuristic::mm: return "mm";
    case Heuristic::msd: return "msd";
    case Heuristic::mmu: return "mmu";
    case Heuristic::moc: return "moc";
    case Heuristic::pam: return "pam";
    case Heuristic::pamf: return "pamf";
  }
  return "?";
}

Heuristic parse_heuristic(const std::string& token) {
  static const std::array<Heuristic, 6> all{Heuristic::mm,  Heuristic::msd, Heuristic::mmu,
                                            Heuristic::moc, Heuristic::pam, Heuristic::pamf};
  for (Heuristic h : all)
    if (token == to_token(h)) return h;
  throw ConfigError("unknown heuristic '" + token + "' (expected mm | msd | mmu | moc | pam | pamf)");
}

bool uses_pruning(Heuristic h) { return h == Heuristic::pam || h == Heuristic::pamf; }

VirtualQueues::VirtualQueues(const std::vector<MachineQueue>& machines, int queue_capacity,
                             const PetMatrix& pet, DropScenario scenario, Time now)
    : capacity_(queue_capacity), scenario_(scenario), slots_(machines.size()) {
  for (std::size_t j = 0; j < machines.size(); ++j) {
    const MachineQueue& q = machines[j];
    if (q.machine != static_cast<int>(j))
      throw std::logic_error("machine queues must be indexed by machine id");
    if (static_cast<int>(q.tasks.size()) > capacity_)
      throw std::logic_error("machine " + std::to_string(j) + " queue exceeds capacity");
    Slot& s = slots_[j];
    s.length = static_cast<int>(q.tasks.size());
    // Full queues never receive a task, so their tail is not needed.
    s.tail = s.length < capacity_ ? queue_tail(q, pet, scenario, now) : idle_pct(now);
    s.release = s.tail.release_view();
    s.release_mean = expected_value(s.release);
  }
}

bool VirtualQueues::any_free() const {
  return std::any_of(slots_.begin(), slots_.end(),
                     [&](const Slot& s) { return s.length < capacity_; });
}

void VirtualQueues::append(int m, const Task& task, const PetMatrix& pet) {
  Slot& s = slots_[static_cast<std::size_t>(m)];
  if (s.length >= capacity_) throw std::logic_error("append to a full virtual queue");
  s.tail = convolve(scenario_, s.tail, pet.entry(task.task_type, m), task.deadline);
  s.release = s.tail.release_view();
  s.release_mean = expected_value(s.release);
  ++s.length;
  if (std::abs(s.release.mass() - 1.0) > 1e-6)
    throw std::logic_error("virtual queue tail lost mass on machine " + std::to_string(m));
}

double VirtualQueues::candidate_robustness(int m, const Task& task, const PetMatrix& pet) const {
  return append_robustness(scenario_, tail_release(m), pet.cdf(task.task_type, m), task.deadline);
}

double VirtualQueues::candidate_completion(int m, const Task& task, const PetMatrix& pet) const {
  return tail_release_mean(m) + pet.cdf(task.task_type, m).mean();
}

SufferageTable update_sufferage(SufferageTable t, int task_type, bool on_time) {
  double& v = t.value.at(static_cast<std::size_t>(task_type));
  v = std::clamp(v + (on_time ? -t.fairness_factor : t.fairness_factor), 0.0, 1.0);
  return t;
}

double urgency(Time deadline, double expected_completion) {
  const double slack = static_cast<double>(deadline) - expected_completion;
  if (slack == 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / slack;
}

namespace {

struct Candidate {
  std::size_t task;  // index into the batch
  int machine;
};

bool robustness_driven(Heuristic h) {
  return h == Heuristic::moc || h == Heuristic::pam || h == Heuristic::pamf;
}

class BatchMapper {
 public:
  BatchMapper(Heuristic h, std::span<const Task> batch, VirtualQueues& vq, const PetMatrix& pet,
              const PrunerState& pruner, const SufferageTable& sufferage, const MappingOptions& opts)
      : h_(h),
        batch_(batch),
        vq_(vq),
        pet_(pet),
        opts_(opts),
        machines_(vq.machine_count()),
        active_(batch.size(), 1),
        rob_(batch.size() * static_cast<std::size_t>(machines_), 0.0),
        ec_(batch.size() * static_cast<std::size_t>(machines_), 0.0),
        defer_at_(batch.size(), pruner.defer_threshold) {
    if (h_ == Heuristic::pamf) {
      for (std::size_t i = 0; i < batch_.size(); ++i) {
        const auto type = static_cast<std::size_t>(batch_[i].task_type);
        const double eps = type < sufferage.value.size() ? sufferage.value[type] : 0.0;
        defer_at_[i] = std::clamp(pruner.defer_threshold - eps, 0.0, 1.0);
      }
    }
    for (int j = 0; j < machines_; ++j) refresh_column(j);
  }

  MappingResult run() {
    MappingResult out;
    while (vq_.any_free()) {
      std::vector<Candidate> pairs = phase_one(out);
      if (pairs.empty()) break;
      const Candidate pick = phase_two(pairs);
      vq_.append(pick.machine, batch_[pick.task], pet_);
      active_[pick.task] = 0;
      out.assignments.push_back({batch_[pick.task].id, pick.machine});
      refresh_column(pick.machine);
    }
    return out;
  }

 private:
  double& rob(std::size_t i, int j) { return rob_[i * static_cast<std::size_t>(machines_) + static_cast<std::size_t>(j)]; }
  double& ec(std::size_t i, int j) { return ec_[i * static_cast<std::size_t>(machines_) + static_cast<std::size_t>(j)]; }

  void refresh_column(int j) {
    if (vq_.free_slots(j) <= 0) return;
    for (std::size_t i = 0; i < batch_.size(); ++i) {
      if (!active_[i]) continue;
      if (robustness_driven(h_)) rob(i, j) = vq_.candidate_robustness(j, batch_[i], pet_);
      ec(i, j) = vq_.candidate_completion(j, batch_[i], pet_);
    }
  }

  // Best machine per active task; prunes (defers or culls) tasks that fail
  // the heuristic's robustness bar.
  std::vector<Candidate> phase_one(MappingResult& out) {
    std::vector<Candidate> pairs;
    for (std::size_t i = 0; i < batch_.size(); ++i) {
      if (!active_[i]) continue;
      int best = -1;
      for (int j = 0; j < machines_; ++j) {
        if (vq_.free_slots(j) <= 0) continue;
        if (best < 0) {
          best = j;
        } else if (robustness_driven(h_) ? rob(i, j) > rob(i, best) : ec(i, j) < ec(i, best)) {
          best = j;
        }
      }
      if (best < 0) break;
      if (h_ == Heuristic::pam || h_ == Heuristic::pamf) {
        if (should_defer(rob(i, best), defer_at_[i])) {
          active_[i] = 0;
          out.deferred.push_back(batch_[i].id);
          continue;
        }
      } else if (h_ == Heuristic::moc && rob(i, best) < opts_.moc_cull_threshold) {
        active_[i] = 0;
        out.culled.push_back(batch_[i].id);
        continue;
      }
      pairs.push_back({i, best});
    }
    return pairs;
  }

  Candidate phase_two(const std::vector<Candidate>& pairs) {
    if (h_ == Heuristic::moc) return moc_pick(pairs);
    const auto better = [&](const Candidate& a, const Candidate& b) {
      const Task& ta = batch_[a.task];
      const Task& tb = batch_[b.task];
      const double eca = ec(a.task, a.machine);
      const double ecb = ec(b.task, b.machine);
      switch (h_) {
        case Heuristic::mm: return eca < ecb;
        case Heuristic::msd:
          if (ta.deadline != tb.deadline) return ta.deadline < tb.deadline;
          return eca < ecb;
        case Heuristic::mmu: return urgency(ta.deadline, eca) > urgency(tb.deadline, ecb);
        case Heuristic::pam:
        case Heuristic::pamf: {
          if (eca != ecb) return eca < ecb;
          return pet_.cdf(ta.task_type, a.machine).mean() < pet_.cdf(tb.task_type, b.machine).mean();
        }
        case Heuristic::moc: break;
      }
      return false;
    };
    Candidate best = pairs.front();
    for (std::size_t k = 1; k < pairs.size(); ++k)
      if (better(pairs[k], best)) best = pairs[k];
    return best;
  }

  // Orders the (up to) three most robust pairs every possible way, commits
  // each ordering on scratch queues, and returns the first pair of the
  // ordering with the highest summed robustness.
  Candidate moc_pick(std::vector<Candidate> pairs) {
    std::stable_sort(pairs.begin(), pairs.end(), [&](const Candidate& a, const Candidate& b) {
      return rob(a.task, a.machine) > rob(b.task, b.machine);
    });
    if (pairs.size() > 3) pairs.resize(3);

    std::vector<int> order(pairs.size());
    std::iota(order.begin(), order.end(), 0);
    std::map<std::vector<int>, Pct> scratch;  // committed-prefix -> tail of the last machine touched
    double best_sum = -1.0;
    int best_first = 0;
    do {
      double sum = 0.0;
      std::map<int, std::pair<Pct, int>> state;  // machine -> (tail, free slots)
      for (std::size_t k = 0; k < order.size(); ++k) {
        const Candidate& c = pairs[static_cast<std::size_t>(order[k])];
        auto it = state.find(c.machine);
        if (it == state.end())
          it = state.emplace(c.machine, std::make_pair(vq_.tail(c.machine), vq_.free_slots(c.machine))).first;
        auto& [tail, free] = it->second;
        if (free <= 0) continue;
        const Task& t = batch_[c.task];
        const Pmf& exec = pet_.entry(t.task_type, c.machine);
        sum += k == 0 ? rob(c.task, c.machine)
                      : append_robustness(vq_.scenario(), tail.release_view(),
                                          pet_.cdf(t.task_type, c.machine), t.deadline);
        if (k + 1 < order.size()) {
          std::vector<int> prefix(order.begin(), order.begin() + static_cast<long>(k) + 1);
          auto memo = scratch.find(prefix);
          if (memo == scratch.end())
            memo = scratch.emplace(prefix, convolve(vq_.scenario(), tail, exec, t.deadline)).first;
          tail = memo->second;
        }
        --free;
      }
      if (sum > best_sum) {
        best_sum = sum;
        best_first = order.front();
      }
    } while (std::next_permutation(order.begin(), order.end()));
    return pairs[static_cast<std::size_t>(best_first)];
  }

  Heuristic h_;
  std::span<const Task> batch_;
  VirtualQueues& vq_;
  const PetMatrix& pet_;
  MappingOptions opts_;
  int machines_;
  std::vector<char> active_;
  std::vector<double> rob_;
  std::vector<double> ec_;
  std::vector<double> defer_at_;
};

}  // namespace

MappingResult map_batch(Heuristic h, std::span<const Task> batch, VirtualQueues& vq,
                        const PetMatrix& pet, const PrunerState& pruner,
                        const SufferageTable& sufferage, const MappingOptions& opts) {
  return BatchMapper(h, batch, vq, pet, pruner, sufferage, opts).run();
}

}  // namespace robusched
