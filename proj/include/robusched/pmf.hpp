#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace robusched {

// Simulation time in integer units (1 unit = 1 ms at the default scale).
using Time = std::int64_t;

inline constexpr double kMassTolerance = 1e-9;
// Impulses lighter than this are folded into their nearest neighbour after
// each convolution so supports stay bounded along long queues.
inline constexpr double kImpulseMergeThreshold = 1e-12;

class PmfError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Impulse {
  Time time;
  double prob;

  friend bool operator==(const Impulse&, const Impulse&) = default;
};

// Discrete probability mass over integer time. Impulses are kept sorted by
// time with strictly positive mass. A Pmf may hold partial mass (< 1) when it
// is one half of a Pct.
class Pmf {
 public:
  Pmf() = default;

  static Pmf point(Time t);
  // Sorts, merges duplicate times and discards non-positive masses.
  static Pmf from_impulses(std::vector<Impulse> impulses);
  // Takes impulses already sorted by strictly increasing time with positive
  // mass; throws PmfError otherwise.
  static Pmf from_sorted(std::vector<Impulse> impulses);
  // Normalized histogram. Bins are centred on multiples of bin_width, so a
  // sample x lands on time round(x / bin_width) * bin_width.
  static Pmf from_samples(std::span<const double> samples, Time bin_width);

  std::span<const Impulse> impulses() const { return impulses_; }
  std::size_t size() const { return impulses_.size(); }
  bool empty() const { return impulses_.empty(); }
  double mass() const;
  Time min_time() const;
  Time max_time() const;
  // Sum of impulses at times <= t.
  double cdf(Time t) const;

  friend bool operator==(const Pmf&, const Pmf&) = default;

 private:
  explicit Pmf(std::vector<Impulse> sorted) : impulses_(std::move(sorted)) {}

  std::vector<Impulse> impulses_;
};

Pmf shift(const Pmf& p, Time offset);
// Union of two partial masses; coincident times are summed.
Pmf merge(const Pmf& a, const Pmf& b);
double expected_value(const Pmf& p);
// Population third standardized moment, clamped to [-1, 1]; 0 when the
// distribution is degenerate.
double skewness(const Pmf& p);
// Raw (unclamped) third standardized moment.
double raw_skewness(const Pmf& p);
bool is_unit_mass(const Pmf& p, double tol = kMassTolerance);
std::string to_string(const Pmf& p);

// Completion distribution of one queued task. `success` holds mass where the
// task itself finishes; `passthrough` holds mass where the machine frees up
// without the task having completed (dropped before start, or evicted).
struct Pct {
  Pmf success;
  Pmf passthrough;
  Time deadline = 0;

  // Distribution of the time the machine becomes available after this task.
  Pmf release_view() const { return merge(success, passthrough); }
  double mass() const { return success.mass() + passthrough.mass(); }

  friend bool operator==(const Pct&, const Pct&) = default;
};

// Pct of an idle machine: available at `now` with certainty.
Pct idle_pct(Time now);

// Probability the task completes at or before `deadline`.
double robustness(const Pct& p, Time deadline);

// Dropping regime used to fold execution times into completion times.
enum class DropScenario {
  no_drop,       // every mapped task runs to completion
  pending_only,  // queued tasks are dropped once their deadline passes
  evict,         // the executing task is also evicted at its deadline
};

Pct convolve_no_drop(const Pct& prev, const Pmf& pet, Time deadline);
Pct convolve_pending(const Pct& prev, const Pmf& pet, Time deadline);
Pct convolve_evict(const Pct& prev, const Pmf& pet, Time deadline);
Pct convolve(DropScenario scenario, const Pct& prev, const Pmf& pet, Time deadline);

// Pct of a task that started at `start` and is still running at `now`: the
// execution PMF shifted to `start`, conditioned on finishing after `now`.
// Under eviction, mass past the deadline moves to a passthrough impulse at
// the deadline.
Pct executing_pct(DropScenario scenario, const Pmf& pet, Time start, Time now,
                  Time deadline);

// Dense cumulative view of an execution PMF for constant-time CDF lookups.
class CdfTable {
 public:
  CdfTable() = default;
  explicit CdfTable(const Pmf& p);

  double at(Time t) const {
    if (cum_.empty() || t < lo_) return 0.0;
    const auto i = static_cast<std::size_t>(t - lo_);
    return i < cum_.size() ? cum_[i] : cum_.back();
  }
  double mean() const { return mean_; }

 private:
  Time lo_ = 0;
  std::vector<double> cum_;
  double mean_ = 0.0;
};

// Robustness of a task appended behind a machine whose availability is
// `release`, equal to robustness(convolve(...)) without building the
// convolution: sum over startable release times r of release(r) * F(deadline - r).
double append_robustness(DropScenario scenario, const Pmf& release, const CdfTable& pet,
                         Time deadline);

const char* to_token(DropScenario s);
DropScenario parse_scenario(const std::string& token);

}  // namespace robusched
