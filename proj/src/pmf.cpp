#include "robusched/pmf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace robusched {

namespace {

// Folds impulses lighter than kImpulseMergeThreshold into the nearest heavy
// neighbour (earlier one on a tie). If every impulse is light, the heaviest
// one absorbs the rest.
void merge_light_impulses(std::vector<Impulse>& v) {
  const auto light = [](const Impulse& i) { return i.prob < kImpulseMergeThreshold; };
  if (std::none_of(v.begin(), v.end(), light)) return;

  std::vector<std::size_t> anchors;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!light(v[i])) anchors.push_back(i);
  if (anchors.empty()) {
    const auto it = std::max_element(v.begin(), v.end(), [](const Impulse& a, const Impulse& b) {
      return a.prob < b.prob;
    });
    anchors.push_back(static_cast<std::size_t>(it - v.begin()));
  }

  std::vector<double> absorbed(anchors.size(), 0.0);
  std::size_t next = 0;  // first anchor with index >= i
  for (std::size_t i = 0; i < v.size(); ++i) {
    while (next < anchors.size() && anchors[next] < i) ++next;
    if (next < anchors.size() && anchors[next] == i) continue;
    std::size_t target;
    if (next == 0) {
      target = 0;
    } else if (next == anchors.size()) {
      target = anchors.size() - 1;
    } else {
      const Time left = v[i].time - v[anchors[next - 1]].time;
      const Time right = v[anchors[next]].time - v[i].time;
      target = right < left ? next : next - 1;
    }
    absorbed[target] += v[i].prob;
  }

  std::vector<Impulse> out;
  out.reserve(anchors.size());
  for (std::size_t a = 0; a < anchors.size(); ++a)
    out.push_back({v[anchors[a]].time, v[anchors[a]].prob + absorbed[a]});
  v = std::move(out);
}

// Dense accumulation of the convolution of `a` (any subset of a release
// distribution) with `b`, returned as sorted impulses.
std::vector<Impulse> convolve_impulses(std::span<const Impulse> a, std::span<const Impulse> b) {
  if (a.empty() || b.empty()) return {};
  const Time lo = a.front().time + b.front().time;
  const Time hi = a.back().time + b.back().time;
  std::vector<double> buf(static_cast<std::size_t>(hi - lo + 1), 0.0);

  const Time b_lo = b.front().time;
  const auto b_span = static_cast<std::size_t>(b.back().time - b_lo + 1);
  if (b_span <= 4 * b.size()) {
    std::vector<double> dense(b_span, 0.0);
    for (const auto& x : b) dense[static_cast<std::size_t>(x.time - b_lo)] = x.prob;
    for (const auto& x : a) {
      double* dst = buf.data() + (x.time - a.front().time);
      const double w = x.prob;
      for (std::size_t k = 0; k < b_span; ++k) dst[k] += w * dense[k];
    }
  } else {
    for (const auto& x : a)
      for (const auto& y : b) buf[static_cast<std::size_t>(x.time + y.time - lo)] += x.prob * y.prob;
  }

  std::vector<Impulse> out;
  out.reserve(a.size() + b.size());
  for (std::size_t i = 0; i < buf.size(); ++i)
    if (buf[i] > 0.0) out.push_back({lo + static_cast<Time>(i), buf[i]});
  merge_light_impulses(out);
  return out;
}

Pmf from_sorted_unchecked(std::vector<Impulse> v) { return Pmf::from_sorted(std::move(v)); }

}  // namespace

Pmf Pmf::point(Time t) { return Pmf({{t, 1.0}}); }

Pmf Pmf::from_impulses(std::vector<Impulse> impulses) {
  std::stable_sort(impulses.begin(), impulses.end(),
                   [](const Impulse& a, const Impulse& b) { return a.time < b.time; });
  std::vector<Impulse> out;
  out.reserve(impulses.size());
  for (const auto& i : impulses) {
    if (!(i.prob > 0.0)) continue;
    if (!out.empty() && out.back().time == i.time)
      out.back().prob += i.prob;
    else
      out.push_back(i);
  }
  return Pmf(std::move(out));
}

Pmf Pmf::from_sorted(std::vector<Impulse> impulses) {
  for (std::size_t i = 0; i < impulses.size(); ++i) {
    if (!(impulses[i].prob > 0.0)) throw PmfError("impulse with non-positive mass");
    if (i > 0 && impulses[i].time <= impulses[i - 1].time)
      throw PmfError("impulse times not strictly increasing");
  }
  return Pmf(std::move(impulses));
}

Pmf Pmf::from_samples(std::span<const double> samples, Time bin_width) {
  if (samples.empty()) throw PmfError("cannot build a PMF from an empty sample list");
  if (bin_width < 1) throw PmfError("bin width must be at least 1");
  std::vector<Impulse> raw;
  raw.reserve(samples.size());
  const double w = static_cast<double>(bin_width);
  const double unit = 1.0 / static_cast<double>(samples.size());
  for (double x : samples) {
    if (!std::isfinite(x) || x < 0.0) throw PmfError("samples must be finite and non-negative");
    const auto bin = static_cast<Time>(std::floor(x / w + 0.5));
    raw.push_back({bin * bin_width, unit});
  }
  Pmf p = from_impulses(std::move(raw));
  const double total = p.mass();
  for (auto& i : p.impulses_) i.prob /= total;
  return p;
}

double Pmf::mass() const {
  double m = 0.0;
  for (const auto& i : impulses_) m += i.prob;
  return m;
}

Time Pmf::min_time() const {
  if (impulses_.empty()) throw PmfError("empty PMF has no support");
  return impulses_.front().time;
}

Time Pmf::max_time() const {
  if (impulses_.empty()) throw PmfError("empty PMF has no support");
  return impulses_.back().time;
}

double Pmf::cdf(Time t) const {
  double m = 0.0;
  for (const auto& i : impulses_) {
    if (i.time > t) break;
    m += i.prob;
  }
  return m;
}

Pmf shift(const Pmf& p, Time offset) {
  if (offset < 0) throw PmfError("shift offset must be non-negative");
  std::vector<Impulse> v(p.impulses().begin(), p.impulses().end());
  for (auto& i : v) i.time += offset;
  return from_sorted_unchecked(std::move(v));
}

Pmf merge(const Pmf& a, const Pmf& b) {
  if (b.empty()) return a;
  if (a.empty()) return b;
  std::vector<Impulse> out;
  out.reserve(a.size() + b.size());
  auto x = a.impulses().begin();
  auto y = b.impulses().begin();
  const auto xe = a.impulses().end();
  const auto ye = b.impulses().end();
  while (x != xe || y != ye) {
    if (y == ye || (x != xe && x->time < y->time)) {
      out.push_back(*x++);
    } else if (x == xe || y->time < x->time) {
      out.push_back(*y++);
    } else {
      out.push_back({x->time, x->prob + y->prob});
      ++x;
      ++y;
    }
  }
  return from_sorted_unchecked(std::move(out));
}

double expected_value(const Pmf& p) {
  double e = 0.0;
  for (const auto& i : p.impulses()) e += static_cast<double>(i.time) * i.prob;
  return e;
}

double raw_skewness(const Pmf& p) {
  const double m = p.mass();
  if (p.size() < 2 || !(m > 0.0)) return 0.0;
  const double mu = expected_value(p) / m;
  double var = 0.0;
  double third = 0.0;
  for (const auto& i : p.impulses()) {
    const double d = static_cast<double>(i.time) - mu;
    var += d * d * i.prob;
    third += d * d * d * i.prob;
  }
  var /= m;
  third /= m;
  if (!(var > 0.0)) return 0.0;
  return third / (var * std::sqrt(var));
}

double skewness(const Pmf& p) { return std::clamp(raw_skewness(p), -1.0, 1.0); }

bool is_unit_mass(const Pmf& p, double tol) { return std::abs(p.mass() - 1.0) <= tol; }

std::string to_string(const Pmf& p) {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for (const auto& i : p.impulses()) {
    if (!first) os << ", ";
    first = false;
    os << i.time << ':' << i.prob;
  }
  os << '}';
  return os.str();
}

Pct idle_pct(Time now) { return Pct{Pmf::point(now), Pmf{}, now}; }

double robustness(const Pct& p, Time deadline) { return p.success.cdf(deadline); }

Pct convolve_no_drop(const Pct& prev, const Pmf& pet, Time deadline) {
  const Pmf release = prev.release_view();
  return Pct{from_sorted_unchecked(convolve_impulses(release.impulses(), pet.impulses())), Pmf{},
             deadline};
}

Pct convolve_pending(const Pct& prev, const Pmf& pet, Time deadline) {
  const Pmf release = prev.release_view();
  const auto imp = release.impulses();
  const auto split = std::partition_point(imp.begin(), imp.end(),
                                          [&](const Impulse& i) { return i.time < deadline; });
  const auto startable = imp.subspan(0, static_cast<std::size_t>(split - imp.begin()));
  const auto blocked = imp.subspan(startable.size());
  return Pct{from_sorted_unchecked(convolve_impulses(startable, pet.impulses())),
             from_sorted_unchecked({blocked.begin(), blocked.end()}), deadline};
}

Pct convolve_evict(const Pct& prev, const Pmf& pet, Time deadline) {
  Pct pend = convolve_pending(prev, pet, deadline);
  const auto s = pend.success.impulses();
  const auto cut = std::partition_point(s.begin(), s.end(),
                                        [&](const Impulse& i) { return i.time <= deadline; });
  double evicted = 0.0;
  for (auto it = cut; it != s.end(); ++it) evicted += it->prob;
  if (cut == s.end()) return pend;

  std::vector<Impulse> kept(s.begin(), cut);
  Pmf eviction = Pmf::from_sorted({{deadline, evicted}});
  std::vector<Impulse> pass(pend.passthrough.impulses().begin(), pend.passthrough.impulses().end());
  Pmf passthrough = merge(from_sorted_unchecked(std::move(pass)), eviction);
  std::vector<Impulse> pv(passthrough.impulses().begin(), passthrough.impulses().end());
  merge_light_impulses(kept);
  merge_light_impulses(pv);
  return Pct{from_sorted_unchecked(std::move(kept)), from_sorted_unchecked(std::move(pv)), deadline};
}

Pct convolve(DropScenario scenario, const Pct& prev, const Pmf& pet, Time deadline) {
  switch (scenario) {
    case DropScenario::no_drop: return convolve_no_drop(prev, pet, deadline);
    case DropScenario::pending_only: return convolve_pending(prev, pet, deadline);
    case DropScenario::evict: return convolve_evict(prev, pet, deadline);
  }
  throw PmfError("unknown drop scenario");
}

Pct executing_pct(DropScenario scenario, const Pmf& pet, Time start, Time now, Time deadline) {
  std::vector<Impulse> alive;
  double kept = 0.0;
  for (const auto& i : pet.impulses()) {
    const Time t = i.time + start;
    if (t > now) {
      alive.push_back({t, i.prob});
      kept += i.prob;
    }
  }
  if (alive.empty()) {
    // Actual run outlived the modelled support; assume it ends next tick.
    alive.push_back({now + 1, 1.0});
    kept = 1.0;
  }
  for (auto& i : alive) i.prob /= kept;
  Pct out{from_sorted_unchecked(std::move(alive)), Pmf{}, deadline};
  if (scenario != DropScenario::evict) return out;
  if (deadline <= now) return Pct{Pmf{}, Pmf::point(now), deadline};

  const Pmf& s = out.success;
  double late = 0.0;
  std::vector<Impulse> ontime;
  for (const auto& i : s.impulses()) {
    if (i.time <= deadline)
      ontime.push_back(i);
    else
      late += i.prob;
  }
  if (late == 0.0) return out;
  return Pct{from_sorted_unchecked(std::move(ontime)), Pmf::from_sorted({{deadline, late}}), deadline};
}

CdfTable::CdfTable(const Pmf& p) {
  if (p.empty()) return;
  lo_ = p.min_time();
  cum_.assign(static_cast<std::size_t>(p.max_time() - lo_ + 1), 0.0);
  for (const auto& i : p.impulses()) cum_[static_cast<std::size_t>(i.time - lo_)] += i.prob;
  for (std::size_t k = 1; k < cum_.size(); ++k) cum_[k] += cum_[k - 1];
  mean_ = expected_value(p);
}

double append_robustness(DropScenario scenario, const Pmf& release, const CdfTable& pet,
                         Time deadline) {
  double r = 0.0;
  for (const auto& i : release.impulses()) {
    if (scenario != DropScenario::no_drop && i.time >= deadline) break;
    r += i.prob * pet.at(deadline - i.time);
  }
  return r;
}

const char* to_token(DropScenario s) {
  switch (s) {
    case DropScenario::no_drop: return "no-drop";
    case DropScenario::pending_only: return "pending";
    case DropScenario::evict: return "evict";
  }
  return "?";
}

DropScenario parse_scenario(const std::string& token) {
  if (token == "no-drop" || token == "A" || token == "a") return DropScenario::no_drop;
  if (token == "pending" || token == "B" || token == "b") return DropScenario::pending_only;
  if (token == "evict" || token == "C" || token == "c") return DropScenario::evict;
  throw PmfError("unknown drop scenario '" + token + "' (expected no-drop | pending | evict)");
}

}  // namespace robusched
