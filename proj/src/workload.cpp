#include "robusched/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace robusched {

bool is_terminal(TaskState s) {
  return s == TaskState::completed_ontime || s == TaskState::completed_late ||
         s == TaskState::dropped;
}

const char* to_token(TaskState s) {
  switch (s) {
    case TaskState::unmapped: return "unmapped";
    case TaskState::deferred: return "deferred";
    case TaskState::queued: return "queued";
    case TaskState::executing: return "executing";
    case TaskState::completed_ontime: return "completed_ontime";
    case TaskState::completed_late: return "completed_late";
    case TaskState::dropped: return "dropped";
  }
  return "?";
}

void WorkloadConfig::validate() const {
  if (total_tasks <= 0) throw ConfigError("total_tasks must be positive");
  if (task_type_count <= 0) throw ConfigError("task_type_count must be positive");
  if (span <= 0) throw ConfigError("span must be positive");
  if (!(arrival_variance_ratio > 0.0)) throw ConfigError("arrival_variance_ratio must be positive");
  if (slack_beta < 0.0) throw ConfigError("slack_beta must be non-negative");
}

Time deadline_for(Time arrival, double avg_type, double beta, double avg_all) {
  const auto d = static_cast<Time>(
      std::llround(static_cast<double>(arrival) + avg_type + beta * avg_all));
  return std::max(d, arrival + 1);
}

double type_interarrival_mean(const WorkloadConfig& cfg) {
  return static_cast<double>(cfg.span) * cfg.task_type_count / cfg.total_tasks;
}

std::vector<Task> generate_trace(const WorkloadConfig& cfg, const PetMatrix& pet) {
  cfg.validate();
  if (pet.task_type_count() != cfg.task_type_count)
    throw ConfigError("workload task_type_count (" + std::to_string(cfg.task_type_count) +
                      ") does not match the PET (" + std::to_string(pet.task_type_count()) + ")");

  const double mean = type_interarrival_mean(cfg);
  const double variance = cfg.arrival_variance_ratio * mean;
  // Gamma with the given mean and variance: shape = mean^2 / var, scale = var / mean.
  std::gamma_distribution<double> gap(mean * mean / variance, variance / mean);
  const double avg_all = pet.grand_mean();

  Rng rng(cfg.seed);
  std::vector<Task> out;
  out.reserve(static_cast<std::size_t>(cfg.total_tasks));
  const int per_type = cfg.total_tasks / cfg.task_type_count;
  const int extra = cfg.total_tasks % cfg.task_type_count;
  for (int f = 0; f < cfg.task_type_count; ++f) {
    const int n = per_type + (f < extra ? 1 : 0);
    const double avg_type = pet.type_mean(f);
    double clock = 0.0;
    for (int k = 0; k < n; ++k) {
      clock += gap(rng);
      const auto arrival = static_cast<Time>(std::llround(clock));
      out.push_back(Task{0, f, arrival, deadline_for(arrival, avg_type, cfg.slack_beta, avg_all),
                         TaskState::unmapped});
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const Task& a, const Task& b) {
    return a.arrival != b.arrival ? a.arrival < b.arrival : a.task_type < b.task_type;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].id = static_cast<TaskId>(i);
  return out;
}

std::string serialize_trace(const std::vector<Task>& trace) {
  std::ostringstream os;
  os << "robusched-trace 1\n";
  os << "id,type,arrival,deadline\n";
  for (const auto& t : trace)
    os << t.id << ',' << t.task_type << ',' << t.arrival << ',' << t.deadline << '\n';
  return os.str();
}

std::vector<Task> parse_trace(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<Task> out;
  const auto fail = [&](const std::string& what) {
    return ParseError("trace line " + std::to_string(line_no) + ": " + what);
  };
  bool header = false;
  bool columns = false;
  std::set<TaskId> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != "robusched-trace 1") throw fail("expected 'robusched-trace 1' header");
      header = true;
      continue;
    }
    if (!columns) {
      if (line != "id,type,arrival,deadline") throw fail("expected column row 'id,type,arrival,deadline'");
      columns = true;
      continue;
    }
    std::int64_t v[4];
    std::size_t pos = 0;
    for (int c = 0; c < 4; ++c) {
      const std::size_t end = c < 3 ? line.find(',', pos) : line.size();
      if (end == std::string::npos) throw fail("expected 4 comma-separated fields");
      const char* b = line.data() + pos;
      const char* e = line.data() + end;
      const auto res = std::from_chars(b, e, v[c]);
      if (res.ec != std::errc{} || res.ptr != e) throw fail("malformed integer field " + std::to_string(c + 1));
      pos = end + 1;
    }
    Task t{v[0], static_cast<int>(v[1]), v[2], v[3], TaskState::unmapped};
    if (t.task_type < 0) throw fail("negative task type");
    if (t.arrival < 0) throw fail("negative arrival");
    if (t.deadline <= t.arrival)
      throw ValidationError("trace line " + std::to_string(line_no) + ": deadline " +
                            std::to_string(t.deadline) + " is not after arrival " +
                            std::to_string(t.arrival));
    if (!seen.insert(t.id).second) throw fail("duplicate task id " + std::to_string(t.id));
    out.push_back(t);
  }
  if (header && !columns) throw ParseError("trace is missing its column row");
  std::stable_sort(out.begin(), out.end(), [](const Task& a, const Task& b) {
    return a.arrival != b.arrival ? a.arrival < b.arrival : a.id < b.id;
  });
  return out;
}

void save_trace(const std::vector<Task>& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize_trace(trace);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<Task> load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_trace(ss.str());
}

}  // namespace robusched
