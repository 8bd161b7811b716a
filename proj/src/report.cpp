#include "robusched/harness.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace robusched {

namespace {

const char* kCsvHeader = "experiment,series_param,series,axis_param,x,metric,mean,ci_low,ci_high,n";

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, int line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParseError("results line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

ReportFormat parse_report_format(const std::string& token) {
  if (token == "csv") return ReportFormat::csv;
  if (token == "plotdata") return ReportFormat::plotdata;
  throw ConfigError("unknown report format '" + token + "' (expected csv or plotdata)");
}

std::string render_csv(const ResultTable& t) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& r : t.rows) {
    out << t.experiment << ',' << t.series_param << ',' << r.series << ',' << t.axis_param << ',' << r.x
        << ',' << r.metric << ',' << fmt(r.summary.mean) << ',' << fmt(r.summary.ci_low) << ','
        << fmt(r.summary.ci_high) << ',' << r.summary.n << '\n';
  }
  return out.str();
}

ResultTable parse_results_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw ParseError("results line 1: bad header");
  ResultTable t;
  int lineno = 1;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 10) throw ParseError("results line " + std::to_string(lineno) + ": expected 10 fields");
    if (first) {
      t.experiment = f[0];
      t.series_param = f[1];
      t.axis_param = f[3];
      first = false;
    } else if (f[0] != t.experiment || f[1] != t.series_param || f[3] != t.axis_param) {
      throw ParseError("results line " + std::to_string(lineno) + ": mixed experiments in one file");
    }
    ResultRow r{f[2], f[4], f[5], {}};
    r.summary.mean = parse_double(f[6], lineno);
    r.summary.ci_low = parse_double(f[7], lineno);
    r.summary.ci_high = parse_double(f[8], lineno);
    r.summary.n = static_cast<int>(parse_double(f[9], lineno));
    t.rows.push_back(std::move(r));
  }
  return t;
}

std::string render_plotdata(const ResultTable& t) {
  // Blocks keep first-appearance order of metric and series.
  std::vector<std::pair<std::string, std::string>> keys;
  std::map<std::pair<std::string, std::string>, std::vector<const ResultRow*>> blocks;
  for (const auto& r : t.rows) {
    const auto key = std::make_pair(r.metric, r.series);
    auto [it, inserted] = blocks.try_emplace(key);
    if (inserted) keys.push_back(key);
    it->second.push_back(&r);
  }
  std::ostringstream out;
  out << "# experiment " << t.experiment << '\n';
  bool first = true;
  for (const auto& key : keys) {
    if (!first) out << "\n\n";
    first = false;
    out << "# metric " << key.first << '\n';
    out << "# series " << (t.series_param.empty() ? "-" : t.series_param) << '=' << key.second << '\n';
    out << "# " << (t.axis_param.empty() ? "x" : t.axis_param) << " mean ci_low ci_high n\n";
    for (const ResultRow* r : blocks[key])
      out << r->x << ' ' << fmt(r->summary.mean) << ' ' << fmt(r->summary.ci_low) << ' '
          << fmt(r->summary.ci_high) << ' ' << r->summary.n << '\n';
  }
  return out.str();
}

std::string render_report(const ResultTable& t, ReportFormat f) {
  return f == ReportFormat::csv ? render_csv(t) : render_plotdata(t);
}

void emit_report(const ResultTable& t, ReportFormat f, const std::filesystem::path& path) {
  if (t.rows.empty()) throw ConfigError("refusing to emit an empty result table");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << render_report(t, f);
  if (!out.flush()) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace robusched
