#include "robusched/pet.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace robusched {

namespace {

constexpr const char* kPetMagic = "robusched-pet";
constexpr int kPetVersion = 1;

std::string fmt_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

std::string cell_name(int t, int m) {
  return "cell (" + std::to_string(t) + "," + std::to_string(m) + ")";
}

}  // namespace

PetMatrix::PetMatrix(Grid<Pmf> entries, Grid<double> means, Grid<double> shapes,
                     std::uint64_t seed, Time bin_width)
    : entries_(std::move(entries)),
      means_(std::move(means)),
      shapes_(std::move(shapes)),
      seed_(seed),
      bin_width_(bin_width) {
  if (entries_.rows() < 1 || entries_.cols() < 1) throw ValidationError("PET matrix is empty");
  if (means_.rows() != entries_.rows() || means_.cols() != entries_.cols() ||
      shapes_.rows() != entries_.rows() || shapes_.cols() != entries_.cols())
    throw ValidationError("PET mean/shape tables do not match the entry grid");
  cdfs_ = Grid<CdfTable>(entries_.rows(), entries_.cols());
  for (int t = 0; t < entries_.rows(); ++t) {
    for (int m = 0; m < entries_.cols(); ++m) {
      const Pmf& p = entries_(t, m);
      if (p.empty()) throw ValidationError(cell_name(t, m) + " is missing");
      if (!is_unit_mass(p))
        throw ValidationError(cell_name(t, m) + " has mass " + fmt_double(p.mass()) +
                              ", expected 1");
      if (p.min_time() < 0) throw ValidationError(cell_name(t, m) + " has negative times");
      cdfs_(t, m) = CdfTable(p);
    }
  }
}

double PetMatrix::type_mean(int task_type) const {
  double s = 0.0;
  for (int m = 0; m < machine_count(); ++m) s += means_(task_type, m);
  return s / machine_count();
}

double PetMatrix::grand_mean() const {
  double s = 0.0;
  for (int t = 0; t < task_type_count(); ++t) s += type_mean(t);
  return s / task_type_count();
}

Grid<double> synthetic_means(const PetGenConfig& cfg) {
  if (cfg.task_type_count < 1 || cfg.machine_count < 1)
    throw ConfigError("PET dimensions must be positive");
  if (!(cfg.mean_lo > 0.0) || cfg.mean_hi < cfg.mean_lo)
    throw ConfigError("mean range must be positive and ordered");
  Rng rng(cfg.seed ^ 0x6d65616e73ULL);
  std::uniform_real_distribution<double> pick(cfg.mean_lo, cfg.mean_hi);
  Grid<double> means(cfg.task_type_count, cfg.machine_count);
  for (int t = 0; t < cfg.task_type_count; ++t)
    for (int m = 0; m < cfg.machine_count; ++m) means(t, m) = pick(rng);
  return means;
}

PetMatrix generate_synthetic_pet(const Grid<double>& means, std::pair<double, double> shape_range,
                                 int samples_per_cell, Time bin_width, std::uint64_t seed) {
  const auto [lo, hi] = shape_range;
  if (lo < 1.0 || hi < lo) throw ConfigError("shape range must satisfy 1 <= lo <= hi");
  if (samples_per_cell < 2) throw ConfigError("samples_per_cell must be at least 2");
  if (bin_width < 1) throw ConfigError("bin_width must be at least 1");

  Rng rng(seed);
  std::uniform_real_distribution<double> pick_shape(lo, hi);
  Grid<Pmf> entries(means.rows(), means.cols());
  Grid<double> shapes(means.rows(), means.cols());
  std::vector<double> samples(static_cast<std::size_t>(samples_per_cell));
  for (int t = 0; t < means.rows(); ++t) {
    for (int m = 0; m < means.cols(); ++m) {
      const double mean = means(t, m);
      if (!(mean > 0.0))
        throw ConfigError("non-positive mean execution time at " + cell_name(t, m));
      const double shape = pick_shape(rng);
      std::gamma_distribution<double> gamma(shape, mean / shape);
      for (auto& s : samples) s = gamma(rng);
      entries(t, m) = Pmf::from_samples(samples, bin_width);
      shapes(t, m) = shape;
    }
  }
  return PetMatrix(std::move(entries), means, std::move(shapes), seed, bin_width);
}

PetMatrix generate_synthetic_pet(const PetGenConfig& cfg) {
  return generate_synthetic_pet(synthetic_means(cfg), {cfg.shape_lo, cfg.shape_hi},
                                cfg.samples_per_cell, cfg.bin_width, cfg.seed);
}

std::string serialize_pet(const PetMatrix& m) {
  std::ostringstream os;
  os << kPetMagic << ' ' << kPetVersion << '\n';
  os << "task_types " << m.task_type_count() << '\n';
  os << "machines " << m.machine_count() << '\n';
  os << "seed " << m.seed() << '\n';
  os << "bin_width " << m.bin_width() << '\n';
  for (int t = 0; t < m.task_type_count(); ++t) {
    os << "mean " << t;
    for (int j = 0; j < m.machine_count(); ++j) os << ' ' << fmt_double(m.mean(t, j));
    os << '\n';
  }
  for (int t = 0; t < m.task_type_count(); ++t) {
    os << "shape " << t;
    for (int j = 0; j < m.machine_count(); ++j) os << ' ' << fmt_double(m.shape(t, j));
    os << '\n';
  }
  for (int t = 0; t < m.task_type_count(); ++t) {
    for (int j = 0; j < m.machine_count(); ++j) {
      const Pmf& p = m.entry(t, j);
      os << "cell " << t << ' ' << j << ' ' << p.size();
      for (const auto& i : p.impulses()) os << ' ' << i.time << ':' << fmt_double(i.prob);
      os << '\n';
    }
  }
  os << "end\n";
  return os.str();
}

PetMatrix parse_pet(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  const auto fail = [&](const std::string& what) -> ParseError {
    return ParseError("PET line " + std::to_string(line_no) + ": " + what);
  };

  int types = -1;
  int machines = -1;
  std::uint64_t seed = 0;
  Time bin_width = 1;
  bool header = false;
  bool ended = false;
  Grid<Pmf> entries;
  Grid<double> means;
  Grid<double> shapes;
  std::vector<bool> have_mean;
  std::vector<bool> have_cell;

  const auto ensure_grids = [&] {
    if (types < 1 || machines < 1) throw fail("task_types and machines must precede data rows");
    if (entries.rows() == 0) {
      entries = Grid<Pmf>(types, machines);
      means = Grid<double>(types, machines);
      shapes = Grid<double>(types, machines);
      have_mean.assign(static_cast<std::size_t>(types), false);
      have_cell.assign(static_cast<std::size_t>(types * machines), false);
    }
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (!header) {
      int version = 0;
      if (key != kPetMagic || !(ls >> version)) throw fail("missing 'robusched-pet <version>' header");
      if (version != kPetVersion) throw fail("unsupported PET version " + std::to_string(version));
      header = true;
      continue;
    }
    if (ended) throw fail("content after 'end'");
    if (key == "task_types") {
      if (!(ls >> types) || types < 1) throw fail("bad task_types");
    } else if (key == "machines") {
      if (!(ls >> machines) || machines < 1) throw fail("bad machines");
    } else if (key == "seed") {
      if (!(ls >> seed)) throw fail("bad seed");
    } else if (key == "bin_width") {
      if (!(ls >> bin_width) || bin_width < 1) throw fail("bad bin_width");
    } else if (key == "mean" || key == "shape") {
      ensure_grids();
      int t = -1;
      if (!(ls >> t) || t < 0 || t >= types) throw fail("bad task type index in " + key + " row");
      for (int j = 0; j < machines; ++j) {
        std::string tok;
        double v = 0.0;
        if (!(ls >> tok) || !parse_number(tok, v)) throw fail("bad value in " + key + " row " + std::to_string(t));
        (key == "mean" ? means : shapes)(t, j) = v;
      }
      if (key == "mean") have_mean[static_cast<std::size_t>(t)] = true;
    } else if (key == "cell") {
      ensure_grids();
      int t = -1;
      int j = -1;
      std::size_t n = 0;
      if (!(ls >> t >> j) || t < 0 || t >= types || j < 0 || j >= machines)
        throw fail("bad cell index");
      if (!(ls >> n) || n == 0) throw fail(cell_name(t, j) + ": bad impulse count");
      std::vector<Impulse> imp;
      imp.reserve(n);
      for (std::size_t k = 0; k < n; ++k) {
        std::string tok;
        if (!(ls >> tok)) throw fail(cell_name(t, j) + ": expected " + std::to_string(n) + " impulses");
        const auto colon = tok.find(':');
        Impulse i{};
        if (colon == std::string::npos ||
            !parse_number(std::string_view(tok).substr(0, colon), i.time) ||
            !parse_number(std::string_view(tok).substr(colon + 1), i.prob))
          throw fail(cell_name(t, j) + ": malformed impulse '" + tok + "'");
        imp.push_back(i);
      }
      std::string extra;
      if (ls >> extra) throw fail(cell_name(t, j) + ": trailing data");
      try {
        entries(t, j) = Pmf::from_sorted(std::move(imp));
      } catch (const PmfError& e) {
        throw fail(cell_name(t, j) + ": " + e.what());
      }
      have_cell[static_cast<std::size_t>(t * machines + j)] = true;
    } else if (key == "end") {
      ended = true;
    } else {
      throw fail("unknown key '" + key + "'");
    }
  }
  if (!header) throw ParseError("PET file is empty");
  if (!ended) throw ParseError("PET file is truncated (missing 'end')");
  ensure_grids();
  for (int t = 0; t < types; ++t) {
    for (int j = 0; j < machines; ++j) {
      if (!have_cell[static_cast<std::size_t>(t * machines + j)])
        throw ValidationError(cell_name(t, j) + " is missing");
      if (!have_mean[static_cast<std::size_t>(t)]) means(t, j) = expected_value(entries(t, j));
    }
  }
  return PetMatrix(std::move(entries), std::move(means), std::move(shapes), seed, bin_width);
}

void save_pet(const PetMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << serialize_pet(m);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

PetMatrix load_pet(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_pet(ss.str());
}

Time sample_execution(const PetMatrix& m, int task_type, int machine, Rng& rng) {
  const Pmf& p = m.entry(task_type, machine);
  const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  double acc = 0.0;
  for (const auto& i : p.impulses()) {
    acc += i.prob;
    if (u < acc) return i.time;
  }
  return p.max_time();
}

Time sample_execution_gamma(const PetMatrix& m, int task_type, int machine, Rng& rng) {
  const double shape = m.shape(task_type, machine);
  if (!(shape > 0.0)) throw ConfigError("no gamma shape recorded for " + cell_name(task_type, machine));
  std::gamma_distribution<double> gamma(shape, m.mean(task_type, machine) / shape);
  return static_cast<Time>(std::llround(gamma(rng)));
}

}  // namespace robusched
