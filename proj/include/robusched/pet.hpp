#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "robusched/pmf.hpp"

namespace robusched {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Rng = std::mt19937_64;

// Row-major task_type x machine grid.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, T init = T{})
      : rows_(rows), cols_(cols), cells_(static_cast<std::size_t>(rows * cols), init) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  T& operator()(int r, int c) { return cells_[index(r, c)]; }
  const T& operator()(int r, int c) const { return cells_[index(r, c)]; }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int r, int c) const {
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_) throw std::out_of_range("grid index");
    return static_cast<std::size_t>(r * cols_ + c);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> cells_;
};

struct PetGenConfig {
  int task_type_count = 12;
  int machine_count = 8;
  double mean_lo = 50.0;  // synthetic per-cell means drawn uniformly from [mean_lo, mean_hi]
  double mean_hi = 200.0;
  double shape_lo = 1.0;
  double shape_hi = 20.0;
  int samples_per_cell = 500;
  Time bin_width = 1;
  std::uint64_t seed = 42;
};

// Probabilistic execution time matrix: an execution-time Pmf for every
// (task type, machine) cell, plus the generating means and gamma shapes.
class PetMatrix {
 public:
  PetMatrix() = default;
  // Validates completeness and unit mass of every entry.
  PetMatrix(Grid<Pmf> entries, Grid<double> means, Grid<double> shapes, std::uint64_t seed,
            Time bin_width);

  int task_type_count() const { return entries_.rows(); }
  int machine_count() const { return entries_.cols(); }
  const Pmf& entry(int task_type, int machine) const { return entries_(task_type, machine); }
  const CdfTable& cdf(int task_type, int machine) const { return cdfs_(task_type, machine); }
  double mean(int task_type, int machine) const { return means_(task_type, machine); }
  double shape(int task_type, int machine) const { return shapes_(task_type, machine); }
  const Grid<double>& mean_table() const { return means_; }
  const Grid<double>& shape_table() const { return shapes_; }
  std::uint64_t seed() const { return seed_; }
  Time bin_width() const { return bin_width_; }

  // Mean execution time of a task type across machines.
  double type_mean(int task_type) const;
  // Mean over all cells.
  double grand_mean() const;

  friend bool operator==(const PetMatrix& a, const PetMatrix& b) {
    return a.entries_ == b.entries_ && a.means_ == b.means_ && a.shapes_ == b.shapes_ &&
           a.seed_ == b.seed_ && a.bin_width_ == b.bin_width_;
  }

 private:
  Grid<Pmf> entries_;
  Grid<CdfTable> cdfs_;
  Grid<double> means_;
  Grid<double> shapes_;
  std::uint64_t seed_ = 0;
  Time bin_width_ = 1;
};

// Per-cell means drawn uniformly from [cfg.mean_lo, cfg.mean_hi].
Grid<double> synthetic_means(const PetGenConfig& cfg);

PetMatrix generate_synthetic_pet(const Grid<double>& means, std::pair<double, double> shape_range,
                                 int samples_per_cell, Time bin_width, std::uint64_t seed);
PetMatrix generate_synthetic_pet(const PetGenConfig& cfg);

// Text format, see README ("PET file"). Round trip is bit-exact.
void save_pet(const PetMatrix& m, const std::filesystem::path& path);
PetMatrix load_pet(const std::filesystem::path& path);
std::string serialize_pet(const PetMatrix& m);
PetMatrix parse_pet(const std::string& text);

// Inverse-CDF draw from the cell's Pmf.
Time sample_execution(const PetMatrix& m, int task_type, int machine, Rng& rng);
// Draw from the generating gamma of the cell, rounded to the nearest unit.
Time sample_execution_gamma(const PetMatrix& m, int task_type, int machine, Rng& rng);

}  // namespace robusched
