#pragma once

#include <vector>

#include "robusched/pet.hpp"

namespace fixture {

using robusched::Grid;
using robusched::PetMatrix;
using robusched::Pmf;
using robusched::Time;

// PET whose cells are the given Pmfs (rows = task types).
inline PetMatrix pet_of(const std::vector<std::vector<Pmf>>& cells) {
  const int rows = static_cast<int>(cells.size());
  const int cols = static_cast<int>(cells.front().size());
  Grid<Pmf> e(rows, cols);
  Grid<double> means(rows, cols), shapes(rows, cols, 1.0);
  for (int t = 0; t < rows; ++t)
    for (int m = 0; m < cols; ++m) {
      e(t, m) = cells[static_cast<std::size_t>(t)][static_cast<std::size_t>(m)];
      means(t, m) = robusched::expected_value(e(t, m));
    }
  return PetMatrix(std::move(e), std::move(means), std::move(shapes), 0, 1);
}

// Deterministic PET: every cell a point mass.
inline PetMatrix point_pet(const std::vector<std::vector<Time>>& times) {
  std::vector<std::vector<Pmf>> cells;
  for (const auto& row : times) {
    cells.emplace_back();
    for (Time t : row) cells.back().push_back(Pmf::point(t));
  }
  return pet_of(cells);
}

}  // namespace fixture
