#include "seqquant/cells.hpp"

#include <limits>

namespace seqquant {

GridCells::GridCells(const ObservationModel& model, const ThetaGrid& grid)
    : num_points_(grid.num_points()), points_(grid.points()) {
  grid.validate();
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int E = extended_size();
  const std::size_t total = static_cast<std::size_t>(E) * (E + 1) / 2;
  q0_.resize(total);
  q1_.resize(total);
  auto bound = [&](int e) { return e == 0 ? -inf : (e == E - 1 ? inf : points_[e - 1]); };
  for (int lo = 0; lo < E; ++lo) {
    for (int hi = lo; hi < E; ++hi) {
      const std::size_t at = index(lo, hi);
      if (hi == lo) {
        q0_[at] = q1_[at] = 0.0;
        continue;
      }
      q0_[at] = model.cell_mass(Hypothesis::H0, grid.transform, bound(lo), bound(hi));
      q1_[at] = model.cell_mass(Hypothesis::H1, grid.transform, bound(lo), bound(hi));
    }
  }
}

void GridCells::boundaries(std::span<const int> level_indices, int num_points, std::span<int> out) {
  out[0] = 0;
  for (std::size_t k = 0; k < level_indices.size(); ++k) out[k + 1] = level_indices[k] + 1;
  out[level_indices.size() + 1] = num_points + 1;
}

}  // namespace seqquant
