#pragma once

// Post-quantizer masses of every interval cell a grid quantizer can produce.
//
// Cells are addressed by extended point indices: 0 stands for -inf, 1..G for
// the grid points, G + 1 for +inf. A quantizer with level indices
// i_1 <= ... <= i_{K-1} uses the cells (0, i_1+1), (i_1+1, i_2+1), ...,
// (i_{K-1}+1, G+1). Cells with equal ends are empty.

#include <cstddef>
#include <span>
#include <vector>

#include "seqquant/models.hpp"

namespace seqquant {

class GridCells {
 public:
  GridCells(const ObservationModel& model, const ThetaGrid& grid);

  int num_points() const noexcept { return num_points_; }
  int extended_size() const noexcept { return num_points_ + 2; }
  const std::vector<double>& points() const noexcept { return points_; }

  /// Flat index of the cell (lo, hi] between extended indices lo <= hi.
  std::size_t index(int lo, int hi) const noexcept {
    return static_cast<std::size_t>(lo) * extended_size() - static_cast<std::size_t>(lo) * (lo - 1) / 2 + (hi - lo);
  }
  std::size_t size() const noexcept { return q0_.size(); }

  double q0(int lo, int hi) const noexcept { return q0_[index(lo, hi)]; }
  double q1(int lo, int hi) const noexcept { return q1_[index(lo, hi)]; }

  /// Extended indices of the K+1 cell boundaries of a level-index tuple.
  static void boundaries(std::span<const int> level_indices, int num_points, std::span<int> out);

 private:
  int num_points_;
  std::vector<double> points_;
  std::vector<double> q0_;
  std::vector<double> q1_;
};

}  // namespace seqquant
