#pragma once

// The finite action set Theta and the continuation part of the Bellman
// operator, min over theta of sum_k Q0(k) rho(z * Q1(k)/Q0(k)), on a z-grid.
//
// Values live in a padded table: node i of the grid sits at pad_left() + i,
// entries to the left continue rho linearly through the origin in z, entries
// to the right hold the saturated value. Each cell (q0, q1) becomes a fixed
// integer shift plus two blend weights, so one cell contributes
// w0 * ext[pad_left + i + j] + w1 * ext[pad_left + i + j + 1] at node i.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "seqquant/cells.hpp"
#include "seqquant/models.hpp"
#include "seqquant/zgrid.hpp"

namespace seqquant {

/// Integer part and blend weights of a log-likelihood shift ln(q1/q0).
/// Cells with q0 = 0 or q1 = 0 contribute nothing (zero weights).
struct CellShift {
  double w0 = 0.0;
  double w1 = 0.0;
  int offset = 0;

  bool active() const noexcept { return w0 != 0.0 || w1 != 0.0; }
};

/// Shift of one cell on a grid with the given step; offsets at or beyond
/// `max_offset` are saturated (they only read the right padding).
CellShift make_cell_shift(double q0, double q1, double step, int max_offset);

/// Either every nondecreasing level vector over a ThetaGrid, or an explicit
/// list of quantizers. An action is encoded as choice_width() integers: grid
/// level indices in grid mode, the list position in list mode.
class ActionSet {
 public:
  static ActionSet from_grid(const ObservationModel& model, const ThetaGrid& grid);
  static ActionSet from_list(const ObservationModel& model, std::vector<QuantizerParams> candidates,
                             InputTransform transform);

  const ObservationModel& model() const noexcept { return model_; }
  InputTransform transform() const noexcept { return transform_; }
  int K() const noexcept { return K_; }
  bool is_grid() const noexcept { return grid_.has_value(); }
  const std::optional<ThetaGrid>& theta_grid() const noexcept { return grid_; }
  const GridCells* cells() const noexcept { return cells_.get(); }
  const std::vector<QuantizerParams>& candidates() const noexcept { return candidates_; }

  int choice_width() const noexcept { return is_grid() ? K_ - 1 : 1; }
  QuantizerParams params(std::span<const std::int32_t> choice) const;

  /// Post-quantizer masses of every symbol of an action, in symbol order.
  void masses(std::span<const std::int32_t> choice, std::span<double> q0, std::span<double> q1) const;

 private:
  ActionSet(const ObservationModel& model, InputTransform transform, int K);

  ObservationModel model_;
  InputTransform transform_;
  int K_;
  std::optional<ThetaGrid> grid_;
  std::shared_ptr<const GridCells> cells_;
  std::vector<QuantizerParams> candidates_;
  std::vector<double> list_q0_;
  std::vector<double> list_q1_;
};

/// Continuation operator of an action set on a z-grid.
class ContinuationOperator {
 public:
  ContinuationOperator(const ActionSet& actions, const ZGrid& zgrid);

  const ActionSet& actions() const noexcept { return actions_; }
  const ZGrid& zgrid() const noexcept { return zgrid_; }
  int n() const noexcept { return zgrid_.n_points(); }
  int pad_left() const noexcept { return pad_left_; }
  int pad_right() const noexcept { return pad_right_; }
  std::size_t table_size() const noexcept { return static_cast<std::size_t>(pad_left_) + n() + pad_right_; }

  /// Padded table of a value function: left entries rho[0] * exp(k * step)
  /// for k < 0, right entries `right_value`.
  void pad_value_function(std::span<const double> rho, double right_value, std::vector<double>& ext) const;

  /// Greedy step: cont[i] = min over actions, choice[i * width ...] = the
  /// lexicographically first minimizer. Bit-identical for any thread count.
  void minimize(std::span<const double> ext, std::span<double> cont, std::span<std::int32_t> choice,
                int threads = 1) const;

  /// cont[i] = contribution of the action stored for node i, summed in the
  /// same order as minimize() so both agree bit for bit.
  void apply(std::span<const double> ext, std::span<const std::int32_t> choice, std::span<double> cont) const;

  /// Shifts of the K symbols of an action (inactive cells have zero weights).
  void shifts(std::span<const std::int32_t> choice, std::span<CellShift> out) const;

 private:
  void minimize_grid_chunk(const double* ext, int begin, int len, double* cont, std::int32_t* choice) const;
  void minimize_list_chunk(const double* ext, int begin, int len, double* cont, std::int32_t* choice) const;
  double term(const double* ext, const CellShift& s, int node) const noexcept {
    const double* p = ext + pad_left_ + s.offset + node;
    return s.w0 * p[0] + s.w1 * p[1];
  }

  ActionSet actions_;
  ZGrid zgrid_;
  std::vector<CellShift> shifts_;  // grid: by GridCells index; list: candidate * K + symbol
  std::vector<double> left_scale_;  // exp(-k * step), k = 1..pad_left
  int pad_left_ = 0;
  int pad_right_ = 0;
  int chunk_ = 256;
};

}  // namespace seqquant
