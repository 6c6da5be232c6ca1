#pragma once

namespace seqquant {

/// Uniform grid in log z with a node exactly at log z = 0.
///
/// Stored as (step, zero_index, n_points) so that node positions are exact
/// multiples of the step and survive serialization bit for bit.
class ZGrid {
 public:
  ZGrid() = default;

  /// Grid spanning roughly [log_z_min, log_z_max]; the span is shifted by less
  /// than half a step so a node lands on log z = 0.
  static ZGrid make(double log_z_min, double log_z_max, int n_points);
  static ZGrid from_step(double step, int zero_index, int n_points);

  /// Default grid from Wald's approximations A = (1-beta)/alpha and
  /// B = beta/(1-alpha), padded by `margin` on both sides in log z.
  static ZGrid around_wald_thresholds(double alpha, double beta, int n_points = 2001, double margin = 5.0);

  /// Default grid for a Bayesian design where error targets are unknown:
  /// uses alpha ~ 1/lambda0 and beta ~ 1/lambda1 (clamped) as Wald guesses.
  static ZGrid for_costs(double lambda0, double lambda1, int n_points = 2001, double margin = 5.0);

  double step() const noexcept { return step_; }
  int zero_index() const noexcept { return zero_index_; }
  int n_points() const noexcept { return n_points_; }
  double log_z(int i) const noexcept { return (i - zero_index_) * step_; }
  double log_z_min() const noexcept { return log_z(0); }
  double log_z_max() const noexcept { return log_z(n_points_ - 1); }

  /// Index of the node nearest to log_z, clamped to the grid.
  int nearest(double log_z) const noexcept;

  static constexpr int kMinPoints = 201;

  bool operator==(const ZGrid&) const = default;

 private:
  double step_ = 0.0;
  int zero_index_ = 0;
  int n_points_ = 0;
};

}  // namespace seqquant
