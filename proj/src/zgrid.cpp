#include "seqquant/zgrid.hpp"

#include <algorithm>
#include <cmath>

#include "seqquant/errors.hpp"

namespace seqquant {

ZGrid ZGrid::from_step(double step, int zero_index, int n_points) {
  if (n_points < kMinPoints) throw InvalidArgument("z-grid needs at least 201 points");
  if (!std::isfinite(step) || !(step > 0.0)) throw InvalidArgument("z-grid step must be positive");
  if (zero_index <= 0 || zero_index >= n_points - 1)
    throw InvalidArgument("z-grid must contain log z = 0 strictly inside its range");
  ZGrid g;
  g.step_ = step;
  g.zero_index_ = zero_index;
  g.n_points_ = n_points;
  return g;
}

ZGrid ZGrid::make(double log_z_min, double log_z_max, int n_points) {
  if (!(log_z_min < 0.0 && log_z_max > 0.0)) throw InvalidArgument("z-grid range must straddle log z = 0");
  if (n_points < kMinPoints) throw InvalidArgument("z-grid needs at least 201 points");
  const double step = (log_z_max - log_z_min) / (n_points - 1);
  const int zero = std::clamp(static_cast<int>(std::lround(-log_z_min / step)), 1, n_points - 2);
  return from_step(step, zero, n_points);
}

ZGrid ZGrid::around_wald_thresholds(double alpha, double beta, int n_points, double margin) {
  if (!(alpha > 0.0 && beta > 0.0 && alpha + beta < 1.0))
    throw InvalidArgument("Wald thresholds need alpha, beta > 0 and alpha + beta < 1");
  const double log_a = std::log((1.0 - beta) / alpha);
  const double log_b = std::log(beta / (1.0 - alpha));
  return make(log_b - margin, log_a + margin, n_points);
}

ZGrid ZGrid::for_costs(double lambda0, double lambda1, int n_points, double margin) {
  const double alpha = std::clamp(1.0 / lambda0, 1e-12, 0.25);
  const double beta = std::clamp(1.0 / lambda1, 1e-12, 0.25);
  return around_wald_thresholds(alpha, beta, n_points, margin);
}

int ZGrid::nearest(double log_z) const noexcept {
  const double u = std::round(log_z / step_) + zero_index_;
  if (!(u > 0.0)) return 0;
  if (u >= n_points_ - 1) return n_points_ - 1;
  return static_cast<int>(u);
}

}  // namespace seqquant
