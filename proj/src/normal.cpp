#include "seqquant/normal.hpp"

#include <cmath>
#include <numbers>

namespace seqquant::normal {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;
}

double pdf(double x) {
  return std::exp(-0.5 * x * x) * (0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
}

double cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double ccdf(double x) { return 0.5 * std::erfc(x * kInvSqrt2); }

double interval_mass(double lo, double hi) {
  if (!(lo < hi)) return 0.0;
  if (lo >= 0.0) return ccdf(lo) - ccdf(hi);
  if (hi <= 0.0) return cdf(hi) - cdf(lo);
  return 1.0 - (cdf(lo) + ccdf(hi));
}

double quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) return p <= 0.0 ? -INFINITY : INFINITY;
  // Bisection on the tail-accurate side; 200 halvings of [-40, 40] reach
  // machine resolution everywhere.
  const bool upper = p > 0.5;
  const double target = upper ? 1.0 - p : p;
  double lo = -40.0;
  double hi = 0.0;
  for (int it = 0; it < 200 && lo < hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (cdf(mid) < target)
      lo = mid;
    else
      hi = mid;
  }
  const double x = 0.5 * (lo + hi);
  return upper ? -x : x;
}

}  // namespace seqquant::normal
