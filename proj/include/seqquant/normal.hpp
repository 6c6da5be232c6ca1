#pragma once

// Standard normal distribution helpers. All tail-sensitive quantities are
// routed through erfc so that upper-tail masses keep full relative precision.

namespace seqquant::normal {

double pdf(double x);

/// Phi(x).
double cdf(double x);

/// 1 - Phi(x), accurate for large x.
double ccdf(double x);

/// P(lo < X <= hi) for X ~ N(0,1); either end may be infinite.
double interval_mass(double lo, double hi);

/// Inverse of Phi on (0, 1).
double quantile(double p);

}  // namespace seqquant::normal
