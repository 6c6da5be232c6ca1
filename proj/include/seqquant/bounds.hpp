#pragma once

// Lower bounds on the ASN and on the Bayes cost of quantized sequential tests.

#include <optional>

#include "seqquant/divergence.hpp"
#include "seqquant/dp.hpp"
#include "seqquant/models.hpp"

namespace seqquant {

/// (1-kappa) DKL(alpha||beta)/dkl_max_01 + kappa DKL(beta||alpha)/dkl_max_10.
/// A term whose denominator is +inf contributes nothing; a zero weight drops
/// its term entirely.
double asn_bound_kl(double alpha, double beta, double kappa, double dkl_max_01, double dkl_max_10);

/// (1 - alpha - beta)/dtv_max. Throws InvalidArgument unless alpha + beta < 1
/// and dtv_max lies in (0, 1].
double asn_bound_tv(double alpha, double beta, double dtv_max);

struct BayesBound {
  double bound = 0.0;
  double alpha_star = 0.0;
  double beta_star = 0.0;
};

/// min over (alpha, beta) in [0,1]^2 of asn_bound_kl(alpha, beta, kappa, ...)
/// + lambda0 alpha + lambda1 beta, a lower bound on the optimal cost rho(1).
BayesBound bayes_cost_bound(const DesignConfig& design, double dkl_max_01, double dkl_max_10);
BayesBound bayes_cost_bound(const ObservationModel& model, const ThetaGrid& grid, const DesignConfig& design,
                            const ScanOptions& scan = {});

struct BoundReport {
  double asn_kl = 0.0;
  double asn_tv = 0.0;
  MaxDivergenceResult kl01;
  MaxDivergenceResult kl10;
  MaxDivergenceResult tv;
  std::optional<BayesBound> bayes;
};

/// Maximum divergences over a grid, reusable across operating points.
struct GridDivergences {
  MaxDivergenceResult kl01;
  MaxDivergenceResult kl10;
  MaxDivergenceResult tv;
};

GridDivergences grid_divergences(const ObservationModel& model, const ThetaGrid& grid, const ScanOptions& scan = {});

/// Both ASN bounds at an operating point (the TV bound is 0 when alpha + beta >= 1).
BoundReport asn_bounds(const GridDivergences& div, double alpha, double beta, double kappa);

}  // namespace seqquant
