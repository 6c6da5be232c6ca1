#pragma once

// Fixed (non-adaptive) reference quantizers.

#include <string>

#include "seqquant/divergence.hpp"
#include "seqquant/dp.hpp"
#include "seqquant/models.hpp"

namespace seqquant {

enum class BaselineKind { Asymptotic, LloydMax, FixedUser };

std::string to_string(BaselineKind kind);
BaselineKind parse_baseline_kind(const std::string& text);

/// (1-kappa)/KL(Q0||Q1) + kappa/KL(Q1||Q0) at theta; +inf if a weighted
/// divergence vanishes. Terms with zero weight are dropped.
double asymptotic_objective(const ObservationModel& model, const QuantizerParams& theta, InputTransform transform,
                            double kappa);

struct AsymptoticTheta {
  QuantizerParams theta;
  double objective = 0.0;
};

/// Exhaustive minimizer of the asymptotic objective over the grid, first in
/// enumeration order on ties. Throws NoInformativeQuantizer if every
/// candidate has an infinite objective, BudgetExceeded for oversized grids.
AsymptoticTheta asymptotic_optimal(const ObservationModel& model, const ThetaGrid& grid, double kappa,
                                   const ScanOptions& scan = {});
QuantizerParams asymptotic_optimal_theta(const ObservationModel& model, const ThetaGrid& grid, double kappa,
                                         const ScanOptions& scan = {});

/// Minimum mean-squared-error quantizer for N(0,1) with K cells. Starts from
/// the quantiles k/K and alternates centroid and midpoint updates until no
/// level moves by tol. Throws NonConvergence after 10^4 iterations.
QuantizerParams lloyd_max(int K, double tol = 1e-12);

/// A policy that applies theta at every step, with thresholds from the
/// single-action Bellman equation at the same costs.
Policy fixed_quantizer_policy(const ObservationModel& model, const QuantizerParams& theta, InputTransform transform,
                              const DesignConfig& design, const ZGrid& zgrid, const SolverOptions& options = {});

}  // namespace seqquant
