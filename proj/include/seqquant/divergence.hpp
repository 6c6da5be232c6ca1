#pragma once

// Discrete KL / total-variation divergences between post-quantizer pmfs, the
// Bernoulli forms used by the ASN bounds, and their maxima over a theta grid.
// Natural logarithms throughout.

#include <cstdint>

#include "seqquant/models.hpp"

namespace seqquant {

/// sum_{k: P(k)>0} P(k) ln(P(k)/Q(k)); +inf when P is not absolutely
/// continuous with respect to Q.
double kl_pmf(const Pmf& p, const Pmf& q);

/// Half the L1 distance.
double tv_pmf(const Pmf& p, const Pmf& q);

/// KL from Bernoulli(p) to Bernoulli(1 - q), extended to the closed square:
/// D(0||q) = ln(1/q), D(1||q) = ln(1/(1-q)) for q in (0,1); D(p||0) = D(p||1) = inf
/// for p in (0,1); D(0||1) = D(1||0) = 0. The remaining corners are limits (inf).
double kl_bernoulli(double p, double q);

/// TV between Bernoulli(p) and Bernoulli(1 - q), i.e. 1 - p - q.
/// Throws InvalidArgument unless p + q < 1.
double tv_bernoulli(double p, double q);

struct DivergenceKind {
  enum class Kind { KL, TV };
  enum class Direction { ZeroToOne, OneToZero };

  Kind kind = Kind::KL;
  Direction direction = Direction::ZeroToOne;  // ignored for TV

  static DivergenceKind kl01() { return {Kind::KL, Direction::ZeroToOne}; }
  static DivergenceKind kl10() { return {Kind::KL, Direction::OneToZero}; }
  static DivergenceKind tv() { return {Kind::TV, Direction::ZeroToOne}; }
};

/// Divergence between Q0 and Q1 at a fixed quantizer.
double quantized_divergence(const ObservationModel& model, const QuantizerParams& params,
                            InputTransform transform, DivergenceKind kind);

struct MaxDivergenceResult {
  double value = 0.0;
  QuantizerParams argmax_theta;
};

struct ScanOptions {
  std::uint64_t budget = kDefaultCandidateBudget;
  int threads = 1;
};

/// Exhaustive maximum over every nondecreasing candidate; ties resolve to the
/// first candidate in lexicographic order. Throws BudgetExceeded.
MaxDivergenceResult max_divergence_over_grid(const ObservationModel& model, const ThetaGrid& grid,
                                             DivergenceKind kind, const ScanOptions& options = {});

}  // namespace seqquant
