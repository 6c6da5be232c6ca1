#pragma once

// Bellman fixed point on the likelihood ratio, the adaptive policy it induces,
// and policy evaluation by the same grid recursion.
//
// rho(z) = min{ lambda0, lambda1 z, r(z) + min_theta D(z; theta) },
// r(z) = (1 - kappa) + kappa z, D(z; theta) = sum_{Q0(k) > 0} Q0(k) rho(z Q1(k)/Q0(k)).
// The optimal cost of the sequential test is rho(1).

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "seqquant/action_set.hpp"
#include "seqquant/models.hpp"
#include "seqquant/zgrid.hpp"

namespace seqquant {

struct DesignConfig {
  double lambda0 = 1.0;
  double lambda1 = 1.0;
  double kappa = 0.0;

  /// lambda0, lambda1 >= 0 (0 is accepted as a trivial case), kappa in [0, 1].
  void validate() const;
  double running_cost(double z) const noexcept { return (1.0 - kappa) + kappa * z; }
};

/// rho sampled on a z-grid, with solver metadata.
struct ValueFunction {
  ZGrid zgrid;
  DesignConfig design;
  std::vector<double> rho;
  int iterations = 0;
  /// Sweeps that rescanned theta (all of them under value iteration).
  int greedy_sweeps = 0;
  double sup_norm_residual = 0.0;
  /// Encoded minimizer of the last theta scan (see ActionSet::choice_width).
  std::vector<std::int32_t> greedy_choice;

  /// Linear interpolation in log z. Beyond the right edge rho = lambda0;
  /// beyond the left edge rho continues linearly through the origin in z.
  double at_log(double log_z) const;
  double at(double z) const;
  double cost() const { return rho[zgrid.zero_index()]; }
};

enum class SolverMode {
  /// Greedy theta scans interleaved with fixed-theta Bellman sweeps.
  ModifiedPolicyIteration,
  /// Every sweep rescans theta.
  ValueIteration,
};

struct SolverOptions {
  double tol = 1e-9;
  int max_iter = 100000;
  SolverMode mode = SolverMode::ModifiedPolicyIteration;
  int threads = 1;
  /// Optional encoded theta table (n_points * choice_width entries), e.g.
  /// ValueFunction::greedy_choice of a nearby design. Fixed-table sweeps from
  /// the initial upper bound come first; they stay above the fixed point, so
  /// the result and the monotonicity are unaffected, only the work shrinks.
  std::vector<std::int32_t> warm_choice;
  /// Called with every iterate, starting from the initial one (iteration 0).
  std::function<void(int iteration, std::span<const double> rho)> observer;
};

/// Iterates the Bellman operator from min{lambda0, lambda1 z} until the full
/// sup-norm residual is at most tol. Iterates never increase.
/// Throws NonConvergence with the residual history after max_iter sweeps.
ValueFunction solve_rho(const ActionSet& actions, const DesignConfig& design, const ZGrid& zgrid,
                        const SolverOptions& options = {});
ValueFunction solve_rho(const ObservationModel& model, const ThetaGrid& grid, const DesignConfig& design,
                        const ZGrid& zgrid, const SolverOptions& options = {});

/// Sup-norm distance between rho and one Bellman update of it.
double bellman_residual(const ActionSet& actions, const ValueFunction& vf, int threads = 1);

/// D(z; theta) for a value function and a pair of post-quantizer pmfs.
double d_rho(const ValueFunction& vf, double z, const Pmf& pmf0, const Pmf& pmf1);

/// Threshold rule with a quantizer lookup table over the continuation nodes.
struct Policy {
  ObservationModel model = ObservationModel::mean_shift(1.0);
  DesignConfig design;
  ZGrid zgrid;
  InputTransform transform = InputTransform::Identity;
  int K = 2;
  std::optional<ThetaGrid> theta_grid;

  /// Stop for H1 once log z >= log_A, for H0 once log z <= log_B.
  double log_A = 0.0;
  double log_B = 0.0;
  /// Grid nodes of the thresholds; nodes strictly between them continue.
  int index_A = 0;
  int index_B = 0;
  /// One quantizer per continuation node index_B + 1 .. index_A - 1.
  std::vector<QuantizerParams> eta;

  int first_continuation() const noexcept { return index_B + 1; }
  bool continues(int node) const noexcept { return node > index_B && node < index_A; }
  const QuantizerParams& eta_at(int node) const { return eta.at(node - first_continuation()); }
  /// Quantizer at the continuation node nearest to log_z.
  const QuantizerParams& lookup(double log_z) const;
};

/// Stopping preferred when within this margin of continuing.
inline constexpr double kStopMargin = 1e-9;

/// Thresholds and the greedy quantizer table of a converged value function.
/// Throws DegeneratePolicy when z = 1 is not a continuation point.
Policy extract_policy(const ValueFunction& vf, const ActionSet& actions, int threads = 1);
Policy extract_policy(const ValueFunction& vf, const ObservationModel& model, const ThetaGrid& grid,
                      int threads = 1);

struct OperatingCharacteristics {
  double alpha = 0.0;
  double beta = 0.0;
  double asn0 = 0.0;
  double asn1 = 0.0;
  double asn_kappa = 0.0;
};

struct EvaluationOptions {
  double tol = 1e-13;
  int max_iter = 10'000'000;
  /// Subdivide each grid step this many times. 1 reproduces the solver's own
  /// interpolation; larger values track a running test's lattice walk.
  int refine = 1;
  /// Keep doubling the subdivision up to this factor until two successive
  /// doublings move alpha, beta and both ASNs by at most refine_tol
  /// (relative). No doubling when max_refine <= refine.
  int max_refine = 1;
  double refine_tol = 1e-3;
};

/// Error probabilities and ASNs of a policy, from the linear recursions it
/// induces on the z-grid (same interpolation as solve_rho).
OperatingCharacteristics evaluate_policy(const Policy& policy, const EvaluationOptions& options = {});
/// Same table and thresholds, observations drawn from `model` instead.
OperatingCharacteristics evaluate_policy(const ObservationModel& model, const Policy& policy,
                                         const EvaluationOptions& options = {});

}  // namespace seqquant
