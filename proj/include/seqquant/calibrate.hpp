#pragma once

// Error costs (lambda0, lambda1) that make the optimal test meet target error
// probabilities.

#include <functional>
#include <string>

#include "seqquant/action_set.hpp"
#include "seqquant/dp.hpp"
#include "seqquant/errors.hpp"

namespace seqquant {

struct CalibrationOptions {
  /// Accept when |alpha - alpha_target| <= rel_tol * alpha_target, same for beta.
  double rel_tol = 0.02;
  int max_outer = 40;
  int max_inner = 40;
  /// Cap on designs solved during the final local search.
  int max_evaluations = 200;
  /// Starting costs; 0 picks 1/target.
  double lambda0_init = 0.0;
  double lambda1_init = 0.0;
  SolverOptions solver;
  EvaluationOptions evaluation;
  /// Receives one line per design evaluated.
  std::function<void(const std::string&)> trace;
};

struct CalibrationResult {
  DesignConfig design;
  OperatingCharacteristics achieved;
  Policy policy;
  double cost = 0.0;  // rho(1)
  int evaluations = 0;
  /// max(|alpha/alpha_target - 1|, |beta/beta_target - 1|)
  double relative_error = 0.0;
};

class CalibrationFailure : public NumericalError {
 public:
  CalibrationFailure(const std::string& what, CalibrationResult best)
      : NumericalError(what), best_(std::move(best)) {}
  const CalibrationResult& best() const noexcept { return best_; }

 private:
  CalibrationResult best_;
};

/// First a common scale search on log lambda with the ratio held, then
/// alternating bracketed searches on log lambda0 (driving alpha) and
/// log lambda1 (driving beta); both error probabilities decrease as their
/// cost grows. The extracted policy only changes at discrete lambda values,
/// so the error rates are piecewise constant; once the alternation stalls on
/// a jump, a pattern search over nearby (lambda0, lambda1) looks for a closer
/// policy. Throws CalibrationFailure with the best iterate when no design
/// meets the tolerance.
CalibrationResult calibrate_lambda(const ActionSet& actions, double kappa, double alpha_target, double beta_target,
                                   const ZGrid& zgrid, const CalibrationOptions& options = {});
CalibrationResult calibrate_lambda(const ObservationModel& model, const ThetaGrid& grid, double kappa,
                                   double alpha_target, double beta_target, const ZGrid& zgrid,
                                   const CalibrationOptions& options = {});

}  // namespace seqquant
