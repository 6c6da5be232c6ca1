#pragma once

// Scenario configuration, read from YAML. Every key except the model, grid,
// and design blocks has a default; see scenarios/*.yaml for the schema.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "seqquant/baselines.hpp"
#include "seqquant/calibrate.hpp"
#include "seqquant/dp.hpp"
#include "seqquant/models.hpp"
#include "seqquant/simulate.hpp"

namespace seqquant {

enum class DesignMode { Bayesian, NeymanPearson };

std::string to_string(DesignMode mode);

struct ErrorTarget {
  double alpha = 0.1;
  double beta = 0.1;
};

/// One operating point of a scenario: either error targets (lambda found by
/// calibration) or fixed error costs.
struct OperatingPoint {
  std::optional<ErrorTarget> target;
  DesignConfig design;  // costs; filled by calibration for targets
  double L = 0.0;       // Bayesian total cost, 0 when costs were given directly
  std::string label;
};

struct ZGridSpec {
  int n_points = 2001;
  double margin = 5.0;
  /// Explicit range overrides the Wald-based default.
  std::optional<double> log_z_min;
  std::optional<double> log_z_max;

  ZGrid make_for(const OperatingPoint& point) const;
};

struct ScenarioConfig {
  std::string name = "scenario";
  ObservationModel model = ObservationModel::mean_shift(1.0);
  ThetaGrid grid;  // grid.K is replaced by each entry of K_values
  std::vector<int> K_values;
  DesignMode mode = DesignMode::NeymanPearson;
  double kappa = 0.0;
  std::vector<ErrorTarget> targets;    // Neyman-Pearson
  std::vector<double> L_values;        // Bayesian: lambda0 = (1-kappa) L, lambda1 = kappa L
  std::optional<double> lambda0;       // Bayesian with explicit costs
  std::optional<double> lambda1;
  std::vector<double> sweep_L;         // Bayes bound against L
  int sweep_K = 0;
  std::vector<BaselineKind> baselines{BaselineKind::Asymptotic, BaselineKind::LloydMax};
  std::vector<QuantizerParams> fixed_user;
  ZGridSpec zgrid;
  double solver_tol = 1e-9;
  int solver_max_iter = 100000;
  SolverMode solver_mode = SolverMode::ModifiedPolicyIteration;
  double calibration_rel_tol = 0.02;
  int calibration_max_outer = 40;
  int calibration_max_evaluations = 200;
  EvaluationOptions evaluation{1e-13, 10'000'000, 16, 1024, 1e-3};
  double lloyd_max_tol = 1e-12;
  SimulationSpec simulation;
  bool simulate = true;
  std::uint64_t candidate_budget = kDefaultCandidateBudget;
  std::string out_dir = "out";
  int threads = 1;

  /// Throws InvalidArgument describing the first problem found.
  void validate() const;
  ThetaGrid grid_for(int K) const;
  std::vector<OperatingPoint> operating_points() const;
  SolverOptions solver_options() const;
  CalibrationOptions calibration_options() const;
  EvaluationOptions evaluation_options() const { return evaluation; }
};

ScenarioConfig parse_config(const std::string& yaml_text);
ScenarioConfig load_config(const std::string& path);

}  // namespace seqquant
