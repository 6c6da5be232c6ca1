#pragma once

// End-to-end scenario runs: optimal designs, fixed baselines, bounds,
// policy evaluation and Monte Carlo, plus the files they are written to.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "seqquant/bounds.hpp"
#include "seqquant/config.hpp"
#include "seqquant/simulate.hpp"

namespace seqquant {

struct RunOptions {
  /// Progress lines; silent when empty.
  std::function<void(const std::string&)> log;
  /// Write table.csv, bounds_vs_L.csv, report.txt, policies and levels.
  bool write_files = true;
};

/// One design at one operating point and one K.
struct DesignRow {
  int K = 0;
  /// "optimal", "asymptotic", "lloyd_max" or "fixed_<n>" (1-based).
  std::string design;
  std::string point;
  std::optional<ErrorTarget> target;
  double L = 0.0;
  DesignConfig costs;
  /// Fixed designs only.
  std::optional<QuantizerParams> theta;
  /// rho(1) of the design's own Bellman equation.
  double cost = 0.0;
  OperatingCharacteristics oc;
  /// Targets only: ASN_kappa rescaled to the target error probabilities, see
  /// normalized_asn.
  std::optional<double> asn_normalized;
  /// ASN bounds at the achieved (alpha, beta), with divergence maxima taken
  /// over the grid plus the design's own quantizer.
  double kl_bound = 0.0;
  double tv_bound = 0.0;
  /// Targets only: max relative deviation of alpha and beta from the targets.
  std::optional<double> calibration_error;
  bool calibrated = true;
  int evaluations = 0;
  std::optional<TestRunStats> mc_h0;
  std::optional<TestRunStats> mc_h1;
  Policy policy;
};

struct SweepRow {
  double L = 0.0;
  BayesBound bayes;
  double achieved_cost = 0.0;
  /// rho(1) of the asymptotic fixed quantizer at the same costs.
  std::optional<double> fixed_cost;
};

struct KSummary {
  int K = 0;
  std::uint64_t candidates = 0;
  GridDivergences divergences;
  std::optional<AsymptoticTheta> asymptotic;
  std::optional<QuantizerParams> lloyd_max;
};

struct ScenarioReport {
  std::string name;
  std::vector<KSummary> per_K;
  std::vector<DesignRow> rows;
  std::vector<SweepRow> sweep;
  /// Calibration misses and failed sub-steps, in the order they happened.
  std::vector<std::string> issues;
  /// Some sub-step failed outright (a calibration miss does not count).
  bool failed = false;
};

/// Wald-type rescaling of an ASN to the target error probabilities:
/// (1-kappa) asn0 DKL(a_t||b_t)/DKL(a||b) + kappa asn1 DKL(b_t||a_t)/DKL(b||a).
/// First-order removal of the calibration residual when comparing designs.
double normalized_asn(const OperatingCharacteristics& oc, const ErrorTarget& target, double kappa);

KSummary summarize_grid(const ScenarioConfig& config, int K, const RunOptions& run = {});

/// Calibrated (targets) or fixed-cost optimal design. A calibration miss keeps
/// the best iterate with calibrated = false.
DesignRow design_optimal(const ScenarioConfig& config, int K, const OperatingPoint& point,
                         const RunOptions& run = {});
DesignRow design_fixed(const ScenarioConfig& config, int K, const std::string& name, const QuantizerParams& theta,
                       const OperatingPoint& point, const RunOptions& run = {});

/// Fills kl_bound and tv_bound.
void attach_bounds(DesignRow& row, const ScenarioConfig& config, const GridDivergences& grid_div);
/// Fills mc_h0 and mc_h1 from the configured simulation spec.
void attach_simulation(DesignRow& row, const ScenarioConfig& config);

std::vector<SweepRow> bayes_sweep(const ScenarioConfig& config, const GridDivergences& grid_div,
                                  const std::optional<QuantizerParams>& fixed, const RunOptions& run = {});

/// design -> baselines -> bounds -> evaluation -> simulation for every K and
/// operating point, then the Bayes bound sweep. Deterministic for a config.
ScenarioReport run_scenario(const ScenarioConfig& config, const RunOptions& run = {});

/// The work run_scenario would do, without computing anything.
std::string plan_scenario(const ScenarioConfig& config);

std::string row_stem(const DesignRow& row);

void write_table_csv(std::ostream& out, const std::vector<DesignRow>& rows);
void write_bounds_vs_L_csv(std::ostream& out, const std::vector<SweepRow>& sweep);
void write_report(std::ostream& out, const ScenarioReport& report);
/// table.csv, bounds_vs_L.csv (if swept), report.txt, one policy file per
/// row, levels CSVs for optimal rows and overlay CSVs for fixed rows.
void write_outputs(const std::filesystem::path& dir, const ScenarioReport& report);

}  // namespace seqquant
