#pragma once

// Hypothesis-pair models, the interval quantizer, and post-quantizer pmfs.
//
// Symbols are reported 1-based (1..K) by quantize(); Pmf stores them 0-based.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace seqquant {

enum class ModelKind { MeanShift, VarianceShift };
enum class Hypothesis { H0, H1 };
enum class InputTransform { Identity, AbsoluteValue };

std::string to_string(ModelKind kind);
std::string to_string(InputTransform transform);
ModelKind parse_model_kind(const std::string& text);
InputTransform parse_transform(const std::string& text);

/// P0 = N(0,1) against either P1 = N(mu,1) or P1 = N(0, 1 + sigma2).
class ObservationModel {
 public:
  static ObservationModel mean_shift(double mu);
  static ObservationModel variance_shift(double sigma2);
  /// 0 dB maps to mu = 1 (mean shift) and sigma2 = 1 (variance shift).
  /// A mean shift built from an SNR is always the positive root.
  static ObservationModel from_snr_db(ModelKind kind, double snr_db);

  ModelKind kind() const noexcept { return kind_; }
  double mu() const noexcept { return mu_; }
  double sigma2() const noexcept { return sigma2_; }
  double snr_db() const noexcept { return snr_db_; }

  double mean(Hypothesis h) const noexcept;
  double stddev(Hypothesis h) const noexcept;

  /// P(lo < t(X) <= hi) under hypothesis h; lo may be -inf and hi +inf.
  double cell_mass(Hypothesis h, InputTransform transform, double lo, double hi) const;

  /// KL(P0 || P1) of the unquantized pair, in nats.
  double kl_divergence() const noexcept;

  bool operator==(const ObservationModel&) const = default;

 private:
  ObservationModel(ModelKind kind, double mu, double sigma2);

  ModelKind kind_ = ModelKind::MeanShift;
  double mu_ = 0.0;
  double sigma2_ = 0.0;
  double snr_db_ = 0.0;
};

/// Parameter of a model kind: the mean (MeanShift) or variance increment.
ObservationModel make_model(ModelKind kind, double parameter);

/// Nondecreasing levels theta_1 <= ... <= theta_{K-1}; K = levels.size() + 1.
struct QuantizerParams {
  std::vector<double> levels;

  int K() const noexcept { return static_cast<int>(levels.size()) + 1; }
  /// Throws InvalidArgument unless the levels are finite and nondecreasing.
  void validate() const;

  bool operator==(const QuantizerParams&) const = default;
};

/// Interval quantizer: 1 if t(x) <= theta_1, k if theta_{k-1} < t(x) <= theta_k,
/// K if t(x) > theta_{K-1}.
int quantize(const QuantizerParams& params, InputTransform transform, double x);

struct Pmf {
  std::vector<double> probs;

  int K() const noexcept { return static_cast<int>(probs.size()); }
  /// 0-based symbols with positive mass.
  std::vector<int> support() const;
};

Pmf post_quantizer_pmf(const ObservationModel& model, Hypothesis h,
                       const QuantizerParams& params, InputTransform transform);

inline constexpr std::uint64_t kDefaultCandidateBudget = 5'000'000;

/// Finite search grid Theta: every level is theta_min + j*h <= theta_max.
struct ThetaGrid {
  double theta_min = 0.0;
  double theta_max = 0.0;
  double step = 0.0;
  int K = 2;
  InputTransform transform = InputTransform::Identity;

  void validate() const;
  std::vector<double> points() const;
  int num_points() const;
  /// C(G + K - 2, K - 1), saturating at UINT64_MAX.
  std::uint64_t candidate_count() const;
};

/// Lexicographic enumeration of nondecreasing index tuples over a grid.
///
/// Visitors receive the K-1 grid indices of each candidate. Enumeration can be
/// restricted to a fixed first index so callers can partition the work.
class CandidateSpace {
 public:
  CandidateSpace(int num_points, int num_levels);

  std::uint64_t count() const;
  std::uint64_t count_with_first(int first) const;
  int num_points() const noexcept { return num_points_; }
  int num_levels() const noexcept { return num_levels_; }

  void for_each(const std::function<void(std::span<const int>)>& visit) const;
  void for_each_with_first(int first, const std::function<void(std::span<const int>)>& visit) const;

 private:
  int num_points_;
  int num_levels_;
};

/// All nondecreasing (K-1)-vectors over the grid, lexicographically ordered.
/// Throws BudgetExceeded when the candidate count exceeds `budget`.
std::vector<QuantizerParams> enumerate_theta_grid(const ThetaGrid& grid,
                                                  std::uint64_t budget = kDefaultCandidateBudget);

/// Throws BudgetExceeded if the grid cannot be scanned exhaustively.
void check_candidate_budget(const ThetaGrid& grid, std::uint64_t budget);

std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

}  // namespace seqquant
