#include "seqquant/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seqquant/errors.hpp"
#include "seqquant/normal.hpp"

namespace seqquant {

std::string to_string(ModelKind kind) {
  return kind == ModelKind::MeanShift ? "mean_shift" : "variance_shift";
}

std::string to_string(InputTransform transform) {
  return transform == InputTransform::Identity ? "identity" : "absolute_value";
}

ModelKind parse_model_kind(const std::string& text) {
  if (text == "mean_shift") return ModelKind::MeanShift;
  if (text == "variance_shift") return ModelKind::VarianceShift;
  throw InvalidArgument("unknown model kind '" + text + "' (expected mean_shift or variance_shift)");
}

InputTransform parse_transform(const std::string& text) {
  if (text == "identity") return InputTransform::Identity;
  if (text == "absolute_value" || text == "abs") return InputTransform::AbsoluteValue;
  throw InvalidArgument("unknown input transform '" + text + "'");
}

ObservationModel::ObservationModel(ModelKind kind, double mu, double sigma2)
    : kind_(kind), mu_(mu), sigma2_(sigma2) {
  snr_db_ = kind == ModelKind::MeanShift ? 20.0 * std::log10(std::abs(mu)) : 10.0 * std::log10(sigma2);
}

ObservationModel ObservationModel::mean_shift(double mu) {
  if (!std::isfinite(mu) || mu == 0.0)
    throw InvalidArgument("mean shift requires a finite mu != 0");
  return ObservationModel(ModelKind::MeanShift, mu, 0.0);
}

ObservationModel ObservationModel::variance_shift(double sigma2) {
  if (!std::isfinite(sigma2) || !(sigma2 > 0.0))
    throw InvalidArgument("variance shift requires a finite sigma2 > 0");
  return ObservationModel(ModelKind::VarianceShift, 0.0, sigma2);
}

ObservationModel ObservationModel::from_snr_db(ModelKind kind, double snr_db) {
  if (!std::isfinite(snr_db)) throw InvalidArgument("snr_db must be finite");
  if (kind == ModelKind::MeanShift) return mean_shift(std::pow(10.0, snr_db / 20.0));
  return variance_shift(std::pow(10.0, snr_db / 10.0));
}

ObservationModel make_model(ModelKind kind, double parameter) {
  return kind == ModelKind::MeanShift ? ObservationModel::mean_shift(parameter)
                                      : ObservationModel::variance_shift(parameter);
}

double ObservationModel::mean(Hypothesis h) const noexcept {
  return (kind_ == ModelKind::MeanShift && h == Hypothesis::H1) ? mu_ : 0.0;
}

double ObservationModel::stddev(Hypothesis h) const noexcept {
  return (kind_ == ModelKind::VarianceShift && h == Hypothesis::H1) ? std::sqrt(1.0 + sigma2_) : 1.0;
}

double ObservationModel::cell_mass(Hypothesis h, InputTransform transform, double lo, double hi) const {
  const double m = mean(h);
  const double s = stddev(h);
  if (transform == InputTransform::Identity) return normal::interval_mass((lo - m) / s, (hi - m) / s);

  // |X| lives on [0, inf): fold both half-lines.
  lo = std::max(lo, 0.0);
  if (!(lo < hi)) return 0.0;
  if (m == 0.0) return 2.0 * normal::interval_mass(lo / s, hi / s);
  return normal::interval_mass((lo - m) / s, (hi - m) / s) + normal::interval_mass((-hi - m) / s, (-lo - m) / s);
}

double ObservationModel::kl_divergence() const noexcept {
  if (kind_ == ModelKind::MeanShift) return 0.5 * mu_ * mu_;
  const double v = 1.0 + sigma2_;
  return 0.5 * (1.0 / v - 1.0 + std::log(v));
}

void QuantizerParams::validate() const {
  for (std::size_t k = 0; k < levels.size(); ++k) {
    if (!std::isfinite(levels[k])) throw InvalidArgument("quantizer levels must be finite");
    if (k > 0 && levels[k] < levels[k - 1]) throw InvalidArgument("quantizer levels must be nondecreasing");
  }
}

int quantize(const QuantizerParams& params, InputTransform transform, double x) {
  const double t = transform == InputTransform::AbsoluteValue ? std::abs(x) : x;
  const auto it = std::lower_bound(params.levels.begin(), params.levels.end(), t);
  return static_cast<int>(it - params.levels.begin()) + 1;
}

std::vector<int> Pmf::support() const {
  std::vector<int> out;
  for (int k = 0; k < K(); ++k)
    if (probs[k] > 0.0) out.push_back(k);
  return out;
}

Pmf post_quantizer_pmf(const ObservationModel& model, Hypothesis h, const QuantizerParams& params,
                       InputTransform transform) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  const int K = params.K();
  Pmf pmf;
  pmf.probs.resize(K);
  for (int k = 0; k < K; ++k) {
    const double lo = k == 0 ? -inf : params.levels[k - 1];
    const double hi = k == K - 1 ? inf : params.levels[k];
    pmf.probs[k] = model.cell_mass(h, transform, lo, hi);
  }
  return pmf;
}

void ThetaGrid::validate() const {
  if (!std::isfinite(theta_min) || !std::isfinite(theta_max) || !(theta_min < theta_max))
    throw InvalidArgument("theta grid requires finite theta_min < theta_max");
  if (!std::isfinite(step) || !(step > 0.0)) throw InvalidArgument("theta grid step must be > 0");
  // K = 1 (a single cell, Q0 = Q1) is accepted as a degenerate test case.
  if (K < 1) throw InvalidArgument("theta grid requires K >= 1");
  if (transform == InputTransform::AbsoluteValue && theta_min < 0.0)
    throw InvalidArgument("absolute-value quantizers require theta_min >= 0");
}

int ThetaGrid::num_points() const {
  return static_cast<int>(std::floor((theta_max - theta_min) / step + 1e-9)) + 1;
}

std::vector<double> ThetaGrid::points() const {
  const int n = num_points();
  std::vector<double> out(n);
  for (int j = 0; j < n; ++j) out[j] = theta_min + j * step;
  return out;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 result = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    result = result * (n - i) / (i + 1);
    if (result > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(result);
}

std::uint64_t ThetaGrid::candidate_count() const {
  const std::uint64_t g = static_cast<std::uint64_t>(num_points());
  return binomial(g + K - 2, K - 1);
}

CandidateSpace::CandidateSpace(int num_points, int num_levels) : num_points_(num_points), num_levels_(num_levels) {
  if (num_points < 1 || num_levels < 0) throw InvalidArgument("candidate space requires points >= 1, levels >= 0");
}

std::uint64_t CandidateSpace::count() const {
  if (num_levels_ == 0) return 1;
  return binomial(num_points_ + num_levels_ - 1, num_levels_);
}

std::uint64_t CandidateSpace::count_with_first(int first) const {
  if (num_levels_ == 0) return 0;
  return binomial(num_points_ - first + num_levels_ - 2, num_levels_ - 1);
}

void CandidateSpace::for_each_with_first(int first, const std::function<void(std::span<const int>)>& visit) const {
  if (num_levels_ == 0) return;
  std::vector<int> idx(num_levels_, first);
  const int last = num_points_ - 1;
  for (;;) {
    visit(idx);
    int pos = num_levels_ - 1;
    while (pos > 0 && idx[pos] == last) --pos;
    if (pos == 0) return;
    ++idx[pos];
    std::fill(idx.begin() + pos + 1, idx.end(), idx[pos]);
  }
}

void CandidateSpace::for_each(const std::function<void(std::span<const int>)>& visit) const {
  if (num_levels_ == 0) {
    visit({});
    return;
  }
  for (int first = 0; first < num_points_; ++first) for_each_with_first(first, visit);
}

void check_candidate_budget(const ThetaGrid& grid, std::uint64_t budget) {
  grid.validate();
  const std::uint64_t count = grid.candidate_count();
  if (count > budget)
    throw BudgetExceeded("theta grid has " + std::to_string(count) + " candidates, above the budget of " +
                         std::to_string(budget) + "; coarsen the step");
}

std::vector<QuantizerParams> enumerate_theta_grid(const ThetaGrid& grid, std::uint64_t budget) {
  check_candidate_budget(grid, budget);
  const auto pts = grid.points();
  std::vector<QuantizerParams> out;
  out.reserve(grid.candidate_count());
  CandidateSpace(grid.num_points(), grid.K - 1).for_each([&](std::span<const int> idx) {
    QuantizerParams p;
    p.levels.reserve(idx.size());
    for (int i : idx) p.levels.push_back(pts[i]);
    out.push_back(std::move(p));
  });
  return out;
}

}  // namespace seqquant
