#include <cmath>

#include "seqquant/dp.hpp"
#include "seqquant/errors.hpp"

namespace seqquant {

const QuantizerParams& Policy::lookup(double log_z) const {
  if (eta.empty()) throw DegeneratePolicy("policy has no continuation region");
  int node = zgrid.nearest(log_z);
  if (node < first_continuation()) node = first_continuation();
  if (node >= index_A) node = index_A - 1;
  return eta_at(node);
}

Policy extract_policy(const ValueFunction& vf, const ActionSet& actions, int threads) {
  const ZGrid& zgrid = vf.zgrid;
  const DesignConfig& design = vf.design;
  const int n = zgrid.n_points();
  const int width = actions.choice_width();

  const ContinuationOperator op(actions, zgrid);
  std::vector<double> ext, cont(n);
  std::vector<std::int32_t> choice(static_cast<std::size_t>(n) * width);
  op.pad_value_function(vf.rho, design.lambda0, ext);
  op.minimize(ext, cont, choice, threads);

  int index_A = n;
  int index_B = -1;
  for (int i = 0; i < n; ++i) {
    const double z = std::exp(zgrid.log_z(i));
    const double go = design.running_cost(z) + cont[i];
    const double stop_h0 = design.lambda1 * z;
    const double stop_h1 = design.lambda0;
    const bool h1 = stop_h1 <= stop_h0 && stop_h1 <= go + kStopMargin;
    const bool h0 = stop_h0 < stop_h1 && stop_h0 <= go + kStopMargin;
    if (h1 && index_A == n) index_A = i;
    if (h0) index_B = i;
  }
  const int zero = zgrid.zero_index();
  if (!(index_B < zero && zero < index_A))
    throw DegeneratePolicy("stopping at z = 1 is optimal; there is no continuation region (increase lambda)");

  Policy policy;
  policy.model = actions.model();
  policy.design = design;
  policy.zgrid = zgrid;
  policy.transform = actions.transform();
  policy.K = actions.K();
  policy.theta_grid = actions.theta_grid();
  policy.index_A = index_A;
  policy.index_B = index_B;
  policy.log_A = zgrid.log_z(index_A);
  policy.log_B = zgrid.log_z(index_B);
  for (int i = index_B + 1; i < index_A; ++i)
    policy.eta.push_back(actions.params(std::span(choice).subspan(static_cast<std::size_t>(i) * width, width)));
  return policy;
}

Policy extract_policy(const ValueFunction& vf, const ObservationModel& model, const ThetaGrid& grid, int threads) {
  return extract_policy(vf, ActionSet::from_grid(model, grid), threads);
}

}  // namespace seqquant
