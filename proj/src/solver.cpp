#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "seqquant/dp.hpp"
#include "seqquant/errors.hpp"
#include "seqquant/simd/kernels.hpp"

namespace seqquant {

namespace {

double sup_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

struct NodeTerms {
  std::vector<double> run;
  std::vector<double> stop_h0;
  std::vector<double> initial;
};

NodeTerms node_terms(const DesignConfig& design, const ZGrid& zgrid) {
  const int n = zgrid.n_points();
  NodeTerms t;
  t.run.resize(n);
  t.stop_h0.resize(n);
  t.initial.resize(n);
  for (int i = 0; i < n; ++i) {
    const double z = std::exp(zgrid.log_z(i));
    t.run[i] = design.running_cost(z);
    t.stop_h0[i] = design.lambda1 * z;
    t.initial[i] = t.stop_h0[i] < design.lambda0 ? t.stop_h0[i] : design.lambda0;
  }
  return t;
}

}  // namespace

void DesignConfig::validate() const {
  if (!std::isfinite(lambda0) || !std::isfinite(lambda1) || lambda0 < 0.0 || lambda1 < 0.0)
    throw InvalidArgument("error costs lambda0, lambda1 must be finite and nonnegative");
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw InvalidArgument("kappa must lie in [0, 1]");
}

double ValueFunction::at_log(double log_z) const {
  if (std::isnan(log_z)) throw InvalidArgument("value function queried at NaN");
  if (log_z == -std::numeric_limits<double>::infinity()) return 0.0;
  const int n = zgrid.n_points();
  const double u = log_z / zgrid.step() + zgrid.zero_index();
  if (u >= n) return design.lambda0;
  const double k = std::floor(u);
  const double fr = u - k;
  auto node = [&](double j) {
    if (j >= n) return design.lambda0;
    if (j < 0) return rho[0] * std::exp(j * zgrid.step());
    return rho[static_cast<std::size_t>(j)];
  };
  return (1.0 - fr) * node(k) + fr * node(k + 1);
}

double ValueFunction::at(double z) const {
  if (!(z >= 0.0)) throw InvalidArgument("value function needs z >= 0");
  return at_log(std::log(z));
}

double d_rho(const ValueFunction& vf, double z, const Pmf& pmf0, const Pmf& pmf1) {
  if (!(z > 0.0)) throw InvalidArgument("d_rho needs z > 0");
  if (pmf0.K() != pmf1.K()) throw InvalidArgument("d_rho: pmfs have different alphabets");
  double sum = 0.0;
  for (int k = pmf0.K() - 1; k >= 0; --k) {
    const double q0 = pmf0.probs[k];
    if (!(q0 > 0.0)) continue;
    sum = q0 * vf.at(z * pmf1.probs[k] / q0) + sum;
  }
  return sum;
}

ValueFunction solve_rho(const ActionSet& actions, const DesignConfig& design, const ZGrid& zgrid,
                        const SolverOptions& options) {
  design.validate();
  if (!(options.tol > 0.0)) throw InvalidArgument("solver tolerance must be positive");
  if (options.max_iter < 1) throw InvalidArgument("solver needs max_iter >= 1");

  const auto& kern = simd::active_kernels();
  const ContinuationOperator op(actions, zgrid);
  const int n = zgrid.n_points();
  const NodeTerms terms = node_terms(design, zgrid);
  const double inner_tol = options.tol * 1e-3;

  std::vector<double> rho = terms.initial;
  std::vector<double> next(n), cont(n), ext;
  std::vector<std::int32_t> choice(static_cast<std::size_t>(n) * actions.choice_width());
  std::vector<double> residuals;
  if (options.observer) options.observer(0, rho);

  auto sweep = [&](bool greedy) {
    op.pad_value_function(rho, design.lambda0, ext);
    if (greedy)
      op.minimize(ext, cont, choice, options.threads);
    else
      op.apply(ext, choice, cont);
    kern.bellman(next.data(), terms.run.data(), cont.data(), terms.stop_h0.data(), design.lambda0, n);
    return sup_distance(rho, next);
  };

  int iter = 0;
  int greedy = 0;
  auto fixed_sweeps = [&] {
    while (iter < options.max_iter) {
      const double delta = sweep(false);
      rho.swap(next);
      ++iter;
      if (options.observer) options.observer(iter, rho);
      if (delta <= inner_tol) break;
    }
  };
  if (!options.warm_choice.empty()) {
    if (options.warm_choice.size() != choice.size()) throw InvalidArgument("warm-start table has the wrong size");
    choice = options.warm_choice;
    fixed_sweeps();
  }
  for (;;) {
    const double residual = sweep(true);
    ++greedy;
    residuals.push_back(residual);
    if (residual <= options.tol) {
      ValueFunction vf;
      vf.zgrid = zgrid;
      vf.design = design;
      vf.rho = std::move(rho);
      vf.iterations = iter;
      vf.greedy_sweeps = greedy;
      vf.greedy_choice = std::move(choice);
      vf.sup_norm_residual = residual;
      return vf;
    }
    if (iter >= options.max_iter)
      throw NonConvergence("Bellman iteration did not reach tolerance within " + std::to_string(options.max_iter) +
                               " sweeps",
                           std::move(residuals));
    rho.swap(next);
    ++iter;
    if (options.observer) options.observer(iter, rho);

    if (options.mode == SolverMode::ModifiedPolicyIteration) fixed_sweeps();
  }
}

ValueFunction solve_rho(const ObservationModel& model, const ThetaGrid& grid, const DesignConfig& design,
                        const ZGrid& zgrid, const SolverOptions& options) {
  return solve_rho(ActionSet::from_grid(model, grid), design, zgrid, options);
}

double bellman_residual(const ActionSet& actions, const ValueFunction& vf, int threads) {
  const auto& kern = simd::active_kernels();
  const ContinuationOperator op(actions, vf.zgrid);
  const int n = vf.zgrid.n_points();
  const NodeTerms terms = node_terms(vf.design, vf.zgrid);
  std::vector<double> ext, cont(n), next(n);
  std::vector<std::int32_t> choice(static_cast<std::size_t>(n) * actions.choice_width());
  op.pad_value_function(vf.rho, vf.design.lambda0, ext);
  op.minimize(ext, cont, choice, threads);
  kern.bellman(next.data(), terms.run.data(), cont.data(), terms.stop_h0.data(), vf.design.lambda0, n);
  return sup_distance(vf.rho, next);
}

}  // namespace seqquant
