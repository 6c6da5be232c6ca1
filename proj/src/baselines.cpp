#include "seqquant/baselines.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "seqquant/cells.hpp"
#include "seqquant/errors.hpp"
#include "seqquant/normal.hpp"
#include "seqquant/parallel.hpp"

namespace seqquant {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double kl_sum(const double* p, const double* q, int K) {
  double sum = 0.0;
  for (int k = 0; k < K; ++k) {
    if (!(p[k] > 0.0)) continue;
    if (!(q[k] > 0.0)) return kInf;
    sum += p[k] * std::log(p[k] / q[k]);
  }
  return sum;
}

double objective_from(double kl01, double kl10, double kappa) {
  double v = 0.0;
  if (kappa != 1.0) v += kl01 > 0.0 ? (1.0 - kappa) / kl01 : kInf;
  if (kappa != 0.0) v += kl10 > 0.0 ? kappa / kl10 : kInf;
  return v;
}

}  // namespace

std::string to_string(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::Asymptotic: return "asymptotic";
    case BaselineKind::LloydMax: return "lloyd_max";
    case BaselineKind::FixedUser: return "fixed";
  }
  return "?";
}

BaselineKind parse_baseline_kind(const std::string& text) {
  if (text == "asymptotic") return BaselineKind::Asymptotic;
  if (text == "lloyd_max" || text == "lloyd-max") return BaselineKind::LloydMax;
  if (text == "fixed") return BaselineKind::FixedUser;
  throw InvalidArgument("unknown baseline kind '" + text + "'");
}

double asymptotic_objective(const ObservationModel& model, const QuantizerParams& theta, InputTransform transform,
                            double kappa) {
  const Pmf q0 = post_quantizer_pmf(model, Hypothesis::H0, theta, transform);
  const Pmf q1 = post_quantizer_pmf(model, Hypothesis::H1, theta, transform);
  return objective_from(kl_pmf(q0, q1), kl_pmf(q1, q0), kappa);
}

AsymptoticTheta asymptotic_optimal(const ObservationModel& model, const ThetaGrid& grid, double kappa,
                                   const ScanOptions& scan) {
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw InvalidArgument("kappa must lie in [0, 1]");
  check_candidate_budget(grid, scan.budget);
  const GridCells cells(model, grid);
  const int G = cells.num_points();
  const int levels = grid.K - 1;
  if (levels == 0) throw NoInformativeQuantizer("a single-cell quantizer carries no information");

  struct Best {
    double value = kInf;
    std::vector<int> indices;
  };
  std::vector<Best> per_first(G);
  const CandidateSpace space(G, levels);
  parallel_for(G, scan.threads, [&](std::size_t first) {
    Best& best = per_first[first];
    std::vector<int> bounds(levels + 2);
    std::vector<double> q0(levels + 1), q1(levels + 1);
    space.for_each_with_first(static_cast<int>(first), [&](std::span<const int> idx) {
      GridCells::boundaries(idx, G, bounds);
      for (int k = 0; k <= levels; ++k) {
        q0[k] = cells.q0(bounds[k], bounds[k + 1]);
        q1[k] = cells.q1(bounds[k], bounds[k + 1]);
      }
      const double v = objective_from(kl_sum(q0.data(), q1.data(), levels + 1),
                                      kl_sum(q1.data(), q0.data(), levels + 1), kappa);
      if (v < best.value) {
        best.value = v;
        best.indices.assign(idx.begin(), idx.end());
      }
    });
  });

  const Best* winner = nullptr;
  for (const Best& b : per_first)
    if (b.value < kInf && (winner == nullptr || b.value < winner->value)) winner = &b;
  if (winner == nullptr) throw NoInformativeQuantizer("no grid quantizer has finite asymptotic cost");

  AsymptoticTheta out;
  out.objective = winner->value;
  for (int i : winner->indices) out.theta.levels.push_back(cells.points()[i]);
  return out;
}

QuantizerParams asymptotic_optimal_theta(const ObservationModel& model, const ThetaGrid& grid, double kappa,
                                         const ScanOptions& scan) {
  return asymptotic_optimal(model, grid, kappa, scan).theta;
}

QuantizerParams lloyd_max(int K, double tol) {
  if (K < 2) throw InvalidArgument("lloyd_max needs K >= 2");
  if (!(tol > 0.0)) throw InvalidArgument("lloyd_max tolerance must be positive");
  std::vector<double> levels(K - 1);
  for (int k = 1; k < K; ++k) levels[k - 1] = normal::quantile(static_cast<double>(k) / K);

  std::vector<double> centroid(K);
  std::vector<double> history;
  constexpr int kMaxIter = 10000;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    for (int k = 0; k < K; ++k) {
      const double a = k == 0 ? -kInf : levels[k - 1];
      const double b = k == K - 1 ? kInf : levels[k];
      // E[X | a < X <= b] for X ~ N(0,1).
      centroid[k] = (normal::pdf(a) - normal::pdf(b)) / normal::interval_mass(a, b);
    }
    double moved = 0.0;
    for (int k = 0; k < K - 1; ++k) {
      const double next = 0.5 * (centroid[k] + centroid[k + 1]);
      moved = std::max(moved, std::abs(next - levels[k]));
      levels[k] = next;
    }
    history.push_back(moved);
    if (moved < tol) return {levels};
  }
  throw NonConvergence("Lloyd-Max iteration did not converge", std::move(history));
}

Policy fixed_quantizer_policy(const ObservationModel& model, const QuantizerParams& theta, InputTransform transform,
                              const DesignConfig& design, const ZGrid& zgrid, const SolverOptions& options) {
  const ActionSet single = ActionSet::from_list(model, {theta}, transform);
  const ValueFunction vf = solve_rho(single, design, zgrid, options);
  return extract_policy(vf, single, options.threads);
}

}  // namespace seqquant
