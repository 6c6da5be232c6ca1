#include "seqquant/divergence.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "seqquant/cells.hpp"
#include "seqquant/errors.hpp"
#include "seqquant/parallel.hpp"

namespace seqquant {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double kl_term(double p, double q) {
  if (!(p > 0.0)) return 0.0;
  if (!(q > 0.0)) return kInf;
  return p * std::log(p / q);
}

double cell_term(double q0, double q1, DivergenceKind kind) {
  if (kind.kind == DivergenceKind::Kind::TV) return std::abs(q0 - q1);
  return kind.direction == DivergenceKind::Direction::ZeroToOne ? kl_term(q0, q1) : kl_term(q1, q0);
}

double finish(double sum, DivergenceKind kind) { return kind.kind == DivergenceKind::Kind::TV ? 0.5 * sum : sum; }

}  // namespace

double kl_pmf(const Pmf& p, const Pmf& q) {
  if (p.K() != q.K()) throw InvalidArgument("kl_pmf: pmfs have different alphabets");
  double sum = 0.0;
  for (int k = 0; k < p.K(); ++k) sum += kl_term(p.probs[k], q.probs[k]);
  return sum;
}

double tv_pmf(const Pmf& p, const Pmf& q) {
  if (p.K() != q.K()) throw InvalidArgument("tv_pmf: pmfs have different alphabets");
  double sum = 0.0;
  for (int k = 0; k < p.K(); ++k) sum += std::abs(p.probs[k] - q.probs[k]);
  return 0.5 * sum;
}

double kl_bernoulli(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0))
    throw InvalidArgument("kl_bernoulli: arguments must lie in [0, 1]");
  // Bernoulli(p) against Bernoulli(1 - q): P = (p, 1-p), Q = (1-q, q).
  if ((p == 0.0 && q == 1.0) || (p == 1.0 && q == 0.0)) return 0.0;
  return kl_term(p, 1.0 - q) + kl_term(1.0 - p, q);
}

double tv_bernoulli(double p, double q) {
  if (!(p >= 0.0 && q >= 0.0 && p + q < 1.0))
    throw InvalidArgument("tv_bernoulli: requires p, q >= 0 and p + q < 1");
  return 1.0 - p - q;
}

double quantized_divergence(const ObservationModel& model, const QuantizerParams& params,
                            InputTransform transform, DivergenceKind kind) {
  const Pmf q0 = post_quantizer_pmf(model, Hypothesis::H0, params, transform);
  const Pmf q1 = post_quantizer_pmf(model, Hypothesis::H1, params, transform);
  if (kind.kind == DivergenceKind::Kind::TV) return tv_pmf(q0, q1);
  return kind.direction == DivergenceKind::Direction::ZeroToOne ? kl_pmf(q0, q1) : kl_pmf(q1, q0);
}

MaxDivergenceResult max_divergence_over_grid(const ObservationModel& model, const ThetaGrid& grid,
                                             DivergenceKind kind, const ScanOptions& options) {
  check_candidate_budget(grid, options.budget);
  const GridCells cells(model, grid);
  const int G = cells.num_points();
  const int levels = grid.K - 1;

  std::vector<double> term(cells.size());
  for (int lo = 0; lo < cells.extended_size(); ++lo)
    for (int hi = lo; hi < cells.extended_size(); ++hi)
      term[cells.index(lo, hi)] = cell_term(cells.q0(lo, hi), cells.q1(lo, hi), kind);

  if (levels == 0) return {finish(term[cells.index(0, G + 1)], kind), {}};

  struct Best {
    double value = -1.0;
    std::vector<int> indices;
  };
  std::vector<Best> per_first(G);
  const CandidateSpace space(G, levels);
  parallel_for(G, options.threads, [&](std::size_t first) {
    Best& best = per_first[first];
    std::vector<int> bounds(levels + 2);
    space.for_each_with_first(static_cast<int>(first), [&](std::span<const int> idx) {
      GridCells::boundaries(idx, G, bounds);
      double sum = 0.0;
      for (int k = 0; k <= levels; ++k) sum += term[cells.index(bounds[k], bounds[k + 1])];
      if (sum > best.value) {
        best.value = sum;
        best.indices.assign(idx.begin(), idx.end());
      }
    });
  });

  const Best* winner = &per_first[0];
  for (const Best& b : per_first)
    if (b.value > winner->value) winner = &b;

  MaxDivergenceResult result;
  result.value = finish(winner->value, kind);
  for (int i : winner->indices) result.argmax_theta.levels.push_back(cells.points()[i]);
  return result;
}

}  // namespace seqquant
