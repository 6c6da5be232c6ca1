#include "seqquant/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "seqquant/errors.hpp"

namespace seqquant {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = 1e-12;

double weight(double w, double denominator) {
  if (w == 0.0 || denominator == kInf) return 0.0;
  return w / denominator;
}

// f(p, q) = w0 DKL(p||q) + w1 DKL(q||p) + l0 p + l1 q on the open unit square.
struct Objective {
  double w0, w1, l0, l1;

  double value(double p, double q) const {
    double v = l0 * p + l1 * q;
    if (w0 != 0.0) v += w0 * kl_bernoulli(p, q);
    if (w1 != 0.0) v += w1 * kl_bernoulli(q, p);
    return v;
  }
  double dp(double p, double q) const {
    return w0 * std::log(p * q / ((1.0 - p) * (1.0 - q))) + w1 * (q / (1.0 - p) - (1.0 - q) / p) + l0;
  }
  double dq(double p, double q) const {
    return w0 * (p / (1.0 - q) - (1.0 - p) / q) + w1 * std::log(p * q / ((1.0 - p) * (1.0 - q))) + l1;
  }
  void hessian(double p, double q, double& hpp, double& hpq, double& hqq) const {
    hpp = w0 * (1.0 / p + 1.0 / (1.0 - p)) + w1 * (q / ((1.0 - p) * (1.0 - p)) + (1.0 - q) / (p * p));
    hpq = w0 / (q * (1.0 - q)) + w1 / (p * (1.0 - p));
    hqq = w0 * (p / ((1.0 - q) * (1.0 - q)) + (1.0 - p) / (q * q)) + w1 * (1.0 / q + 1.0 / (1.0 - q));
  }
};

// Root of a nondecreasing function on [lo, hi], or the end where it cannot cross.
template <class F>
double monotone_root(F&& f, double lo, double hi) {
  if (f(lo) >= 0.0) return lo;
  if (f(hi) <= 0.0) return hi;
  for (int i = 0; i < 200 && hi - lo > 1e-16 * std::max(1.0, hi); ++i) {
    // Geometric midpoints resolve optima that sit many decades below 1.
    const double mid = lo > 0.0 && hi / lo > 4.0 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Optimal error rates can sit hundreds of decades below 1 when one cost is
// huge; the geometric midpoints reach them in a few dozen steps.
constexpr double kTiny = 1e-300;

BayesBound nested_bisection(const Objective& f) {
  auto best_q = [&](double p) { return monotone_root([&](double q) { return f.dq(p, q); }, kTiny, 1.0 - kEps); };
  const double p = monotone_root([&](double x) { return f.dp(x, best_q(x)); }, kTiny, 1.0 - kEps);
  const double q = best_q(p);
  return {f.value(p, q), p, q};
}

bool damped_newton(const Objective& f, BayesBound& out) {
  double p = std::clamp(1.0 / (1.0 + f.l0), 1e-6, 0.5);
  double q = std::clamp(1.0 / (1.0 + f.l1), 1e-6, 0.5);
  double v = f.value(p, q);
  for (int iter = 0; iter < 200; ++iter) {
    const double gp = f.dp(p, q), gq = f.dq(p, q);
    double hpp, hpq, hqq;
    f.hessian(p, q, hpp, hpq, hqq);
    const double det = hpp * hqq - hpq * hpq;
    if (!(hpp > 0.0 && det > 0.0)) return false;
    const double sp = -(hqq * gp - hpq * gq) / det;
    const double sq = -(hpp * gq - hpq * gp) / det;
    const double decrement = -(gp * sp + gq * sq);
    if (!(decrement >= 0.0)) return false;
    if (decrement < 1e-22 * std::max(1.0, std::abs(v))) break;
    // Stay strictly inside the square, then backtrack on the value.
    double t = 1.0;
    auto inside = [](double x) { return x > kEps && x < 1.0 - kEps; };
    while (t > 1e-12 && !(inside(p + t * sp) && inside(q + t * sq))) t *= 0.5;
    if (!(inside(p + t * sp) && inside(q + t * sq))) return false;
    double nv = f.value(p + t * sp, q + t * sq);
    while (t > 1e-12 && !(nv <= v - 1e-4 * t * decrement)) {
      t *= 0.5;
      nv = f.value(p + t * sp, q + t * sq);
    }
    if (t <= 1e-12) return false;
    p += t * sp;
    q += t * sq;
    if (std::abs(v - nv) <= 1e-15 * std::max(1.0, std::abs(v)) && t == 1.0) {
      v = nv;
      break;
    }
    v = nv;
    if (iter == 199) return false;
  }
  // A minimizer pinned at the clamp is a boundary solution; leave it to bisection.
  if (p <= 2 * kEps || q <= 2 * kEps || p >= 1.0 - 2 * kEps || q >= 1.0 - 2 * kEps) return false;
  out = {v, p, q};
  return true;
}

}  // namespace

double asn_bound_kl(double alpha, double beta, double kappa, double dkl_max_01, double dkl_max_10) {
  if (!(alpha >= 0.0 && alpha <= 1.0 && beta >= 0.0 && beta <= 1.0))
    throw InvalidArgument("asn_bound_kl: error probabilities must lie in [0, 1]");
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw InvalidArgument("asn_bound_kl: kappa must lie in [0, 1]");
  if (!(dkl_max_01 > 0.0) || !(dkl_max_10 > 0.0))
    throw InvalidArgument("asn_bound_kl: divergence maxima must be positive");
  double bound = 0.0;
  if (const double w = weight(1.0 - kappa, dkl_max_01); w != 0.0) bound += w * kl_bernoulli(alpha, beta);
  if (const double w = weight(kappa, dkl_max_10); w != 0.0) bound += w * kl_bernoulli(beta, alpha);
  return bound;
}

double asn_bound_tv(double alpha, double beta, double dtv_max) {
  if (!(dtv_max > 0.0 && dtv_max <= 1.0)) throw InvalidArgument("asn_bound_tv: dtv_max must lie in (0, 1]");
  return tv_bernoulli(alpha, beta) / dtv_max;
}

BayesBound bayes_cost_bound(const DesignConfig& design, double dkl_max_01, double dkl_max_10) {
  design.validate();
  if (!(dkl_max_01 > 0.0) || !(dkl_max_10 > 0.0))
    throw InvalidArgument("bayes_cost_bound: divergence maxima must be positive");
  const Objective f{weight(1.0 - design.kappa, dkl_max_01), weight(design.kappa, dkl_max_10), design.lambda0,
                    design.lambda1};
  if (f.w0 == 0.0 && f.w1 == 0.0) return {0.0, 0.0, 0.0};
  BayesBound result;
  if (!damped_newton(f, result)) result = nested_bisection(f);
  // On the boundary only the two "decide without data" corners are finite.
  if (design.lambda0 < result.bound) result = {design.lambda0, 1.0, 0.0};
  if (design.lambda1 < result.bound) result = {design.lambda1, 0.0, 1.0};
  return result;
}

BayesBound bayes_cost_bound(const ObservationModel& model, const ThetaGrid& grid, const DesignConfig& design,
                            const ScanOptions& scan) {
  const double d01 = max_divergence_over_grid(model, grid, DivergenceKind::kl01(), scan).value;
  const double d10 = max_divergence_over_grid(model, grid, DivergenceKind::kl10(), scan).value;
  return bayes_cost_bound(design, d01, d10);
}

GridDivergences grid_divergences(const ObservationModel& model, const ThetaGrid& grid, const ScanOptions& scan) {
  return {max_divergence_over_grid(model, grid, DivergenceKind::kl01(), scan),
          max_divergence_over_grid(model, grid, DivergenceKind::kl10(), scan),
          max_divergence_over_grid(model, grid, DivergenceKind::tv(), scan)};
}

BoundReport asn_bounds(const GridDivergences& div, double alpha, double beta, double kappa) {
  BoundReport r;
  r.kl01 = div.kl01;
  r.kl10 = div.kl10;
  r.tv = div.tv;
  r.asn_kl = asn_bound_kl(alpha, beta, kappa, div.kl01.value, div.kl10.value);
  r.asn_tv = alpha + beta < 1.0 ? asn_bound_tv(alpha, beta, div.tv.value) : 0.0;
  return r;
}

}  // namespace seqquant
