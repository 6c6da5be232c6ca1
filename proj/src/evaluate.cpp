#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "seqquant/dp.hpp"
#include "seqquant/errors.hpp"

namespace seqquant {

namespace {

// One padded table per functional; stop and pad entries never change.
struct Table {
  std::vector<double> v;
  double scale() const {
    double m = 1.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
};

}  // namespace

namespace {

// With Q0 as the background measure:
//   a(z)  = P0(accept H1 | z),           a = 1 above A, 0 below B
//   bt(z) = z * P1(accept H0 | z),       bt = z below B, 0 above A
//   n0(z) = 1 + sum Q0 n0(z l)           (ASN under H0)
//   nt(z) = z + sum Q0 nt(z l)           (z times the ASN under H1)
// bt and nt follow from the H1 recursions by the change of measure Q1 = l Q0,
// which keeps rho = (1-kappa) n0 + kappa nt + lambda0 a + lambda1 bt exact.
OperatingCharacteristics evaluate_at(const ObservationModel& model, const Policy& policy,
                                     const EvaluationOptions& options, int r) {
  const ZGrid& coarse = policy.zgrid;
  // A policy that stops at z = 1 decides without sampling.
  if (coarse.zero_index() >= policy.index_A) return {1.0, 0.0, 0.0, 0.0, 0.0};
  if (coarse.zero_index() <= policy.index_B) return {0.0, 1.0, 0.0, 0.0, 0.0};
  if (static_cast<int>(policy.eta.size()) != policy.index_A - policy.index_B - 1)
    throw InvalidArgument("policy table does not cover its continuation region");

  // The recursions run on a grid r times finer than the policy's; nodes take
  // the quantizer of the nearest policy node, as a running test does.
  const ZGrid zgrid =
      ZGrid::from_step(coarse.step() / r, coarse.zero_index() * r, (coarse.n_points() - 1) * r + 1);
  const int n = zgrid.n_points();
  const int index_A = policy.index_A * r;
  const int index_B = policy.index_B * r;

  const int K = policy.K;
  const int first = index_B + 1;
  const int count = index_A - first;

  // Shifts per continuation node, computed once per distinct quantizer.
  std::map<std::vector<double>, std::vector<CellShift>> cache;
  std::vector<const std::vector<CellShift>*> node_shifts(count);
  int lo = 0, hi = 0;
  for (int c = 0; c < count; ++c) {
    const int node = std::clamp(coarse.nearest(zgrid.log_z(first + c)), policy.first_continuation(),
                                policy.index_A - 1);
    const QuantizerParams& theta = policy.eta_at(node);
    auto [it, inserted] = cache.try_emplace(theta.levels);
    if (inserted) {
      const Pmf p0 = post_quantizer_pmf(model, Hypothesis::H0, theta, policy.transform);
      const Pmf p1 = post_quantizer_pmf(model, Hypothesis::H1, theta, policy.transform);
      for (int k = 0; k < K; ++k) it->second.push_back(make_cell_shift(p0.probs[k], p1.probs[k], zgrid.step(), n));
    }
    for (const CellShift& s : it->second) {
      if (!s.active()) continue;
      lo = std::min(lo, s.offset);
      hi = std::max(hi, s.offset);
    }
    node_shifts[c] = &it->second;
  }
  const int pad_left = -lo + 2;
  const int pad_right = hi + 2;
  const std::size_t size = static_cast<std::size_t>(pad_left) + n + pad_right;

  Table a, bt, n0, nt;
  for (Table* t : {&a, &bt, &n0, &nt}) t->v.assign(size, 0.0);
  // Right of A (including the pad) accepts H1; left of B accepts H0.
  std::fill(a.v.begin() + pad_left + index_A, a.v.end(), 1.0);
  for (int k = -pad_left; k <= index_B; ++k) bt.v[pad_left + k] = std::exp(zgrid.log_z(k));

  std::vector<double> z(count);
  for (int c = 0; c < count; ++c) z[c] = std::exp(zgrid.log_z(first + c));

  std::vector<double> history;
  for (int sweep = 0;; ++sweep) {
    double da = 0.0, db = 0.0, dn0 = 0.0, dnt = 0.0;
    for (int c = 0; c < count; ++c) {
      const std::size_t at = static_cast<std::size_t>(pad_left) + first + c;
      double sa = 0.0, sb = 0.0, s0 = 0.0, s1 = 0.0;
      const std::vector<CellShift>& shifts = *node_shifts[c];
      for (int k = K - 1; k >= 0; --k) {
        const CellShift& s = shifts[k];
        const std::size_t j = at + s.offset;
        sa = (s.w0 * a.v[j] + s.w1 * a.v[j + 1]) + sa;
        sb = (s.w0 * bt.v[j] + s.w1 * bt.v[j + 1]) + sb;
        s0 = (s.w0 * n0.v[j] + s.w1 * n0.v[j + 1]) + s0;
        s1 = (s.w0 * nt.v[j] + s.w1 * nt.v[j + 1]) + s1;
      }
      s0 = 1.0 + s0;
      s1 = z[c] + s1;
      da = std::max(da, std::abs(sa - a.v[at]));
      db = std::max(db, std::abs(sb - bt.v[at]));
      dn0 = std::max(dn0, std::abs(s0 - n0.v[at]));
      dnt = std::max(dnt, std::abs(s1 - nt.v[at]));
      a.v[at] = sa;
      bt.v[at] = sb;
      n0.v[at] = s0;
      nt.v[at] = s1;
    }
    const double worst = std::max({da / a.scale(), db / bt.scale(), dn0 / n0.scale(), dnt / nt.scale()});
    if (sweep % 64 == 0) history.push_back(worst);
    if (worst <= options.tol) break;
    if (sweep + 1 >= options.max_iter)
      throw NonConvergence("policy evaluation did not converge within " + std::to_string(options.max_iter) +
                               " sweeps",
                           std::move(history));
  }

  const std::size_t one = static_cast<std::size_t>(pad_left) + zgrid.zero_index();
  OperatingCharacteristics oc;
  oc.alpha = a.v[one];
  oc.beta = bt.v[one];
  oc.asn0 = n0.v[one];
  oc.asn1 = nt.v[one];
  oc.asn_kappa = (1.0 - policy.design.kappa) * oc.asn0 + policy.design.kappa * oc.asn1;
  return oc;
}

double relative_change(const OperatingCharacteristics& a, const OperatingCharacteristics& b) {
  auto rel = [](double x, double y) { return x == y ? 0.0 : std::abs(x - y) / std::max(std::abs(x), std::abs(y)); };
  return std::max({rel(a.alpha, b.alpha), rel(a.beta, b.beta), rel(a.asn0, b.asn0), rel(a.asn1, b.asn1)});
}

}  // namespace

OperatingCharacteristics evaluate_policy(const ObservationModel& model, const Policy& policy,
                                         const EvaluationOptions& options) {
  if (options.refine < 1) throw InvalidArgument("evaluation refinement must be >= 1");
  if (options.max_refine > 1 << 16) throw InvalidArgument("evaluation max_refine must be <= 65536");
  OperatingCharacteristics oc = evaluate_at(model, policy, options, options.refine);
  // A fixed quantizer walks a lattice in log z, and the result only settles
  // once the grid resolves the lattice point closest to a threshold. The
  // answer can repeat once by coincidence, so two quiet doublings are needed.
  int quiet = 0;
  for (int r = 2 * options.refine; r <= options.max_refine && quiet < 2; r *= 2) {
    const OperatingCharacteristics next = evaluate_at(model, policy, options, r);
    quiet = relative_change(oc, next) <= options.refine_tol ? quiet + 1 : 0;
    oc = next;
  }
  return oc;
}

OperatingCharacteristics evaluate_policy(const Policy& policy, const EvaluationOptions& options) {
  return evaluate_policy(policy.model, policy, options);
}

}  // namespace seqquant
