// Acceptance run: both shipped scenarios end to end, then one PASS/FAIL line
// per criterion with the measured numbers above it.
//
//   acceptance <scenario dir> [output dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "seqquant/baselines.hpp"
#include "seqquant/bounds.hpp"
#include "seqquant/config.hpp"
#include "seqquant/errors.hpp"
#include "seqquant/rng.hpp"
#include "seqquant/scenario.hpp"
#include "seqquant/simulate.hpp"

using namespace seqquant;

namespace {

int failures = 0;

void verdict(bool ok, const std::string& name) {
  std::printf("%s  %s\n", ok ? "PASS" : "FAIL", name.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <class... Args>
void detail(const char* format, Args... args) {
  std::printf("      ");
  std::printf(format, args...);
  std::printf("\n");
}

const DesignRow* find_row(const ScenarioReport& r, int K, double target, const std::string& design) {
  for (const DesignRow& row : r.rows)
    if (row.K == K && row.design == design && row.target && row.target->alpha == target) return &row;
  return nullptr;
}

const DesignRow* find_bayes_row(const ScenarioReport& r, int K, const std::string& design) {
  for (const DesignRow& row : r.rows)
    if (row.K == K && row.design == design && !row.target) return &row;
  return nullptr;
}

double norm_asn(const DesignRow* row) { return row ? row->asn_normalized.value_or(NAN) : NAN; }

ScenarioReport run(const std::filesystem::path& file, const std::filesystem::path& out, double& seconds) {
  ScenarioConfig config = load_config(file.string());
  config.out_dir = (out / config.name).string();
  RunOptions opt;
  opt.log = [](const std::string& line) { std::fprintf(stderr, "  %s\n", line.c_str()); };
  const auto t0 = std::chrono::steady_clock::now();
  ScenarioReport report = run_scenario(config, opt);
  seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

// ---------------------------------------------------------------------------
// Mean-shift comparison table.

void table_criteria(const ScenarioReport& ms, double seconds) {
  std::printf("\nmean shift, SNR 0 dB (normalized ASN0 / raw ASN0 / alpha / beta)\n");
  for (double t : {0.1, 0.01})
    for (int K : {2, 3, 4})
      for (const char* d : {"optimal", "asymptotic", "lloyd_max"})
        if (const DesignRow* row = find_row(ms, K, t, d))
          detail("target %-4g K=%d %-10s %8.4f  %8.4f  %.5f  %.5f%s", t, K, d, norm_asn(row), row->oc.asn0,
                 row->oc.alpha, row->oc.beta, row->calibrated ? "" : "  (calibration off tolerance)");

  {
    bool ok = !ms.failed;
    for (double t : {0.1, 0.01}) {
      const double a2 = norm_asn(find_row(ms, 2, t, "optimal")), a3 = norm_asn(find_row(ms, 3, t, "optimal")),
                   a4 = norm_asn(find_row(ms, 4, t, "optimal"));
      const double g23 = 100.0 * (a2 - a3) / a2, g34 = 100.0 * (a3 - a4) / a3;
      detail("target %g: K 2->3 improves %.2f%% (20 +- 5), K 3->4 improves %.2f%% (8 +- 5)", t, g23, g34);
      ok = ok && std::abs(g23 - 20.0) <= 5.0 && std::abs(g34 - 8.0) <= 5.0;
    }
    detail("full K sweep took %.1f min (target < 30)", seconds / 60.0);
    ok = ok && seconds < 30.0 * 60.0;
    verdict(ok, "relative ASN improvement from K = 2 to 3 and 3 to 4");
  }
  {
    const double opt = norm_asn(find_row(ms, 3, 0.1, "optimal"));
    bool ok = std::isfinite(opt);
    for (const char* d : {"asymptotic", "lloyd_max"}) {
      const double fixed = norm_asn(find_row(ms, 3, 0.1, d));
      const double gain = 100.0 * (fixed - opt) / fixed;
      detail("K=3 target 0.1: optimal %.2f%% more efficient than %s (3-4, +- 2)", gain, d);
      ok = ok && gain >= 1.0 && gain <= 6.0;
    }
    verdict(ok, "adaptive vs fixed quantizers at K = 3, alpha = beta = 0.1");
  }
  {
    const double diff = norm_asn(find_row(ms, 2, 0.01, "lloyd_max")) - norm_asn(find_row(ms, 2, 0.01, "optimal"));
    const DesignRow *lm = find_row(ms, 2, 0.01, "lloyd_max"), *op = find_row(ms, 2, 0.01, "optimal");
    detail("K=2 target 0.01: Lloyd-Max minus optimal = %.4f samples normalized, %.4f raw (0.33 +- 0.15)", diff,
           lm && op ? lm->oc.asn0 - op->oc.asn0 : NAN);
    verdict(std::abs(diff - 0.33) <= 0.15, "ASN saving over Lloyd-Max at K = 2, alpha = beta = 0.01");
  }
  {
    bool ok = true;
    for (double t : {0.1, 0.01})
      for (int K : {2, 3, 4}) {
        const DesignRow* row = find_row(ms, K, t, "optimal");
        if (!row) {
          ok = false;
          continue;
        }
        const double gap = row->oc.asn_kappa - row->kl_bound;
        detail("target %-4g K=%d: ASN %.4f, KL bound %.4f, gap %.4f", t, K, row->oc.asn_kappa, row->kl_bound, gap);
        ok = ok && gap > 0.0 && gap <= 0.3;
      }
    verdict(ok, "KL bound below and within 0.3 samples of the achieved ASN in all six cells");
  }
  {
    // Monte Carlo against the evaluated characteristics of every row.
    double worst = 0.0;
    std::string where;
    for (const DesignRow& row : ms.rows) {
      if (!row.mc_h0 || !row.mc_h1) continue;
      auto z = [](double mc, double se, double ref) { return se > 0.0 ? std::abs(mc - ref) / se : 0.0; };
      const double m = std::max({z(row.mc_h0->mean_tau, row.mc_h0->stderr_tau, row.oc.asn0),
                                 z(row.mc_h1->mean_tau, row.mc_h1->stderr_tau, row.oc.asn1),
                                 z(row.mc_h0->error_rate, row.mc_h0->stderr_error, row.oc.alpha),
                                 z(row.mc_h1->error_rate, row.mc_h1->stderr_error, row.oc.beta)});
      if (m > worst) {
        worst = m;
        where = row_stem(row);
      }
    }
    detail("largest Monte Carlo deviation %.2f standard errors (%s), %zu rows", worst, where.c_str(), ms.rows.size());
    verdict(worst <= 5.0, "Monte Carlo agrees with policy evaluation on every table row (5 standard errors)");
  }
}

// ---------------------------------------------------------------------------
// Variance-shift Bayesian scenario.

void variance_criteria(const ScenarioReport& vs) {
  std::printf("\nvariance shift, kappa = 0.35\n");
  {
    const DesignRow *opt = find_bayes_row(vs, 3, "optimal"), *fixed = find_bayes_row(vs, 3, "asymptotic");
    const bool found = opt && fixed;
    const double a = found ? opt->cost : NAN, f = found ? fixed->cost : NAN;
    detail("L=1000 K=3: adaptive rho(1) %.4f (55.6196 +- 0.5), fixed %.4f (55.9359 +- 0.5)", a, f);
    verdict(found && !vs.failed && std::abs(a - 55.6196) <= 0.5 && std::abs(f - 55.9359) <= 0.5 && a < f,
            "Bayes cost of the adaptive and the asymptotic fixed quantizer");
  }
  {
    bool ok = vs.sweep.size() == 4;
    double previous_rel = INFINITY, previous_gap = NAN, previous_step = INFINITY;
    for (const SweepRow& s : vs.sweep) {
      const double gap = s.achieved_cost - s.bayes.bound;
      const double rel = gap / s.achieved_cost;
      detail("L=%-7g bound %9.4f  achieved %9.4f  gap %.4f (%.2f%%)", s.L, s.bayes.bound, s.achieved_cost, gap,
             100.0 * rel);
      ok = ok && gap > 0.0 && rel < previous_rel;
      if (!std::isnan(previous_gap)) {
        const double step = gap - previous_gap;
        ok = ok && step < previous_step;
        previous_step = step;
      }
      previous_rel = rel;
      previous_gap = gap;
    }
    detail("%s", "relative gap falls with L; absolute gap settles towards a constant");
    verdict(ok, "Bayes cost bound below the achieved cost for L = 1e2..1e5, gap shrinking");
  }
}

// ---------------------------------------------------------------------------
// Property suite on small problems.

bool check(bool ok, const char* what) {
  detail("%s %s", ok ? "ok  " : "FAIL", what);
  return ok;
}

void property_suite() {
  std::printf("\nproperty suite\n");
  bool all = true;
  const auto m = ObservationModel::mean_shift(1.0);
  const ThetaGrid grid{-2.0, 2.5, 0.1, 3};
  const ActionSet actions = ActionSet::from_grid(m, grid);
  const DesignConfig design{25.0, 40.0, 0.25};
  const ZGrid z = ZGrid::make(-7.0, 7.0, 801);
  const double tol = 1e-9;

  SolverOptions vi;
  vi.tol = tol;
  vi.mode = SolverMode::ValueIteration;
  std::vector<double> prev;
  bool monotone = true;
  vi.observer = [&](int, std::span<const double> rho) {
    if (!prev.empty())
      for (std::size_t i = 0; i < rho.size(); ++i) monotone = monotone && rho[i] <= prev[i];
    prev.assign(rho.begin(), rho.end());
  };
  const ValueFunction v_vi = solve_rho(actions, design, z, vi);
  all &= check(monotone, "value iteration never increases rho");

  SolverOptions mpi;
  mpi.tol = tol;
  const ValueFunction vf = solve_rho(actions, design, z, mpi);
  all &= check(bellman_residual(actions, vf) <= tol, "Bellman residual within tolerance");
  bool shape = true;
  for (int i = 1; i < z.n_points(); ++i) shape = shape && vf.rho[i] >= vf.rho[i - 1];
  for (int i = 1; i + 1 < z.n_points(); ++i) {
    const double z0 = std::exp(z.log_z(i - 1)), z1 = std::exp(z.log_z(i)), z2 = std::exp(z.log_z(i + 1));
    const double s0 = (vf.rho[i] - vf.rho[i - 1]) / (z1 - z0), s1 = (vf.rho[i + 1] - vf.rho[i]) / (z2 - z1);
    shape = shape && s1 <= s0 + 1e-6 * (1.0 + s0);
  }
  all &= check(shape, "rho nondecreasing and concave in z");
  const Policy policy = extract_policy(vf, actions);
  const OperatingCharacteristics oc = evaluate_policy(policy);
  const double identity = design.lambda0 * oc.alpha + design.lambda1 * oc.beta + oc.asn_kappa;
  detail("     rho(1) = %.10f, lambda0 alpha + lambda1 beta + ASN = %.10f", vf.cost(), identity);
  all &= check(std::abs(identity - vf.cost()) <= 10 * tol, "rho(1) equals its evaluated cost within 10 tol");

  {
    SplitMix64 rng(5);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
      std::vector<double> lv(1 + trial % 5);
      for (double& x : lv) x = u(rng);
      std::sort(lv.begin(), lv.end());
      const Pmf p0 = post_quantizer_pmf(m, Hypothesis::H0, QuantizerParams{lv}, InputTransform::Identity);
      const Pmf p1 = post_quantizer_pmf(m, Hypothesis::H1, QuantizerParams{lv}, InputTransform::Identity);
      double overlap = 0.0;
      for (std::size_t k = 0; k < p0.probs.size(); ++k) overlap += std::min(p0.probs[k], p1.probs[k]);
      worst = std::max(worst, std::abs(1.0 - overlap - tv_pmf(p0, p1)));
    }
    detail("     max |1 - sum min(Q0, Q1) - TV| = %.2e", worst);
    all &= check(worst <= 1e-12, "TV equals one minus the overlap");
  }
  {
    SimulationSpec s;
    s.n_runs = 400'000;
    s.seed = 77;
    s.threads = 0;
    const TestRunStats h0 = simulate(m, policy, s);
    s.truth = Hypothesis::H1;
    s.seed = 78;
    const TestRunStats h1 = simulate(m, policy, s);
    const double se = std::hypot(h0.stderr_weighted_accept_h0, h1.stderr_error);
    const double dev = std::abs(h0.mean_weighted_accept_h0 - h1.error_rate) / se;
    detail("     E0[z 1{accept H0}] = %.6f, P1(accept H0) = %.6f, %.2f standard errors",
           h0.mean_weighted_accept_h0, h1.error_rate, dev);
    all &= check(dev <= 4.0, "likelihood-ratio change of measure within 4 standard errors");
  }
  {
    SplitMix64 rng(2024);
    std::uniform_real_distribution<double> snr(-3.0, 3.0), w(0.0, 1.0), loglam(1.0, 3.0);
    EvaluationOptions executed;
    executed.refine = 16;
    executed.max_refine = 1024;
    int checked = 0;
    bool sound = true;
    for (int trial = 0; trial < 20; ++trial) {
      const bool variance = trial % 2 == 1;
      const auto model =
          ObservationModel::from_snr_db(variance ? ModelKind::VarianceShift : ModelKind::MeanShift, snr(rng));
      const int K = 2 + trial % 3;
      const ThetaGrid g = variance ? ThetaGrid{0.0, 3.0, 0.1, K, InputTransform::AbsoluteValue}
                                   : ThetaGrid{-2.5, 2.5, 0.1, K};
      const double kappa = trial % 4 == 0 ? 0.0 : w(rng);
      const DesignConfig d{std::pow(10.0, loglam(rng)), std::pow(10.0, loglam(rng)), kappa};
      const ValueFunction v = solve_rho(model, g, d, ZGrid::for_costs(d.lambda0, d.lambda1, 801));
      Policy p;
      try {
        p = extract_policy(v, model, g);
      } catch (const DegeneratePolicy&) {
        continue;
      }
      const OperatingCharacteristics c = evaluate_policy(p, executed);
      const BoundReport b = asn_bounds(grid_divergences(model, g), c.alpha, c.beta, kappa);
      sound = sound && b.asn_kl <= c.asn_kappa + 1e-6 && b.asn_tv <= c.asn_kappa + 1e-6;
      ++checked;
    }
    detail("     %d of 20 randomized designs sample at z = 1", checked);
    all &= check(sound && checked >= 15, "KL and TV bounds below the achieved ASN on randomized designs");
  }
  {
    const ValueFunction one = solve_rho(m, ThetaGrid{0.0, 1.0, 0.5, 1}, design, z);
    bool exact = true;
    for (int i = 0; i < z.n_points(); ++i)
      exact = exact && one.rho[i] == std::min(design.lambda0, design.lambda1 * std::exp(z.log_z(i)));
    all &= check(exact, "K = 1 gives rho = min{lambda0, lambda1 z} exactly");
  }
  {
    SolverOptions t4 = mpi;
    t4.threads = 4;
    const ValueFunction v4 = solve_rho(actions, design, z, t4);
    SimulationSpec s;
    s.n_runs = 50'000;
    s.seed = 3;
    s.threads = 1;
    const TestRunStats a = simulate(m, policy, s);
    s.threads = 4;
    const TestRunStats b = simulate(m, policy, s);
    const ThetaGrid big{-2.5, 2.5, 0.05, 3};
    const auto d1 = max_divergence_over_grid(m, big, DivergenceKind::kl01(), {kDefaultCandidateBudget, 1});
    const auto d4 = max_divergence_over_grid(m, big, DivergenceKind::kl01(), {kDefaultCandidateBudget, 4});
    all &= check(v4.rho == vf.rho && a.mean_tau == b.mean_tau && a.tau_histogram == b.tau_histogram &&
                     d1.value == d4.value && d1.argmax_theta == d4.argmax_theta,
                 "solver, simulation and grid scans identical for 1 and 4 threads");
  }
  (void)v_vi;
  verdict(all, "property suite");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <scenario dir> [output dir]\n");
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  const std::filesystem::path out = argc > 2 ? argv[2] : "acceptance_out";
  try {
    property_suite();

    double seconds = 0.0;
    std::fprintf(stderr, "running variance_shift_bayes\n");
    const ScenarioReport vs = run(dir / "variance_shift_bayes.yaml", out, seconds);
    for (const std::string& i : vs.issues) detail("issue: %s", i.c_str());
    variance_criteria(vs);

    std::fprintf(stderr, "running mean_shift_snr0\n");
    const ScenarioReport ms = run(dir / "mean_shift_snr0.yaml", out, seconds);
    std::printf("\n");
    for (const std::string& i : ms.issues) detail("issue: %s", i.c_str());
    table_criteria(ms, seconds);
  } catch (const std::exception& e) {
    std::printf("FAIL  acceptance run aborted: %s\n", e.what());
    return 1;
  }
  std::printf("\n%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
