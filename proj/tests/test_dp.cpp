#include <doctest.h>

#include <cmath>
#include <iomanip>
#include <random>

#include "oracles.hpp"
#include "seqquant/dp.hpp"
#include "seqquant/errors.hpp"
#include "seqquant/rng.hpp"

using namespace seqquant;

namespace {

const ObservationModel kMean = ObservationModel::mean_shift(1.0);

std::vector<double> node_z(const ZGrid& z) {
  std::vector<double> out(z.n_points());
  for (int i = 0; i < z.n_points(); ++i) out[i] = std::exp(z.log_z(i));
  return out;
}

}  // namespace

TEST_CASE("z-grid construction") {
  const ZGrid g = ZGrid::make(-3.3, 7.1, 1001);
  CHECK(g.log_z(g.zero_index()) == 0.0);
  CHECK(g.n_points() == 1001);
  CHECK(std::abs(g.log_z_min() + 3.3) <= g.step() / 2);
  CHECK(std::abs(g.log_z_max() - 7.1) <= g.step() / 2 + 1e-12);
  CHECK(g.nearest(-100.0) == 0);
  CHECK(g.nearest(100.0) == 1000);
  CHECK(g.nearest(g.log_z(17) + 0.49 * g.step()) == 17);

  const ZGrid w = ZGrid::around_wald_thresholds(0.1, 0.1);
  CHECK(w.n_points() == 2001);
  CHECK(w.log_z_max() == doctest::Approx(std::log(9.0) + 5.0).epsilon(1e-3));
  CHECK(w.log_z_min() == doctest::Approx(std::log(1.0 / 9.0) - 5.0).epsilon(1e-3));
  CHECK(ZGrid::from_step(w.step(), w.zero_index(), w.n_points()) == w);

  CHECK_THROWS_AS(ZGrid::make(0.5, 2.0, 1001), InvalidArgument);
  CHECK_THROWS_AS(ZGrid::make(-1.0, 1.0, 100), InvalidArgument);
  CHECK_THROWS_AS(ZGrid::from_step(0.1, 0, 1001), InvalidArgument);
  CHECK_THROWS_AS(ZGrid::around_wald_thresholds(0.6, 0.5), InvalidArgument);
}

TEST_CASE("cell shifts") {
  const double step = 0.01;
  const CellShift s = make_cell_shift(0.5, 0.5 * std::exp(0.0234), step, 1000);
  CHECK(s.offset == 2);
  CHECK(s.w0 + s.w1 == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(s.w1 == doctest::Approx(0.5 * 0.34).epsilon(1e-9));
  CHECK_FALSE(make_cell_shift(0.0, 0.3, step, 1000).active());
  CHECK_FALSE(make_cell_shift(0.3, 0.0, step, 1000).active());
  const CellShift far = make_cell_shift(0.5, 0.5 * std::exp(50.0), step, 1000);
  CHECK(far.offset == 1000);
  CHECK(far.w0 == 0.5);
  CHECK(far.w1 == 0.0);
}

TEST_CASE("chain minimization equals the exhaustive scan") {
  SplitMix64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int K : {2, 3, 4}) {
    CAPTURE(K);
    const ThetaGrid grid{-1.5, 2.0, 0.25, K};
    const ActionSet actions = ActionSet::from_grid(kMean, grid);
    const ZGrid z = ZGrid::make(-4.0, 4.0, 241);
    const ContinuationOperator op(actions, z);
    const int n = z.n_points();
    const int w = actions.choice_width();

    for (int trial = 0; trial < 3; ++trial) {
      // Concave-looking values in z plus noise, so minimizers move around.
      std::vector<double> rho(n);
      for (int i = 0; i < n; ++i) {
        const double zz = std::exp(z.log_z(i));
        rho[i] = std::min({20.0, 15.0 * zz, 3.0 + 4.0 * std::log1p(zz)}) + (trial ? u(rng) : 0.0);
      }
      std::vector<double> ext;
      op.pad_value_function(rho, 20.0, ext);

      std::vector<double> cont(n);
      std::vector<std::int32_t> choice(static_cast<std::size_t>(n) * w);
      op.minimize(ext, cont, choice, 1);

      std::vector<double> best(n, INFINITY), cand(n);
      std::vector<std::int32_t> arg(static_cast<std::size_t>(n) * w), fill(static_cast<std::size_t>(n) * w);
      CandidateSpace(grid.num_points(), K - 1).for_each([&](std::span<const int> idx) {
        for (int i = 0; i < n; ++i)
          for (int k = 0; k < w; ++k) fill[static_cast<std::size_t>(i) * w + k] = idx[k];
        op.apply(ext, fill, cand);
        for (int i = 0; i < n; ++i)
          if (cand[i] < best[i]) {
            best[i] = cand[i];
            for (int k = 0; k < w; ++k) arg[static_cast<std::size_t>(i) * w + k] = idx[k];
          }
      });
      CHECK(cont == best);
      CHECK(choice == arg);

      std::vector<double> cont3(n);
      std::vector<std::int32_t> choice3(choice.size());
      op.minimize(ext, cont3, choice3, 3);
      CHECK(cont3 == cont);
      CHECK(choice3 == choice);
    }
  }
}

TEST_CASE("continuation term against an independent interpolation") {
  const ThetaGrid grid{-1.0, 2.0, 0.5, 3};
  const ActionSet actions = ActionSet::from_grid(kMean, grid);
  const ZGrid z = ZGrid::make(-3.0, 3.0, 301);
  const ContinuationOperator op(actions, z);
  const int n = z.n_points();
  std::vector<double> rho(n);
  for (int i = 0; i < n; ++i) rho[i] = std::min(9.0, 4.0 * std::exp(z.log_z(i))) * (1.0 + 0.1 * std::sin(i * 0.1));
  std::vector<double> ext;
  op.pad_value_function(rho, 9.0, ext);
  const oracle::LogGridFunction f{z.log_z_min(), z.step(), rho, 9.0};
  CandidateSpace(grid.num_points(), 2).for_each([&](std::span<const int> idx) {
    std::vector<std::int32_t> fill;
    for (int i = 0; i < n; ++i) fill.insert(fill.end(), idx.begin(), idx.end());
    std::vector<double> cont(n);
    op.apply(ext, fill, cont);
    const auto pts = grid.points();
    const std::vector<double> lv{pts[idx[0]], pts[idx[1]]};
    const auto q0 = oracle::gaussian_cells(lv, 0.0, 1.0), q1 = oracle::gaussian_cells(lv, 1.0, 1.0);
    for (int i = 0; i < n; i += 7) {
      double ref = 0.0;
      for (int k = 0; k < 3; ++k)
        if (q0[k] > 0.0 && q1[k] > 0.0) ref += q0[k] * f(z.log_z(i) + std::log(q1[k] / q0[k]));
      CHECK(cont[i] == doctest::Approx(ref).epsilon(1e-11));
    }
  });
}

TEST_CASE("d_rho") {
  const ZGrid z = ZGrid::make(-5.0, 5.0, 100001);
  ValueFunction vf;
  vf.zgrid = z;
  vf.design = {10.0, 10.0, 0.0};
  for (double x : node_z(z)) vf.rho.push_back(std::min(10.0, 10.0 * x));
  const Pmf p0{{0.691462, 0.308538}}, p1{{0.308538, 0.691462}};
  // Both ratios land on linear pieces: 0.691462 * 10 * (0.308538/0.691462) + 0.308538 * 10.
  CHECK(d_rho(vf, 1.0, p0, p1) == doctest::Approx(20.0 * 0.308538).epsilon(1e-9));
  CHECK(d_rho(vf, 1.0, p0, p1) == doctest::Approx(6.17085).epsilon(2e-5));
  CHECK(d_rho(vf, 0.7, p0, p0) == doctest::Approx(vf.at(0.7)).epsilon(1e-12));
  ValueFunction zero = vf;
  std::fill(zero.rho.begin(), zero.rho.end(), 0.0);
  zero.design.lambda0 = 0.0;
  CHECK(d_rho(zero, 2.0, p0, p1) == 0.0);
}

TEST_CASE("solver invariants") {
  const ThetaGrid grid{-2.0, 2.5, 0.1, 3};
  const ActionSet actions = ActionSet::from_grid(kMean, grid);
  const DesignConfig design{25.0, 40.0, 0.25};
  const ZGrid z = ZGrid::make(-7.0, 7.0, 801);
  const double tol = 1e-9;

  std::vector<double> prev;
  bool monotone = true;
  int seen = 0;
  SolverOptions opt;
  opt.tol = tol;
  opt.observer = [&](int, std::span<const double> rho) {
    if (!prev.empty())
      for (std::size_t i = 0; i < rho.size(); ++i) monotone = monotone && rho[i] <= prev[i];
    prev.assign(rho.begin(), rho.end());
    ++seen;
  };
  const ValueFunction vf = solve_rho(actions, design, z, opt);
  CHECK(monotone);
  CHECK(seen == vf.iterations + 1);
  CHECK(bellman_residual(actions, vf) <= tol);
  CHECK(vf.sup_norm_residual <= tol);

  const auto zs = node_z(z);
  for (int i = 0; i < z.n_points(); ++i) {
    CHECK(vf.rho[i] >= 0.0);
    CHECK(vf.rho[i] <= std::min(design.lambda0, design.lambda1 * zs[i]));
    if (i) CHECK(vf.rho[i] >= vf.rho[i - 1]);
  }
  // Concave in z: slopes between neighbours never increase beyond tolerance.
  for (int i = 1; i + 1 < z.n_points(); ++i) {
    const double s0 = (vf.rho[i] - vf.rho[i - 1]) / (zs[i] - zs[i - 1]);
    const double s1 = (vf.rho[i + 1] - vf.rho[i]) / (zs[i + 1] - zs[i]);
    CHECK(s1 <= s0 + 1e-6 * (1.0 + s0));
  }

  SUBCASE("policy and the consistency of its evaluation") {
    const Policy p = extract_policy(vf, actions);
    CHECK(p.log_B < 0.0);
    CHECK(p.log_A > 0.0);
    const auto pts = grid.points();
    for (const QuantizerParams& q : p.eta)
      for (double level : q.levels) {
        const double j = (level - grid.theta_min) / grid.step;
        CHECK(std::abs(j - std::round(j)) < 1e-9);
        CHECK(level == pts[static_cast<int>(std::round(j))]);
      }
    const OperatingCharacteristics oc = evaluate_policy(p);
    const double lhs = design.lambda0 * oc.alpha + design.lambda1 * oc.beta + oc.asn_kappa;
    CHECK(std::abs(lhs - vf.cost()) <= 10 * tol);
    CHECK(oc.asn_kappa == doctest::Approx((1 - design.kappa) * oc.asn0 + design.kappa * oc.asn1).epsilon(1e-12));
  }
  SUBCASE("plain value iteration reaches the same fixed point") {
    SolverOptions vi;
    vi.tol = tol;
    vi.mode = SolverMode::ValueIteration;
    const ValueFunction v2 = solve_rho(actions, design, z, vi);
    for (int i = 0; i < z.n_points(); ++i) CHECK(std::abs(v2.rho[i] - vf.rho[i]) <= 1e-6);
    CHECK(v2.greedy_sweeps >= v2.iterations);
  }
  SUBCASE("thread count and warm start leave the result unchanged") {
    SolverOptions t3;
    t3.tol = tol;
    t3.threads = 3;
    const ValueFunction v3 = solve_rho(actions, design, z, t3);
    CHECK(v3.rho == vf.rho);
    SolverOptions warm;
    warm.tol = tol;
    warm.warm_choice = vf.greedy_choice;
    const ValueFunction vw = solve_rho(actions, design, z, warm);
    CHECK(vw.greedy_sweeps <= vf.greedy_sweeps);
    for (int i = 0; i < z.n_points(); ++i) CHECK(std::abs(vw.rho[i] - vf.rho[i]) <= 1e-7);
    CHECK(extract_policy(vw, actions).eta == extract_policy(vf, actions).eta);
    warm.warm_choice.pop_back();
    CHECK_THROWS_AS(solve_rho(actions, design, z, warm), InvalidArgument);
  }
  SUBCASE("a larger action set never costs more") {
    const ThetaGrid fine{-2.0, 2.5, 0.05, 3};
    CHECK(solve_rho(kMean, fine, design, z).cost() <= vf.cost() + tol);
  }
}

TEST_CASE("closed forms and trivial designs") {
  const ZGrid z = ZGrid::make(-6.0, 6.0, 601);
  SUBCASE("one cell: nothing is learned, so rho = min{lambda0, lambda1 z}") {
    const ThetaGrid one{0.0, 1.0, 0.5, 1};
    const DesignConfig d{30.0, 20.0, 0.4};
    const ValueFunction vf = solve_rho(kMean, one, d, z);
    for (int i = 0; i < z.n_points(); ++i) CHECK(vf.rho[i] == std::min(d.lambda0, d.lambda1 * std::exp(z.log_z(i))));
    CHECK_THROWS_AS(extract_policy(vf, kMean, one), DegeneratePolicy);
  }
  SUBCASE("free H1 decision gives rho = 0") {
    const ValueFunction vf = solve_rho(kMean, ThetaGrid{-1.0, 1.0, 0.5, 2}, DesignConfig{0.0, 10.0, 0.0}, z);
    for (double v : vf.rho) CHECK(v == 0.0);
  }
  SUBCASE("errors cheaper than a sample stop at once") {
    const ThetaGrid g{-1.0, 1.0, 0.5, 2};
    const ValueFunction vf = solve_rho(kMean, g, DesignConfig{0.5, 0.5, 0.0}, z);
    CHECK_THROWS_AS(extract_policy(vf, kMean, g), DegeneratePolicy);
  }
  SUBCASE("invalid designs") {
    CHECK_THROWS_AS((DesignConfig{-1.0, 1.0, 0.0}.validate()), InvalidArgument);
    CHECK_THROWS_AS((DesignConfig{1.0, 1.0, 1.5}.validate()), InvalidArgument);
  }
}

TEST_CASE("evaluation of policies that decide at once") {
  const ZGrid z = ZGrid::make(-4.0, 4.0, 401);
  Policy p;
  p.zgrid = z;
  p.K = 2;
  p.index_B = -1;
  p.log_B = -INFINITY;
  p.index_A = z.zero_index();
  p.log_A = -1e-300;
  const OperatingCharacteristics a = evaluate_policy(p);
  CHECK(a.alpha == 1.0);
  CHECK(a.beta == 0.0);
  CHECK(a.asn0 == 0.0);
  CHECK(a.asn1 == 0.0);
  p.index_A = z.n_points();
  p.index_B = z.zero_index();
  const OperatingCharacteristics b = evaluate_policy(p);
  CHECK(b.alpha == 0.0);
  CHECK(b.beta == 1.0);
}

TEST_CASE("truncated-horizon oracle for a fixed quantizer") {
  const QuantizerParams theta{{0.5}};
  const ActionSet single = ActionSet::from_list(kMean, {theta}, InputTransform::Identity);
  const DesignConfig d{100.0, 100.0, 0.0};
  const ZGrid z = ZGrid::make(-9.0, 9.0, 2001);
  const ValueFunction vf = solve_rho(single, d, z);
  const auto q0 = oracle::gaussian_cells(theta.levels, 0.0, 1.0), q1 = oracle::gaussian_cells(theta.levels, 1.0, 1.0);
  const double ref = oracle::truncated_horizon(q0, q1, 100.0, 100.0, z.log_z_min(), z.log_z_max(),
                                               4 * (z.n_points() - 1) + 1, 500);
  CHECK(std::abs(vf.cost() - ref) <= 1e-3);
  // Regression value of this design.
  MESSAGE("rho(1) = " << std::setprecision(10) << vf.cost() << ", oracle " << ref);
  CHECK(vf.cost() == doctest::Approx(14.4138).epsilon(1e-4));
}

TEST_CASE("error probabilities fall as both costs grow") {
  const ThetaGrid g{-2.5, 2.5, 0.05, 2};
  const ZGrid z = ZGrid::around_wald_thresholds(0.01, 0.01);
  double prev_a = 1.0, prev_b = 1.0;
  for (double scale : {20.0, 60.0, 200.0}) {
    const ValueFunction vf = solve_rho(kMean, g, DesignConfig{scale, 1.5 * scale, 0.0}, z);
    const OperatingCharacteristics oc = evaluate_policy(extract_policy(vf, kMean, g));
    CHECK(oc.alpha < prev_a);
    CHECK(oc.beta < prev_b);
    prev_a = oc.alpha;
    prev_b = oc.beta;
  }
}
