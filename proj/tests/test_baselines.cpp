#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "seqquant/baselines.hpp"
#include "seqquant/errors.hpp"

using namespace seqquant;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

long double phi(long double x) { return std::exp(-0.5L * x * x) / std::sqrt(2.0L * 3.14159265358979323846L); }

// E[X | a < X <= b] for a standard normal, in long double.
long double centroid(long double a, long double b) {
  return (phi(a) - phi(b)) / (oracle::Phi(b) - oracle::Phi(a));
}

// Root of the symmetric Lloyd-Max condition t = (c_left + c_right)/2 by bisection.
template <class F>
double bisect(F&& g, long double lo, long double hi) {
  for (int i = 0; i < 200; ++i) {
    const long double mid = 0.5L * (lo + hi);
    (g(mid) > 0.0L ? hi : lo) = mid;
  }
  return static_cast<double>(0.5L * (lo + hi));
}

double oracle_objective(const std::vector<double>& levels, double kappa) {
  const auto p0 = oracle::gaussian_cells(levels, 0.0, 1.0);
  const auto p1 = oracle::gaussian_cells(levels, 1.0, 1.0);
  const double a = oracle::kl(p0, p1), b = oracle::kl(p1, p0);
  double v = 0.0;
  if (kappa != 1.0) v += a > 0.0 ? (1.0 - kappa) / a : kInf;
  if (kappa != 0.0) v += b > 0.0 ? kappa / b : kInf;
  return v;
}

}  // namespace

TEST_CASE("Lloyd-Max levels") {
  const auto q2 = lloyd_max(2);
  REQUIRE(q2.levels.size() == 1);
  CHECK(std::abs(q2.levels[0]) < 1e-14);

  // K = 3: levels +-a with a = c/2, c the centroid of (a, inf).
  const double a3 = bisect([](long double t) { return t - 0.5L * centroid(t, INFINITY); }, 0.1L, 2.0L);
  const auto q3 = lloyd_max(3);
  REQUIRE(q3.levels.size() == 2);
  CHECK(q3.levels[0] == doctest::Approx(-a3).epsilon(1e-10));
  CHECK(q3.levels[1] == doctest::Approx(a3).epsilon(1e-10));
  CHECK(a3 == doctest::Approx(0.6120).epsilon(1e-3));

  // K = 4: levels -t, 0, t with t the midpoint of the centroids of (0, t) and (t, inf).
  const double t4 = bisect(
      [](long double t) { return t - 0.5L * (centroid(0.0L, t) + centroid(t, INFINITY)); }, 0.1L, 3.0L);
  const auto q4 = lloyd_max(4);
  REQUIRE(q4.levels.size() == 3);
  CHECK(q4.levels[0] == doctest::Approx(-t4).epsilon(1e-10));
  CHECK(std::abs(q4.levels[1]) < 1e-10);
  CHECK(q4.levels[2] == doctest::Approx(t4).epsilon(1e-10));
  CHECK(t4 == doctest::Approx(0.9816).epsilon(1e-4));

  CHECK_THROWS_AS(lloyd_max(1), InvalidArgument);
  CHECK_THROWS_AS(lloyd_max(4, 0.0), InvalidArgument);
}

TEST_CASE("Lloyd-Max output satisfies both optimality conditions") {
  for (int K : {2, 3, 5, 8, 16}) {
    const auto q = lloyd_max(K, 1e-13);
    std::vector<long double> c(K);
    for (int k = 0; k < K; ++k) {
      const long double a = k == 0 ? -INFINITY : q.levels[k - 1];
      const long double b = k == K - 1 ? INFINITY : q.levels[k];
      c[k] = centroid(a, b);
      CHECK(c[k] > a);
      CHECK(c[k] < b);
    }
    for (int k = 0; k + 1 < K; ++k) {
      CAPTURE(K);
      CHECK(std::abs(q.levels[k] - static_cast<double>(0.5L * (c[k] + c[k + 1]))) < 1e-10);
      // Symmetry of N(0, 1).
      CHECK(q.levels[k] == doctest::Approx(-q.levels[K - 2 - k]).epsilon(1e-10));
    }
  }
}

TEST_CASE("asymptotic quantizer") {
  const auto m = ObservationModel::mean_shift(1.0);
  SUBCASE("exhaustive scan equals a brute-force oracle") {
    for (int K : {2, 3, 4}) {
      for (double kappa : {0.0, 0.35, 1.0}) {
        const ThetaGrid g{-1.5, 2.5, 0.25, K};
        double best = kInf;
        for (const QuantizerParams& q : enumerate_theta_grid(g)) best = std::min(best, oracle_objective(q.levels, kappa));
        const AsymptoticTheta r = asymptotic_optimal(m, g, kappa);
        CAPTURE(K);
        CAPTURE(kappa);
        CHECK(r.objective == doctest::Approx(best).epsilon(1e-12));
        CHECK(oracle_objective(r.theta.levels, kappa) == doctest::Approx(best).epsilon(1e-12));
        CHECK(asymptotic_objective(m, r.theta, InputTransform::Identity, kappa) ==
              doctest::Approx(r.objective).epsilon(1e-14));
      }
    }
  }
  SUBCASE("kappa = 0 maximizes the H0 divergence") {
    const ThetaGrid g{-2.5, 2.5, 0.05, 3};
    const auto r = asymptotic_optimal(m, g, 0.0);
    const auto kl = max_divergence_over_grid(m, g, DivergenceKind::kl01());
    CHECK(r.objective == doctest::Approx(1.0 / kl.value).epsilon(1e-13));
  }
  SUBCASE("symmetric problem puts the K = 2 level at mu / 2") {
    const auto r = asymptotic_optimal(m, ThetaGrid{-2.5, 2.5, 0.01, 2}, 0.5);
    CHECK(r.theta.levels[0] == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("more cells never hurt on nested grids") {
    double previous = kInf;
    for (int K : {2, 3, 4, 5}) {
      const double v = asymptotic_optimal(m, ThetaGrid{-2.5, 2.5, 0.1, K}, 0.3).objective;
      CHECK(v < previous);
      previous = v;
    }
  }
  SUBCASE("regression: K = 4 on the 0.01 grid") {
    const auto r = asymptotic_optimal(m, ThetaGrid{-2.5, 2.5, 0.01, 4}, 0.0, {25'000'000, 0});
    REQUIRE(r.theta.levels.size() == 3);
    CHECK(r.theta.levels[0] == doctest::Approx(-0.85).epsilon(1e-12));
    CHECK(r.theta.levels[1] == doctest::Approx(0.12).epsilon(1e-12));
    CHECK(r.theta.levels[2] == doctest::Approx(1.12).epsilon(1e-12));
    CHECK(r.objective == doctest::Approx(2.2661).epsilon(1e-4));
    CHECK(r.objective == doctest::Approx(oracle_objective(r.theta.levels, 0.0)).epsilon(1e-12));
  }
  SUBCASE("no informative candidate") {
    CHECK_THROWS_AS(asymptotic_optimal(m, ThetaGrid{40.0, 41.0, 0.5, 3}, 0.0), NoInformativeQuantizer);
    CHECK_THROWS_AS(asymptotic_optimal(m, ThetaGrid{-1.0, 1.0, 0.5, 1}, 0.0), NoInformativeQuantizer);
    CHECK(std::isinf(asymptotic_objective(m, QuantizerParams{{60.0}}, InputTransform::Identity, 0.5)));
  }
  SUBCASE("folded variance model") {
    const auto v = ObservationModel::variance_shift(1.0);
    const ThetaGrid g{0.0, 3.0, 0.1, 3, InputTransform::AbsoluteValue};
    double best = kInf;
    for (const QuantizerParams& q : enumerate_theta_grid(g)) {
      const auto p0 = oracle::folded_cells(q.levels, 1.0);
      const auto p1 = oracle::folded_cells(q.levels, std::sqrt(2.0));
      const double a = oracle::kl(p0, p1), b = oracle::kl(p1, p0);
      if (a > 0.0 && b > 0.0) best = std::min(best, 0.65 / a + 0.35 / b);
    }
    CHECK(asymptotic_optimal(v, g, 0.35).objective == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("fixed quantizer policies") {
  const auto m = ObservationModel::mean_shift(1.0);
  const DesignConfig design{40.0, 40.0, 0.0};
  const ZGrid z = ZGrid::for_costs(40.0, 40.0, 1001);
  const QuantizerParams theta{{0.5}};
  const Policy p = fixed_quantizer_policy(m, theta, InputTransform::Identity, design, z);
  CHECK(p.index_B < z.zero_index());
  CHECK(p.index_A > z.zero_index());
  for (const QuantizerParams& q : p.eta) CHECK(q == theta);

  SUBCASE("adaptive design dominates every fixed quantizer") {
    const ThetaGrid grid{-2.5, 2.5, 0.1, 2};
    const double adaptive = solve_rho(m, grid, design, z).cost();
    for (double t = -1.0; t <= 2.0; t += 0.3) {
      const ActionSet one = ActionSet::from_list(m, {QuantizerParams{{std::round(t * 10.0) / 10.0}}},
                                                 InputTransform::Identity);
      CHECK(adaptive <= solve_rho(one, design, z).cost() + 1e-9);
    }
  }
  SUBCASE("an uninformative quantizer never samples") {
    CHECK_THROWS_AS(fixed_quantizer_policy(m, QuantizerParams{{60.0}}, InputTransform::Identity, design, z),
                    DegeneratePolicy);
  }
}
