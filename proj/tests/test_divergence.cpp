#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "seqquant/divergence.hpp"
#include "seqquant/errors.hpp"
#include "seqquant/rng.hpp"

using namespace seqquant;

TEST_CASE("pmf divergences") {
  const Pmf a{{0.691462, 0.308538}}, b{{0.308538, 0.691462}};
  CHECK(kl_pmf(a, a) == 0.0);
  CHECK(kl_pmf(Pmf{{1.0, 0.0}}, Pmf{{0.5, 0.5}}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(std::isinf(kl_pmf(Pmf{{0.5, 0.5}}, Pmf{{1.0, 0.0}})));
  CHECK(tv_pmf(a, a) == 0.0);
  CHECK(tv_pmf(Pmf{{1.0, 0.0}}, Pmf{{0.0, 1.0}}) == 1.0);
  CHECK(tv_pmf(a, b) == doctest::Approx(0.382924).epsilon(1e-12));
  CHECK(kl_pmf(a, b) == doctest::Approx(oracle::kl(a.probs, b.probs)).epsilon(1e-14));
  CHECK_THROWS_AS(kl_pmf(Pmf{{1.0}}, Pmf{{0.5, 0.5}}), InvalidArgument);
}

TEST_CASE("Bernoulli divergences") {
  CHECK(kl_bernoulli(0.0, 1.0) == 0.0);
  CHECK(kl_bernoulli(1.0, 0.0) == 0.0);
  CHECK(kl_bernoulli(0.0, 0.01) == doctest::Approx(std::log(100.0)).epsilon(1e-15));
  CHECK(kl_bernoulli(1.0, 0.25) == doctest::Approx(std::log(1.0 / 0.75)).epsilon(1e-15));
  CHECK(kl_bernoulli(0.1, 0.1) == doctest::Approx(1.757780).epsilon(1e-6));
  CHECK(std::isinf(kl_bernoulli(0.3, 0.0)));
  CHECK(std::isinf(kl_bernoulli(0.3, 1.0)));
  for (double p = 0.0; p <= 1.0; p += 0.0625) CHECK(kl_bernoulli(p, 1.0 - p) == doctest::Approx(0.0).epsilon(1e-15));
  for (double p : {0.01, 0.2, 0.45})
    for (double q : {0.001, 0.3, 0.6}) CHECK(kl_bernoulli(p, q) == doctest::Approx(oracle::kl_bern(p, q)).epsilon(1e-14));
  CHECK(tv_bernoulli(0.1, 0.1) == doctest::Approx(0.8));
  CHECK(tv_bernoulli(0.01, 0.01) == doctest::Approx(0.98));
  CHECK_THROWS_AS(tv_bernoulli(0.6, 0.5), InvalidArgument);
}

TEST_CASE("ties resolve to the first candidate") {
  // Every K = 3 candidate with both levels outside the data range is
  // uninformative; the first such candidate in enumeration order must win.
  const auto far = make_model(ModelKind::MeanShift, 1e-3);
  const auto r = max_divergence_over_grid(far, ThetaGrid{40.0, 41.0, 0.5, 3}, DivergenceKind::tv());
  CHECK(r.value == 0.0);
  CHECK(r.argmax_theta.levels == std::vector<double>{40.0, 40.0});
}

TEST_CASE("total variation equals one minus the overlap") {
  const auto m = ObservationModel::mean_shift(1.0);
  const auto v = ObservationModel::variance_shift(1.0);
  SplitMix64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> lv(1 + trial % 5);
    for (double& x : lv) x = u(rng);
    std::sort(lv.begin(), lv.end());
    const bool folded = trial % 2;
    if (folded)
      for (double& x : lv) x = std::abs(x);
    std::sort(lv.begin(), lv.end());
    const auto& model = folded ? v : m;
    const auto t = folded ? InputTransform::AbsoluteValue : InputTransform::Identity;
    const Pmf p0 = post_quantizer_pmf(model, Hypothesis::H0, QuantizerParams{lv}, t);
    const Pmf p1 = post_quantizer_pmf(model, Hypothesis::H1, QuantizerParams{lv}, t);
    double overlap = 0.0;
    for (std::size_t k = 0; k < p0.probs.size(); ++k) overlap += std::min(p0.probs[k], p1.probs[k]);
    CHECK(std::abs((1.0 - overlap) - tv_pmf(p0, p1)) <= 1e-12);
  }
}

TEST_CASE("grid maxima") {
  const auto m = ObservationModel::mean_shift(1.0);
  SUBCASE("single cell carries no information") {
    for (auto kind : {DivergenceKind::kl01(), DivergenceKind::kl10(), DivergenceKind::tv()})
      CHECK(max_divergence_over_grid(m, ThetaGrid{-1.0, 1.0, 0.5, 1}, kind).value == 0.0);
  }
  SUBCASE("symmetric level maximizes TV on a coarse grid") {
    const auto r = max_divergence_over_grid(m, ThetaGrid{0.0, 1.0, 0.5, 2}, DivergenceKind::tv());
    CHECK(r.argmax_theta.levels == std::vector<double>{0.5});
    CHECK(r.value == doctest::Approx(0.382924).epsilon(1e-6));
  }
  SUBCASE("exhaustive scan equals a brute-force oracle") {
    for (int K : {2, 3, 4}) {
      const ThetaGrid g{-1.5, 2.5, 0.25, K};
      for (auto kind : {DivergenceKind::kl01(), DivergenceKind::kl10(), DivergenceKind::tv()}) {
        double best = -1.0;
        std::vector<double> arg;
        for (const QuantizerParams& q : enumerate_theta_grid(g)) {
          const auto p0 = oracle::gaussian_cells(q.levels, 0.0, 1.0);
          const auto p1 = oracle::gaussian_cells(q.levels, 1.0, 1.0);
          const double d = kind.kind == DivergenceKind::Kind::TV ? oracle::tv(p0, p1)
                           : kind.direction == DivergenceKind::Direction::ZeroToOne ? oracle::kl(p0, p1)
                                                                                    : oracle::kl(p1, p0);
          if (d > best + 1e-13) {
            best = d;
            arg = q.levels;
          }
        }
        const auto r = max_divergence_over_grid(m, g, kind);
        CHECK(r.value == doctest::Approx(best).epsilon(1e-12));
        // Empty cells make some candidates exact duplicates, so only the value
        // of the reported argmax is pinned, not its position among ties.
        const auto q0 = oracle::gaussian_cells(r.argmax_theta.levels, 0.0, 1.0);
        const auto q1 = oracle::gaussian_cells(r.argmax_theta.levels, 1.0, 1.0);
        const double at = kind.kind == DivergenceKind::Kind::TV ? oracle::tv(q0, q1)
                          : kind.direction == DivergenceKind::Direction::ZeroToOne ? oracle::kl(q0, q1)
                                                                                   : oracle::kl(q1, q0);
        CHECK(at == doctest::Approx(best).epsilon(1e-12));
      }
    }
  }
  SUBCASE("thread count does not change the result") {
    const ThetaGrid g{-2.5, 2.5, 0.05, 3};
    const auto a = max_divergence_over_grid(m, g, DivergenceKind::kl01(), {kDefaultCandidateBudget, 1});
    const auto b = max_divergence_over_grid(m, g, DivergenceKind::kl01(), {kDefaultCandidateBudget, 3});
    CHECK(a.value == b.value);
    CHECK(a.argmax_theta == b.argmax_theta);
  }
  SUBCASE("refining a quantizer never loses information") {
    const ThetaGrid g2{-2.5, 2.5, 0.05, 2}, g3{-2.5, 2.5, 0.05, 3};
    for (auto kind : {DivergenceKind::kl01(), DivergenceKind::kl10(), DivergenceKind::tv()})
      CHECK(max_divergence_over_grid(m, g2, kind).value <= max_divergence_over_grid(m, g3, kind).value);
    const double k3 = max_divergence_over_grid(m, g3, DivergenceKind::kl01()).value;
    CHECK(k3 < m.kl_divergence());
  }
  SUBCASE("regression: K = 2 on the 0.01 grid") {
    const ThetaGrid g{-2.5, 2.5, 0.01, 2};
    const auto kl = max_divergence_over_grid(m, g, DivergenceKind::kl01());
    const auto tv = max_divergence_over_grid(m, g, DivergenceKind::tv());
    // TV peaks at the midpoint of the two means.
    CHECK(tv.argmax_theta.levels[0] == doctest::Approx(0.5));
    CHECK(tv.value == doctest::Approx(0.3829249225480262).epsilon(1e-12));
    CHECK(kl.value == doctest::Approx(0.318561).epsilon(1e-5));
  }
}
