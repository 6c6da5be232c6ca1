#include "seqquant/calibrate.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <optional>

namespace seqquant {

namespace {

struct Sample {
  double log_l0 = 0.0;
  double log_l1 = 0.0;
  // ln(alpha / alpha_target), ln(beta / beta_target); +inf when degenerate.
  double ga = 0.0;
  double gb = 0.0;
  std::optional<CalibrationResult> result;
};

class Calibrator {
 public:
  Calibrator(const ActionSet& actions, double kappa, double alpha_t, double beta_t, const ZGrid& zgrid,
             const CalibrationOptions& options)
      : actions_(actions), kappa_(kappa), alpha_t_(alpha_t), beta_t_(beta_t), zgrid_(zgrid), opt_(options) {}

  Sample eval(double log_l0, double log_l1) {
    Sample s{log_l0, log_l1, kHuge, kHuge, std::nullopt};
    CalibrationResult r;
    r.design = {std::exp(log_l0), std::exp(log_l1), kappa_};
    ++evaluations_;
    try {
      SolverOptions solver = opt_.solver;
      solver.warm_choice = warm_;
      ValueFunction vf = solve_rho(actions_, r.design, zgrid_, solver);
      warm_ = std::move(vf.greedy_choice);
      r.policy = extract_policy(vf, actions_, opt_.solver.threads);
      r.achieved = evaluate_policy(r.policy, opt_.evaluation);
      r.cost = vf.cost();
    } catch (const DegeneratePolicy&) {
      trace(s, "degenerate");
      return s;
    }
    r.evaluations = evaluations_;
    s.ga = std::log(r.achieved.alpha / alpha_t_);
    s.gb = std::log(r.achieved.beta / beta_t_);
    r.relative_error = std::max(std::abs(r.achieved.alpha / alpha_t_ - 1.0), std::abs(r.achieved.beta / beta_t_ - 1.0));
    s.result = r;
    if (!best_ || r.relative_error < best_->relative_error) {
      best_ = r;
      best_sample_ = s;
    }
    trace(s, "");
    return s;
  }

  bool accepted(const Sample& s) const {
    return s.result && s.result->relative_error <= opt_.rel_tol;
  }

  // Moves x (a log cost) until g(x) = 0 for a function decreasing in x.
  // g_of reads the coordinate that should hit its target.
  using Make = std::function<Sample(double)>;
  using Residual = double (*)(const Sample&);

  // axis 0 moves log lambda0, axis 1 moves log lambda1.
  Sample search(Sample start, int axis, const Make& make, Residual g_of, double inner_tol) {
    auto coord = [axis](const Sample& t) { return axis == 0 ? t.log_l0 : t.log_l1; };
    auto ok = [&](const Sample& s) { return std::abs(std::expm1(g_of(s))) <= inner_tol || accepted(s); };
    if (ok(start)) return start;
    double x_lo, x_hi;  // g(x_lo) > 0 > g(x_hi)
    Sample lo = start, hi = start;
    double step = 0.5;
    const bool too_big = g_of(start) > 0.0;
    Sample cur = start;
    for (int i = 0;; ++i) {
      if (i >= opt_.max_inner) return best_of(start, cur, g_of);
      Sample next = make(coord(cur) + (too_big ? step : -step));
      step *= 2.0;
      if (ok(next)) return next;
      if ((g_of(next) > 0.0) != too_big) {
        (too_big ? lo : hi) = cur;
        (too_big ? hi : lo) = next;
        break;
      }
      cur = next;
    }
    x_lo = coord(lo);
    x_hi = coord(hi);
    double g_lo = g_of(lo), g_hi = g_of(hi);
    Sample best = std::abs(g_lo) < std::abs(g_hi) ? lo : hi;
    int side = 0;
    for (int i = 0; i < opt_.max_inner && x_hi - x_lo > 1e-4; ++i) {
      // Illinois regula falsi; bisect while a side is still degenerate.
      double x = 0.5 * (x_lo + x_hi);
      if (g_lo < kHuge && g_hi > -kHuge) x = (x_lo * g_hi - x_hi * g_lo) / (g_hi - g_lo);
      if (!(x > x_lo && x < x_hi)) x = 0.5 * (x_lo + x_hi);
      Sample s = make(x);
      const double g = g_of(s);
      if (std::abs(g) < std::abs(g_of(best))) best = s;
      if (ok(s)) return s;
      if (g > 0.0) {
        x_lo = x;
        g_lo = g;
        if (side == 1) g_hi *= 0.5;
        side = 1;
      } else {
        x_hi = x;
        g_hi = g;
        if (side == -1) g_lo *= 0.5;
        side = -1;
      }
    }
    return best;
  }

  CalibrationResult run() {
    double l0 = opt_.lambda0_init > 0.0 ? opt_.lambda0_init : 1.0 / alpha_t_;
    double l1 = opt_.lambda1_init > 0.0 ? opt_.lambda1_init : 1.0 / beta_t_;
    const double tight = 0.5 * opt_.rel_tol;

    // Common scale first: with the ratio fixed both error rates fall together.
    const double ratio = std::log(l1) - std::log(l0);
    auto scale = [&](double x) { return eval(x, x + ratio); };
    Residual mean_g = [](const Sample& t) { return 0.5 * (t.ga + t.gb); };
    Sample s = search(scale(std::log(l0)), 0, scale, mean_g, tight);
    if (accepted(s)) return finish(s);

    for (int outer = 0; outer < opt_.max_outer; ++outer) {
      const double x0 = s.log_l0, y0 = s.log_l1;
      const double y = s.log_l1;
      s = search(s, 0, [&](double v) { return eval(v, y); }, [](const Sample& t) { return t.ga; }, tight);
      if (accepted(s)) return finish(s);
      const double x = s.log_l0;
      s = search(s, 1, [&](double v) { return eval(x, v); }, [](const Sample& t) { return t.gb; }, tight);
      if (accepted(s)) return finish(s);
      // Stuck on a jump of the piecewise-constant error curves.
      if (std::abs(s.log_l0 - x0) < 1e-3 && std::abs(s.log_l1 - y0) < 1e-3) break;
    }
    if (best_sample_ && pattern_search()) return finish(*best_sample_);
    if (!best_) throw CalibrationFailure("calibration never produced a nondegenerate design", CalibrationResult{});
    throw CalibrationFailure("calibration did not reach the relative tolerance", *best_);
  }

 private:
  static constexpr double kHuge = std::numeric_limits<double>::infinity();

  template <class G>
  static Sample best_of(const Sample& a, const Sample& b, G g_of) {
    return std::abs(g_of(a)) <= std::abs(g_of(b)) ? a : b;
  }

  // Error rates only change when the policy does, so near the target the
  // search becomes a walk over nearby policies: probe both costs jointly.
  bool pattern_search() {
    static constexpr double kDirs[8][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}};
    double step = 0.02;
    while (step >= 2.5e-4 && evaluations_ < opt_.max_evaluations) {
      const Sample center = *best_sample_;
      bool moved = false;
      for (const auto& d : kDirs) {
        if (evaluations_ >= opt_.max_evaluations) break;
        const Sample s = eval(center.log_l0 + step * d[0], center.log_l1 + step * d[1]);
        if (accepted(s)) return true;
        if (best_sample_->log_l0 != center.log_l0 || best_sample_->log_l1 != center.log_l1) {
          moved = true;
          break;
        }
      }
      if (!moved) step *= 0.5;
    }
    return false;
  }

  CalibrationResult finish(const Sample& s) {
    CalibrationResult r = *s.result;
    r.evaluations = evaluations_;
    return r;
  }

  void trace(const Sample& s, const char* note) const {
    if (!opt_.trace) return;
    char line[256];
    if (s.result)
      std::snprintf(line, sizeof line, "lambda0=%.6g lambda1=%.6g alpha=%.6g beta=%.6g", std::exp(s.log_l0),
                    std::exp(s.log_l1), s.result->achieved.alpha, s.result->achieved.beta);
    else
      std::snprintf(line, sizeof line, "lambda0=%.6g lambda1=%.6g %s", std::exp(s.log_l0), std::exp(s.log_l1), note);
    opt_.trace(line);
  }

  const ActionSet& actions_;
  double kappa_;
  double alpha_t_;
  double beta_t_;
  ZGrid zgrid_;
  CalibrationOptions opt_;
  int evaluations_ = 0;
  std::optional<CalibrationResult> best_;
  std::optional<Sample> best_sample_;
  std::vector<std::int32_t> warm_;
};

}  // namespace

CalibrationResult calibrate_lambda(const ActionSet& actions, double kappa, double alpha_target, double beta_target,
                                   const ZGrid& zgrid, const CalibrationOptions& options) {
  if (!(alpha_target > 0.0 && beta_target > 0.0 && alpha_target + beta_target < 1.0))
    throw InvalidArgument("calibration targets need alpha, beta > 0 and alpha + beta < 1");
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw InvalidArgument("kappa must lie in [0, 1]");
  if (!(options.rel_tol > 0.0)) throw InvalidArgument("calibration tolerance must be positive");
  Calibrator c(actions, kappa, alpha_target, beta_target, zgrid, options);
  return c.run();
}

CalibrationResult calibrate_lambda(const ObservationModel& model, const ThetaGrid& grid, double kappa,
                                   double alpha_target, double beta_target, const ZGrid& zgrid,
                                   const CalibrationOptions& options) {
  return calibrate_lambda(ActionSet::from_grid(model, grid), kappa, alpha_target, beta_target, zgrid, options);
}

}  // namespace seqquant
