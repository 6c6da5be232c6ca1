#include "seqquant/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "seqquant/baselines.hpp"
#include "seqquant/divergence.hpp"
#include "seqquant/errors.hpp"
#include "seqquant/policy_io.hpp"

namespace seqquant {
namespace {

void say(const RunOptions& run, const std::string& line) {
  if (run.log) run.log(line);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string levels_text(const QuantizerParams& q, const char* sep = " ") {
  std::string s;
  for (std::size_t k = 0; k < q.levels.size(); ++k) s += (k ? sep : "") + fmt("%.4g", q.levels[k]);
  return s.empty() ? "-" : s;
}

ScanOptions scan_options(const ScenarioConfig& c) { return {c.candidate_budget, c.threads}; }

void fill_from_calibration(DesignRow& row, const CalibrationResult& r, bool ok) {
  row.costs = r.design;
  row.policy = r.policy;
  row.oc = r.achieved;
  row.cost = r.cost;
  row.calibration_error = r.relative_error;
  row.calibrated = ok;
  row.evaluations = r.evaluations;
}

void calibrate_into(DesignRow& row, const ActionSet& actions, const ScenarioConfig& config,
                    const OperatingPoint& point, const ZGrid& zgrid, const RunOptions& run) {
  CalibrationOptions opt = config.calibration_options();
  if (point.design.lambda0 > 0.0 && point.design.lambda1 > 0.0) {
    opt.lambda0_init = point.design.lambda0;
    opt.lambda1_init = point.design.lambda1;
  }
  try {
    fill_from_calibration(row, calibrate_lambda(actions, config.kappa, point.target->alpha, point.target->beta, zgrid,
                                                opt),
                          true);
  } catch (const CalibrationFailure& e) {
    if (e.best().evaluations == 0) throw;
    fill_from_calibration(row, e.best(), false);
    say(run, "  calibration missed the tolerance; keeping the closest design");
  }
  row.asn_normalized = normalized_asn(row.oc, *point.target, config.kappa);
}

void solve_into(DesignRow& row, const ActionSet& actions, const ScenarioConfig& config, const OperatingPoint& point,
                const ZGrid& zgrid) {
  row.costs = point.design;
  const ValueFunction vf = solve_rho(actions, point.design, zgrid, config.solver_options());
  row.policy = extract_policy(vf, actions, config.threads);
  row.oc = evaluate_policy(row.policy, config.evaluation_options());
  row.cost = vf.cost();
  row.evaluations = 1;
}

DesignRow blank_row(int K, const std::string& design, const OperatingPoint& point) {
  DesignRow row;
  row.K = K;
  row.design = design;
  row.point = point.label;
  row.target = point.target;
  row.L = point.L;
  return row;
}

void log_row(const RunOptions& run, const DesignRow& r) {
  if (!run.log) return;
  std::ostringstream s;
  s << "  K=" << r.K << ' ' << r.design << ' ' << r.point << ": lambda=(" << fmt("%.6g", r.costs.lambda0) << ", "
    << fmt("%.6g", r.costs.lambda1) << ") alpha=" << fmt("%.5f", r.oc.alpha) << " beta=" << fmt("%.5f", r.oc.beta)
    << " asn0=" << fmt("%.5f", r.oc.asn0) << " asn1=" << fmt("%.5f", r.oc.asn1)
    << " cost=" << fmt("%.6f", r.cost);
  if (r.asn_normalized) s << " asn_norm=" << fmt("%.5f", *r.asn_normalized);
  run.log(s.str());
}

std::string opt_num(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

double normalized_asn(const OperatingCharacteristics& oc, const ErrorTarget& t, double kappa) {
  double out = 0.0;
  if (kappa < 1.0) out += (1.0 - kappa) * oc.asn0 * kl_bernoulli(t.alpha, t.beta) / kl_bernoulli(oc.alpha, oc.beta);
  if (kappa > 0.0) out += kappa * oc.asn1 * kl_bernoulli(t.beta, t.alpha) / kl_bernoulli(oc.beta, oc.alpha);
  return out;
}

KSummary summarize_grid(const ScenarioConfig& config, int K, const RunOptions& run) {
  KSummary s;
  s.K = K;
  const ThetaGrid grid = config.grid_for(K);
  s.candidates = grid.candidate_count();
  say(run, "K=" + std::to_string(K) + ": scanning " + std::to_string(s.candidates) + " candidates");
  s.divergences = grid_divergences(config.model, grid, scan_options(config));
  for (BaselineKind kind : config.baselines) {
    if (kind == BaselineKind::Asymptotic)
      s.asymptotic = asymptotic_optimal(config.model, grid, config.kappa, scan_options(config));
    else if (kind == BaselineKind::LloydMax)
      s.lloyd_max = lloyd_max(K, config.lloyd_max_tol);
  }
  return s;
}

DesignRow design_optimal(const ScenarioConfig& config, int K, const OperatingPoint& point, const RunOptions& run) {
  DesignRow row = blank_row(K, "optimal", point);
  const ActionSet actions = ActionSet::from_grid(config.model, config.grid_for(K));
  const ZGrid zgrid = config.zgrid.make_for(point);
  if (point.target)
    calibrate_into(row, actions, config, point, zgrid, run);
  else
    solve_into(row, actions, config, point, zgrid);
  log_row(run, row);
  return row;
}

DesignRow design_fixed(const ScenarioConfig& config, int K, const std::string& name, const QuantizerParams& theta,
                       const OperatingPoint& point, const RunOptions& run) {
  if (theta.K() != K) throw InvalidArgument("fixed quantizer has " + std::to_string(theta.K()) + " cells, not " +
                                            std::to_string(K));
  DesignRow row = blank_row(K, name, point);
  row.theta = theta;
  const ActionSet actions = ActionSet::from_list(config.model, {theta}, config.grid.transform);
  const ZGrid zgrid = config.zgrid.make_for(point);
  if (point.target)
    calibrate_into(row, actions, config, point, zgrid, run);
  else
    solve_into(row, actions, config, point, zgrid);
  log_row(run, row);
  return row;
}

void attach_bounds(DesignRow& row, const ScenarioConfig& config, const GridDivergences& grid_div) {
  double kl01 = grid_div.kl01.value;
  double kl10 = grid_div.kl10.value;
  double tv = grid_div.tv.value;
  if (row.theta) {
    const auto t = config.grid.transform;
    kl01 = std::max(kl01, quantized_divergence(config.model, *row.theta, t, DivergenceKind::kl01()));
    kl10 = std::max(kl10, quantized_divergence(config.model, *row.theta, t, DivergenceKind::kl10()));
    tv = std::max(tv, quantized_divergence(config.model, *row.theta, t, DivergenceKind::tv()));
  }
  GridDivergences d = grid_div;
  d.kl01.value = kl01;
  d.kl10.value = kl10;
  d.tv.value = tv;
  const BoundReport b = asn_bounds(d, row.oc.alpha, row.oc.beta, config.kappa);
  row.kl_bound = b.asn_kl;
  row.tv_bound = b.asn_tv;
}

void attach_simulation(DesignRow& row, const ScenarioConfig& config) {
  SimulationSpec spec = config.simulation;
  spec.threads = config.threads;
  spec.truth = Hypothesis::H0;
  row.mc_h0 = simulate(config.model, row.policy, spec);
  spec.truth = Hypothesis::H1;
  spec.seed = config.simulation.seed + 1;
  row.mc_h1 = simulate(config.model, row.policy, spec);
}

std::vector<SweepRow> bayes_sweep(const ScenarioConfig& config, const GridDivergences& grid_div,
                                  const std::optional<QuantizerParams>& fixed, const RunOptions& run) {
  std::vector<SweepRow> out;
  const ActionSet actions = ActionSet::from_grid(config.model, config.grid_for(config.sweep_K));
  std::optional<ActionSet> single;
  if (fixed) single = ActionSet::from_list(config.model, {*fixed}, config.grid.transform);
  std::vector<std::int32_t> warm;
  for (double L : config.sweep_L) {
    SweepRow row;
    row.L = L;
    const DesignConfig design{(1.0 - config.kappa) * L, config.kappa * L, config.kappa};
    row.bayes = bayes_cost_bound(design, grid_div.kl01.value, grid_div.kl10.value);
    OperatingPoint point;
    point.design = design;
    point.L = L;
    const ZGrid zgrid = config.zgrid.make_for(point);
    row.achieved_cost = solve_rho(actions, design, zgrid, config.solver_options()).cost();
    if (single) row.fixed_cost = solve_rho(*single, design, zgrid, config.solver_options()).cost();
    say(run, "  sweep L=" + fmt("%g", L) + ": bound " + fmt("%.6f", row.bayes.bound) + ", optimal cost " +
                 fmt("%.6f", row.achieved_cost));
    out.push_back(row);
  }
  return out;
}

ScenarioReport run_scenario(const ScenarioConfig& config, const RunOptions& run) {
  config.validate();
  ScenarioReport report;
  report.name = config.name;
  const auto note = [&](const std::string& what, bool hard) {
    report.issues.push_back(what);
    report.failed = report.failed || hard;
    say(run, "  issue: " + what);
  };

  for (int K : config.K_values) {
    KSummary summary;
    try {
      summary = summarize_grid(config, K, run);
    } catch (const NumericalError& e) {
      note("K=" + std::to_string(K) + ": " + e.what(), true);
      continue;
    }
    std::vector<std::pair<std::string, QuantizerParams>> fixed;
    for (BaselineKind kind : config.baselines) {
      if (kind == BaselineKind::Asymptotic && summary.asymptotic)
        fixed.emplace_back(to_string(kind), summary.asymptotic->theta);
      if (kind == BaselineKind::LloydMax && summary.lloyd_max) fixed.emplace_back(to_string(kind), *summary.lloyd_max);
    }
    for (std::size_t i = 0; i < config.fixed_user.size(); ++i)
      if (config.fixed_user[i].K() == K) fixed.emplace_back("fixed_" + std::to_string(i + 1), config.fixed_user[i]);

    for (OperatingPoint point : config.operating_points()) {
      const std::string where = "K=" + std::to_string(K) + " " + point.label;
      say(run, where + ": optimal design");
      std::vector<DesignRow> rows;
      try {
        rows.push_back(design_optimal(config, K, point, run));
        if (point.target) point.design = rows.back().costs;
      } catch (const NumericalError& e) {
        note(where + " optimal: " + e.what(), true);
      }
      for (const auto& [name, theta] : fixed) {
        try {
          rows.push_back(design_fixed(config, K, name, theta, point, run));
        } catch (const NumericalError& e) {
          note(where + " " + name + ": " + e.what(), true);
        }
      }
      for (DesignRow& row : rows) {
        if (!row.calibrated)
          note(where + " " + row.design + ": calibration off by " + fmt("%.2f", 100.0 * *row.calibration_error) +
                   "% (tolerance " + fmt("%.2f", 100.0 * config.calibration_rel_tol) + "%)",
               false);
        attach_bounds(row, config, summary.divergences);
        if (config.simulate) {
          say(run, "  simulating " + row.design);
          attach_simulation(row, config);
        }
        report.rows.push_back(std::move(row));
      }
    }
    report.per_K.push_back(std::move(summary));
  }

  if (!config.sweep_L.empty()) {
    say(run, "Bayes bound sweep at K=" + std::to_string(config.sweep_K));
    try {
      const ThetaGrid grid = config.grid_for(config.sweep_K);
      const GridDivergences div = grid_divergences(config.model, grid, scan_options(config));
      std::optional<QuantizerParams> fixed;
      for (BaselineKind kind : config.baselines)
        if (kind == BaselineKind::Asymptotic) fixed = asymptotic_optimal_theta(config.model, grid, config.kappa,
                                                                               scan_options(config));
      report.sweep = bayes_sweep(config, div, fixed, run);
    } catch (const NumericalError& e) {
      note(std::string("bound sweep: ") + e.what(), true);
    }
  }

  if (run.write_files) write_outputs(config.out_dir, report);
  return report;
}

std::string plan_scenario(const ScenarioConfig& config) {
  config.validate();
  std::ostringstream s;
  s << "scenario " << config.name << "\n";
  s << "model " << to_string(config.model.kind()) << ' '
    << (config.model.kind() == ModelKind::MeanShift ? "mu=" + fmt("%g", config.model.mu())
                                                    : "sigma2=" + fmt("%g", config.model.sigma2()))
    << ", transform " << to_string(config.grid.transform) << "\n";
  s << "theta grid [" << config.grid.theta_min << ", " << config.grid.theta_max << "] step " << config.grid.step
    << " (" << config.grid.num_points() << " points)\n";
  s << "design " << to_string(config.mode) << ", kappa " << config.kappa << "\n";
  const auto points = config.operating_points();
  for (int K : config.K_values) {
    const ThetaGrid g = config.grid_for(K);
    const std::uint64_t n = g.candidate_count();
    s << "K=" << K << ": " << n << " candidates" << (n > config.candidate_budget ? " (OVER BUDGET)" : "") << "\n";
    for (const OperatingPoint& p : points) {
      const ZGrid z = config.zgrid.make_for(p);
      s << "  " << p.label << ": " << (p.target ? "calibrate " : "solve ") << "optimal";
      for (BaselineKind b : config.baselines) s << ", " << to_string(b);
      for (const QuantizerParams& q : config.fixed_user)
        if (q.K() == K) s << ", fixed [" << levels_text(q, ",") << "]";
      s << "; z-grid " << z.n_points() << " points over log z [" << fmt("%.4g", z.log_z_min()) << ", "
        << fmt("%.4g", z.log_z_max()) << "]\n";
    }
  }
  if (!config.sweep_L.empty()) {
    s << "Bayes bound sweep at K=" << config.sweep_K << " over L =";
    for (double L : config.sweep_L) s << ' ' << L;
    s << "\n";
  }
  if (config.simulate)
    s << "Monte Carlo: " << config.simulation.n_runs << " runs per hypothesis and design, seed "
      << config.simulation.seed << "\n";
  else
    s << "Monte Carlo: off\n";
  s << "outputs in " << config.out_dir << "\n";
  return s.str();
}

std::string row_stem(const DesignRow& row) { return "K" + std::to_string(row.K) + "_" + row.point + "_" + row.design; }

void write_table_csv(std::ostream& out, const std::vector<DesignRow>& rows) {
  out << "K,design,point,alpha_target,beta_target,L,lambda0,lambda1,kappa,cost,alpha,beta,asn0,asn1,asn_kappa,"
         "asn_normalized,kl_bound,tv_bound,calibration_error,calibrated,mc_asn0,mc_asn0_stderr,mc_alpha,"
         "mc_alpha_stderr,mc_asn1,mc_asn1_stderr,mc_beta,mc_beta_stderr\n";
  for (const DesignRow& r : rows) {
    out << r.K << ',' << r.design << ',' << r.point << ','
        << (r.target ? format_double(r.target->alpha) : "") << ',' << (r.target ? format_double(r.target->beta) : "")
        << ',' << (r.L > 0.0 ? format_double(r.L) : "") << ',' << format_double(r.costs.lambda0) << ','
        << format_double(r.costs.lambda1) << ',' << format_double(r.costs.kappa) << ',' << format_double(r.cost)
        << ',' << format_double(r.oc.alpha) << ',' << format_double(r.oc.beta) << ',' << format_double(r.oc.asn0)
        << ',' << format_double(r.oc.asn1) << ',' << format_double(r.oc.asn_kappa) << ','
        << opt_num(r.asn_normalized) << ',' << format_double(r.kl_bound) << ',' << format_double(r.tv_bound) << ','
        << opt_num(r.calibration_error) << ',' << (r.calibrated ? 1 : 0);
    const auto mc = [&](const std::optional<TestRunStats>& s) {
      if (!s) {
        out << ",,,,";
        return;
      }
      out << ',' << format_double(s->mean_tau) << ',' << format_double(s->stderr_tau) << ','
          << format_double(s->error_rate) << ',' << format_double(s->stderr_error);
    };
    mc(r.mc_h0);
    mc(r.mc_h1);
    out << '\n';
  }
}

void write_bounds_vs_L_csv(std::ostream& out, const std::vector<SweepRow>& sweep) {
  out << "L,bayes_bound,achieved_cost\n";
  for (const SweepRow& r : sweep)
    out << format_double(r.L) << ',' << format_double(r.bayes.bound) << ',' << format_double(r.achieved_cost) << '\n';
}

void write_report(std::ostream& out, const ScenarioReport& report) {
  out << "scenario " << report.name << "\n\n";
  for (const KSummary& k : report.per_K) {
    out << "K=" << k.K << " (" << k.candidates << " candidates)\n";
    out << "  max KL(Q0||Q1) " << fmt("%.6f", k.divergences.kl01.value) << " at "
        << levels_text(k.divergences.kl01.argmax_theta) << "\n";
    out << "  max KL(Q1||Q0) " << fmt("%.6f", k.divergences.kl10.value) << " at "
        << levels_text(k.divergences.kl10.argmax_theta) << "\n";
    out << "  max TV         " << fmt("%.6f", k.divergences.tv.value) << " at "
        << levels_text(k.divergences.tv.argmax_theta) << "\n";
    if (k.asymptotic)
      out << "  asymptotic theta " << levels_text(k.asymptotic->theta) << ", objective "
          << fmt("%.6f", k.asymptotic->objective) << "\n";
    if (k.lloyd_max) out << "  Lloyd-Max levels " << levels_text(*k.lloyd_max) << "\n";
  }
  out << "\n";
  char line[512];
  std::snprintf(line, sizeof line, "%-3s %-11s %-12s %10s %10s %9s %9s %9s %9s %9s %9s %9s %9s %s\n", "K", "design",
                "point", "lambda0", "lambda1", "alpha", "beta", "asn0", "asn1", "asn_norm", "cost", "KL bnd", "TV bnd",
                "MC asn0 (se) / MC asn1 (se)");
  out << line;
  for (const DesignRow& r : report.rows) {
    std::string mc;
    if (r.mc_h0 && r.mc_h1)
      mc = fmt("%.4f", r.mc_h0->mean_tau) + " (" + fmt("%.4f", r.mc_h0->stderr_tau) + ") / " +
           fmt("%.4f", r.mc_h1->mean_tau) + " (" + fmt("%.4f", r.mc_h1->stderr_tau) + ")";
    std::snprintf(line, sizeof line, "%-3d %-11s %-12s %10.5g %10.5g %9.5f %9.5f %9.5f %9.5f %9s %9.4f %9.5f %9.5f %s%s\n",
                  r.K, r.design.c_str(), r.point.c_str(), r.costs.lambda0, r.costs.lambda1, r.oc.alpha, r.oc.beta,
                  r.oc.asn0, r.oc.asn1, r.asn_normalized ? fmt("%.5f", *r.asn_normalized).c_str() : "-", r.cost,
                  r.kl_bound, r.tv_bound, mc.c_str(), r.calibrated ? "" : "  [uncalibrated]");
    out << line;
  }
  if (!report.sweep.empty()) {
    out << "\nBayes bound against L\n";
    std::snprintf(line, sizeof line, "%10s %12s %10s %10s %14s %14s\n", "L", "bound", "alpha*", "beta*",
                  "optimal cost", "fixed cost");
    out << line;
    for (const SweepRow& r : report.sweep) {
      std::snprintf(line, sizeof line, "%10g %12.6f %10.3g %10.3g %14.6f %14s\n", r.L, r.bayes.bound,
                    r.bayes.alpha_star, r.bayes.beta_star, r.achieved_cost,
                    r.fixed_cost ? fmt("%.6f", *r.fixed_cost).c_str() : "-");
      out << line;
    }
  }
  if (!report.issues.empty()) {
    out << "\nissues\n";
    for (const std::string& i : report.issues) out << "  " << i << "\n";
  }
}

void write_outputs(const std::filesystem::path& dir, const ScenarioReport& report) {
  std::filesystem::create_directories(dir);
  const auto open = [&](const std::string& name) {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("table.csv");
    write_table_csv(f, report.rows);
  }
  if (!report.sweep.empty()) {
    auto f = open("bounds_vs_L.csv");
    write_bounds_vs_L_csv(f, report.sweep);
  }
  {
    auto f = open("report.txt");
    write_report(f, report);
  }
  for (const DesignRow& r : report.rows) {
    save_policy(dir / ("policy_" + row_stem(r) + ".txt"), r.policy);
    if (r.theta)
      save_overlay_csv(dir / ("theta_" + row_stem(r) + ".csv"), *r.theta);
    else
      save_levels_csv(dir / ("levels_" + row_stem(r) + ".csv"), r.policy);
  }
}

}  // namespace seqquant
