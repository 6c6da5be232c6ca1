// Command-line front end: design, bounds, baseline, simulate, calibrate,
// table, dry-run.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "seqquant/baselines.hpp"
#include "seqquant/bounds.hpp"
#include "seqquant/config.hpp"
#include "seqquant/errors.hpp"
#include "seqquant/policy_io.hpp"
#include "seqquant/scenario.hpp"
#include "seqquant/simd/kernels.hpp"
#include "seqquant/simulate.hpp"

namespace sq = seqquant;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Globals {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<int> threads;
  bool verbose = false;
  std::string simd = "auto";
  std::vector<int> K;
};

std::string num(double v, const char* f = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string levels(const sq::QuantizerParams& q) {
  std::string s;
  for (std::size_t i = 0; i < q.levels.size(); ++i) s += (i ? " " : "") + num(q.levels[i], "%.6g");
  return s.empty() ? "-" : s;
}

sq::ScenarioConfig load(const Globals& g) {
  if (g.config_path.empty()) throw sq::InvalidArgument("--config is required for this subcommand");
  sq::ScenarioConfig c = sq::load_config(g.config_path);
  if (g.seed) c.simulation.seed = *g.seed;
  if (!g.out_dir.empty()) c.out_dir = g.out_dir;
  if (g.threads) c.threads = *g.threads;
  if (!g.K.empty()) {
    for (int K : g.K)
      if (std::find(c.K_values.begin(), c.K_values.end(), K) == c.K_values.end())
        throw sq::InvalidArgument("K=" + std::to_string(K) + " is not in the config's grid.K");
    c.K_values = g.K;
  }
  c.validate();
  return c;
}

sq::RunOptions run_options(const Globals& g) {
  sq::RunOptions r;
  if (g.verbose) r.log = [](const std::string& line) { std::cerr << line << '\n'; };
  return r;
}

std::filesystem::path ensure_dir(const std::string& dir) {
  std::filesystem::create_directories(dir);
  return dir;
}

int cmd_design(const Globals& g) {
  const sq::ScenarioConfig c = load(g);
  const auto dir = ensure_dir(c.out_dir);
  const sq::RunOptions run = run_options(g);
  for (int K : c.K_values) {
    for (const sq::OperatingPoint& p : c.operating_points()) {
      const sq::DesignRow row = sq::design_optimal(c, K, p, run);
      const std::string stem = sq::row_stem(row);
      sq::save_policy(dir / ("policy_" + stem + ".txt"), row.policy);
      sq::save_levels_csv(dir / ("levels_" + stem + ".csv"), row.policy);
      std::cout << "K=" << K << ' ' << p.label << ": rho(1) = " << num(row.cost, "%.9g") << ", lambda0 = "
                << num(row.costs.lambda0) << ", lambda1 = " << num(row.costs.lambda1) << ", log B = "
                << num(row.policy.log_B, "%.5f") << ", log A = " << num(row.policy.log_A, "%.5f") << ", alpha = "
                << num(row.oc.alpha, "%.6f") << ", beta = " << num(row.oc.beta, "%.6f") << ", ASN0 = "
                << num(row.oc.asn0, "%.6f") << ", ASN1 = " << num(row.oc.asn1, "%.6f")
                << (row.calibrated ? "" : " [calibration tolerance missed]") << "\n  wrote policy_" << stem
                << ".txt, levels_" << stem << ".csv\n";
    }
  }
  return 0;
}

int cmd_bounds(const Globals& g) {
  const sq::ScenarioConfig c = load(g);
  const auto dir = ensure_dir(c.out_dir);
  const sq::RunOptions run = run_options(g);
  std::ofstream csv(dir / "bounds.csv");
  csv << "K,point,L,alpha,beta,kappa,kl01_max,kl10_max,tv_max,asn_kl,asn_tv,bayes_bound,alpha_star,beta_star,"
         "argmax_kl01,argmax_kl10,argmax_tv\n";
  const auto row = [&](int K, const std::string& point, double L, std::optional<std::pair<double, double>> ab,
                       const sq::GridDivergences& d, std::optional<sq::BayesBound> bayes) {
    csv << K << ',' << point << ',' << (L > 0 ? sq::format_double(L) : "") << ',';
    if (ab) {
      const sq::BoundReport b = sq::asn_bounds(d, ab->first, ab->second, c.kappa);
      csv << sq::format_double(ab->first) << ',' << sq::format_double(ab->second) << ','
          << sq::format_double(c.kappa) << ',' << sq::format_double(d.kl01.value) << ','
          << sq::format_double(d.kl10.value) << ',' << sq::format_double(d.tv.value) << ','
          << sq::format_double(b.asn_kl) << ',' << sq::format_double(b.asn_tv) << ',';
      std::cout << "  " << point << ": ASN bound (KL) " << num(b.asn_kl, "%.6f") << ", ASN bound (TV) "
                << num(b.asn_tv, "%.6f") << '\n';
    } else {
      csv << ",," << sq::format_double(c.kappa) << ',' << sq::format_double(d.kl01.value) << ','
          << sq::format_double(d.kl10.value) << ',' << sq::format_double(d.tv.value) << ",,,";
    }
    if (bayes) {
      csv << sq::format_double(bayes->bound) << ',' << sq::format_double(bayes->alpha_star) << ','
          << sq::format_double(bayes->beta_star);
      std::cout << "  " << point << ": Bayes cost bound " << num(bayes->bound, "%.6f") << " at alpha* = "
                << num(bayes->alpha_star, "%.4g") << ", beta* = " << num(bayes->beta_star, "%.4g") << '\n';
    } else {
      csv << ",,";
    }
    csv << ',' << levels(d.kl01.argmax_theta) << ',' << levels(d.kl10.argmax_theta) << ','
        << levels(d.tv.argmax_theta) << '\n';
  };

  for (int K : c.K_values) {
    const sq::KSummary s = sq::summarize_grid(c, K, run);
    const auto& d = s.divergences;
    std::cout << "K=" << K << " (" << s.candidates << " candidates)\n"
              << "  max KL(Q0||Q1) = " << num(d.kl01.value, "%.6f") << " at theta = " << levels(d.kl01.argmax_theta)
              << "\n  max KL(Q1||Q0) = " << num(d.kl10.value, "%.6f") << " at theta = "
              << levels(d.kl10.argmax_theta) << "\n  max TV         = " << num(d.tv.value, "%.6f")
              << " at theta = " << levels(d.tv.argmax_theta) << '\n';
    for (const sq::OperatingPoint& p : c.operating_points()) {
      if (p.target)
        row(K, p.label, 0.0, std::make_pair(p.target->alpha, p.target->beta), d, std::nullopt);
      else
        row(K, p.label, p.L, std::nullopt, d, sq::bayes_cost_bound(p.design, d.kl01.value, d.kl10.value));
    }
  }
  if (!c.sweep_L.empty()) {
    const sq::KSummary s = sq::summarize_grid(c, c.sweep_K, run);
    std::cout << "Bayes bound sweep, K=" << c.sweep_K << '\n';
    for (double L : c.sweep_L) {
      const sq::DesignConfig design{(1.0 - c.kappa) * L, c.kappa * L, c.kappa};
      row(c.sweep_K, "sweep_L" + num(L, "%g"), L, std::nullopt, s.divergences,
          sq::bayes_cost_bound(design, s.divergences.kl01.value, s.divergences.kl10.value));
    }
  }
  std::cout << "wrote " << (dir / "bounds.csv").string() << '\n';
  return 0;
}

int cmd_baseline(const Globals& g) {
  const sq::ScenarioConfig c = load(g);
  const sq::ScanOptions scan{c.candidate_budget, c.threads};
  const auto t = c.grid.transform;
  for (int K : c.K_values) {
    std::cout << "K=" << K << '\n';
    const auto show = [&](const std::string& name, const sq::QuantizerParams& q) {
      std::cout << "  " << name << ": levels " << levels(q) << ", asymptotic objective "
                << num(sq::asymptotic_objective(c.model, q, t, c.kappa), "%.9g") << '\n';
    };
    for (sq::BaselineKind kind : c.baselines) {
      if (kind == sq::BaselineKind::Asymptotic)
        show("asymptotic", sq::asymptotic_optimal(c.model, c.grid_for(K), c.kappa, scan).theta);
      else if (kind == sq::BaselineKind::LloydMax)
        show("lloyd_max", sq::lloyd_max(K, c.lloyd_max_tol));
    }
    for (std::size_t i = 0; i < c.fixed_user.size(); ++i)
      if (c.fixed_user[i].K() == K) show("fixed_" + std::to_string(i + 1), c.fixed_user[i]);
  }
  return 0;
}

int cmd_simulate(const Globals& g, const std::string& policy_path, std::optional<std::int64_t> runs) {
  const sq::Policy policy = sq::load_policy(policy_path);
  sq::SimulationSpec spec;
  sq::EvaluationOptions eval = sq::ScenarioConfig{}.evaluation_options();
  if (!g.config_path.empty()) {
    const sq::ScenarioConfig c = load(g);
    spec = c.simulation;
    eval = c.evaluation_options();
  }
  if (g.seed) spec.seed = *g.seed;
  if (runs) spec.n_runs = *runs;
  if (g.threads) spec.threads = *g.threads;
  spec.validate();
  const std::uint64_t seed = spec.seed;
  for (const sq::Hypothesis h : {sq::Hypothesis::H0, sq::Hypothesis::H1}) {
    spec.truth = h;
    spec.seed = seed + (h == sq::Hypothesis::H1 ? 1 : 0);
    const sq::TestRunStats s = sq::simulate(policy.model, policy, spec);
    std::cout << (h == sq::Hypothesis::H0 ? "H0" : "H1") << ": runs " << s.n_runs << ", mean tau "
              << num(s.mean_tau, "%.6f") << " (se " << num(s.stderr_tau, "%.2g") << "), error rate "
              << num(s.error_rate, "%.6f") << " (se " << num(s.stderr_error, "%.2g") << "), truncated "
              << s.truncated_runs << '\n';
  }
  const sq::OperatingCharacteristics oc = sq::evaluate_policy(policy, eval);
  std::cout << "policy evaluation: alpha " << num(oc.alpha, "%.6f") << ", beta " << num(oc.beta, "%.6f") << ", ASN0 "
            << num(oc.asn0, "%.6f") << ", ASN1 " << num(oc.asn1, "%.6f") << '\n';
  return 0;
}

int cmd_calibrate(const Globals& g) {
  const sq::ScenarioConfig c = load(g);
  if (c.mode != sq::DesignMode::NeymanPearson) throw sq::InvalidArgument("calibrate needs design.mode: neyman_pearson");
  const sq::RunOptions run = run_options(g);
  bool missed = false;
  for (int K : c.K_values) {
    for (const sq::OperatingPoint& p : c.operating_points()) {
      const sq::DesignRow row = sq::design_optimal(c, K, p, run);
      missed = missed || !row.calibrated;
      std::cout << "K=" << K << ' ' << p.label << ": lambda0 = " << num(row.costs.lambda0, "%.9g")
                << ", lambda1 = " << num(row.costs.lambda1, "%.9g") << ", alpha = " << num(row.oc.alpha, "%.6f")
                << ", beta = " << num(row.oc.beta, "%.6f") << ", relative error "
                << num(100.0 * row.calibration_error.value_or(0.0), "%.2f") << "% after " << row.evaluations
                << " designs" << (row.calibrated ? "" : " [tolerance missed]") << '\n';
    }
  }
  return missed ? kExitNumerical : 0;
}

int cmd_table(const Globals& g) {
  const sq::ScenarioConfig c = load(g);
  const sq::ScenarioReport report = sq::run_scenario(c, run_options(g));
  sq::write_report(std::cout, report);
  std::cout << "\nwrote " << c.out_dir << "/table.csv" << (report.sweep.empty() ? "" : ", bounds_vs_L.csv")
            << ", report.txt, policies and levels\n";
  return report.failed ? kExitNumerical : 0;
}

int cmd_dry_run(const Globals& g) {
  std::cout << sq::plan_scenario(load(g));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive quantizers for sequential hypothesis tests"};
  app.require_subcommand(1);
  Globals g;
  std::string policy_path;
  std::optional<std::int64_t> runs;

  app.add_option("--config", g.config_path, "Scenario YAML file");
  app.add_option("--seed", g.seed, "Monte Carlo seed (overrides the config)");
  app.add_option("--out-dir", g.out_dir, "Output directory (overrides the config)");
  app.add_option("--threads", g.threads, "Worker threads; 0 uses every core")->check(CLI::NonNegativeNumber);
  app.add_flag("-v,--verbose", g.verbose, "Progress on stderr");
  app.add_option("--simd", g.simd, "Kernel backend: auto, scalar, avx2, neon");
  app.add_option("--K", g.K, "Restrict to these K values");

  auto* design = app.add_subcommand("design", "Solve for the optimal policy; write policy and levels files");
  auto* bounds = app.add_subcommand("bounds", "ASN and Bayes cost bounds with the maximizing quantizers");
  auto* baseline = app.add_subcommand("baseline", "Asymptotic and Lloyd-Max quantizers");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo runs of a stored policy under H0 and H1");
  simulate->add_option("--policy", policy_path, "Policy file")->required();
  simulate->add_option("--runs", runs, "Runs per hypothesis (overrides the config)");
  auto* calibrate = app.add_subcommand("calibrate", "Error costs meeting the target error probabilities");
  auto* table = app.add_subcommand("table", "Full scenario: designs, baselines, bounds, simulation");
  auto* dry = app.add_subcommand("dry-run", "Validate the config and print the planned work");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    sq::simd::set_active_backend(sq::simd::parse_backend(g.simd));
    if (*design) return cmd_design(g);
    if (*bounds) return cmd_bounds(g);
    if (*baseline) return cmd_baseline(g);
    if (*simulate) return cmd_simulate(g, policy_path, runs);
    if (*calibrate) return cmd_calibrate(g);
    if (*table) return cmd_table(g);
    if (*dry) return cmd_dry_run(g);
  } catch (const sq::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const sq::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
