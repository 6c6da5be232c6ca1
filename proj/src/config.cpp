#include "seqquant/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "seqquant/errors.hpp"

namespace seqquant {

namespace {

void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) throw InvalidArgument("config: '" + where + "' must be a mapping");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!ok.count(key)) throw InvalidArgument("config: unknown key '" + key + "' in '" + where + "'");
  }
}

template <class T>
T get(const YAML::Node& node, const char* key, const std::string& where) {
  if (!node[key]) throw InvalidArgument("config: missing '" + where + "." + key + "'");
  try {
    return node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw InvalidArgument("config: bad value for '" + where + "." + key + "'");
  }
}

template <class T>
void maybe(const YAML::Node& node, const char* key, const std::string& where, T& out) {
  if (node && node[key]) out = get<T>(node, key, where);
}

template <class T>
std::vector<T> scalar_or_list(const YAML::Node& node, const char* key, const std::string& where) {
  const YAML::Node v = node[key];
  if (!v) return {};
  try {
    if (v.IsSequence()) return v.as<std::vector<T>>();
    return {v.as<T>()};
  } catch (const YAML::Exception&) {
    throw InvalidArgument("config: bad value for '" + where + "." + key + "'");
  }
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string to_string(DesignMode mode) {
  return mode == DesignMode::Bayesian ? "bayesian" : "neyman_pearson";
}

ZGrid ZGridSpec::make_for(const OperatingPoint& point) const {
  if (log_z_min && log_z_max) return ZGrid::make(*log_z_min, *log_z_max, n_points);
  if (point.target) return ZGrid::around_wald_thresholds(point.target->alpha, point.target->beta, n_points, margin);
  return ZGrid::for_costs(point.design.lambda0, point.design.lambda1, n_points, margin);
}

ThetaGrid ScenarioConfig::grid_for(int K) const {
  ThetaGrid g = grid;
  g.K = K;
  return g;
}

std::vector<OperatingPoint> ScenarioConfig::operating_points() const {
  std::vector<OperatingPoint> points;
  if (mode == DesignMode::NeymanPearson) {
    for (const ErrorTarget& t : targets) {
      OperatingPoint p;
      p.target = t;
      p.design.kappa = kappa;
      p.label = "a" + format_number(t.alpha) + "_b" + format_number(t.beta);
      points.push_back(p);
    }
    return points;
  }
  if (lambda0 && lambda1) {
    OperatingPoint p;
    p.design = {*lambda0, *lambda1, kappa};
    p.label = "l0_" + format_number(*lambda0) + "_l1_" + format_number(*lambda1);
    points.push_back(p);
  }
  for (double L : L_values) {
    OperatingPoint p;
    p.design = {(1.0 - kappa) * L, kappa * L, kappa};
    p.L = L;
    p.label = "L" + format_number(L);
    points.push_back(p);
  }
  return points;
}

SolverOptions ScenarioConfig::solver_options() const {
  SolverOptions o;
  o.tol = solver_tol;
  o.max_iter = solver_max_iter;
  o.mode = solver_mode;
  o.threads = threads;
  return o;
}

CalibrationOptions ScenarioConfig::calibration_options() const {
  CalibrationOptions o;
  o.rel_tol = calibration_rel_tol;
  o.max_outer = calibration_max_outer;
  o.max_evaluations = calibration_max_evaluations;
  o.solver = solver_options();
  o.evaluation = evaluation;
  return o;
}

void ScenarioConfig::validate() const {
  if (name.empty()) throw InvalidArgument("config: name must not be empty");
  if (K_values.empty()) throw InvalidArgument("config: grid.K needs at least one value");
  for (int K : K_values) {
    if (K < 2) throw InvalidArgument("config: designed quantizers need K >= 2");
    grid_for(K).validate();
  }
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw InvalidArgument("config: design.kappa must lie in [0, 1]");
  if (mode == DesignMode::NeymanPearson) {
    if (targets.empty()) throw InvalidArgument("config: neyman_pearson design needs design.targets");
    for (const ErrorTarget& t : targets)
      if (!(t.alpha > 0.0 && t.beta > 0.0 && t.alpha + t.beta < 1.0))
        throw InvalidArgument("config: targets need alpha, beta > 0 and alpha + beta < 1");
  } else {
    if (L_values.empty() && !(lambda0 && lambda1))
      throw InvalidArgument("config: bayesian design needs design.L or design.lambda0/lambda1");
    if (lambda0.has_value() != lambda1.has_value())
      throw InvalidArgument("config: give both design.lambda0 and design.lambda1");
    for (double L : L_values)
      if (!(L > 0.0 && std::isfinite(L))) throw InvalidArgument("config: design.L values must be positive");
    if (lambda0) DesignConfig{*lambda0, *lambda1, kappa}.validate();
  }
  for (double L : sweep_L)
    if (!(L > 0.0 && std::isfinite(L))) throw InvalidArgument("config: bound_sweep.L values must be positive");
  if (!sweep_L.empty() && sweep_K < 2) throw InvalidArgument("config: bound_sweep.K must be >= 2");
  for (const QuantizerParams& q : fixed_user) q.validate();
  if (zgrid.n_points < ZGrid::kMinPoints) throw InvalidArgument("config: zgrid.n_points must be >= 201");
  if (!(zgrid.margin > 0.0)) throw InvalidArgument("config: zgrid.margin must be positive");
  if (zgrid.log_z_min.has_value() != zgrid.log_z_max.has_value())
    throw InvalidArgument("config: give both zgrid.log_z_min and zgrid.log_z_max");
  if (zgrid.log_z_min && !(*zgrid.log_z_min < 0.0 && *zgrid.log_z_max > 0.0))
    throw InvalidArgument("config: the z-grid range must straddle log z = 0");
  if (!(solver_tol > 0.0) || solver_max_iter < 1) throw InvalidArgument("config: bad solver settings");
  if (!(calibration_rel_tol > 0.0) || calibration_max_outer < 1 || calibration_max_evaluations < 1)
    throw InvalidArgument("config: bad calibration settings");
  if (!(evaluation.tol > 0.0) || evaluation.max_iter < 1 || evaluation.refine < 1 || evaluation.max_refine > 65536 ||
      !(evaluation.refine_tol > 0.0))
    throw InvalidArgument("config: bad evaluation settings");
  simulation.validate();
  if (threads < 0) throw InvalidArgument("config: threads must be >= 0");
  if (out_dir.empty()) throw InvalidArgument("config: output.dir must not be empty");
}

ScenarioConfig parse_config(const std::string& yaml_text) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw InvalidArgument(std::string("config: YAML syntax error: ") + e.what());
  }
  if (!root.IsMap()) throw InvalidArgument("config: top level must be a mapping");
  check_keys(root, "config",
             {"name", "model", "grid", "design", "baselines", "fixed_quantizers", "zgrid", "solver", "calibration",
              "lloyd_max", "evaluation", "simulation", "candidate_budget", "threads", "output"});

  ScenarioConfig c;
  maybe(root, "name", "config", c.name);

  const YAML::Node model = root["model"];
  if (!model) throw InvalidArgument("config: missing 'model'");
  check_keys(model, "model", {"kind", "snr_db", "parameter"});
  const ModelKind kind = parse_model_kind(get<std::string>(model, "kind", "model"));
  if (model["snr_db"] && model["parameter"]) throw InvalidArgument("config: give model.snr_db or model.parameter");
  if (model["snr_db"])
    c.model = ObservationModel::from_snr_db(kind, get<double>(model, "snr_db", "model"));
  else
    c.model = make_model(kind, get<double>(model, "parameter", "model"));

  const YAML::Node grid = root["grid"];
  if (!grid) throw InvalidArgument("config: missing 'grid'");
  check_keys(grid, "grid", {"theta_min", "theta_max", "step", "transform", "K"});
  c.grid.theta_min = get<double>(grid, "theta_min", "grid");
  c.grid.theta_max = get<double>(grid, "theta_max", "grid");
  c.grid.step = get<double>(grid, "step", "grid");
  if (grid["transform"]) c.grid.transform = parse_transform(get<std::string>(grid, "transform", "grid"));
  c.K_values = scalar_or_list<int>(grid, "K", "grid");
  if (!c.K_values.empty()) c.grid.K = c.K_values.front();

  const YAML::Node design = root["design"];
  if (!design) throw InvalidArgument("config: missing 'design'");
  check_keys(design, "design", {"mode", "kappa", "targets", "L", "lambda0", "lambda1", "bound_sweep"});
  const auto mode = get<std::string>(design, "mode", "design");
  if (mode == "neyman_pearson")
    c.mode = DesignMode::NeymanPearson;
  else if (mode == "bayesian")
    c.mode = DesignMode::Bayesian;
  else
    throw InvalidArgument("config: design.mode must be 'neyman_pearson' or 'bayesian'");
  maybe(design, "kappa", "design", c.kappa);
  if (const YAML::Node targets = design["targets"]) {
    if (!targets.IsSequence()) throw InvalidArgument("config: design.targets must be a list");
    for (const auto& t : targets) {
      check_keys(t, "design.targets[]", {"alpha", "beta"});
      c.targets.push_back({get<double>(t, "alpha", "design.targets[]"), get<double>(t, "beta", "design.targets[]")});
    }
  }
  c.L_values = scalar_or_list<double>(design, "L", "design");
  if (design["lambda0"]) c.lambda0 = get<double>(design, "lambda0", "design");
  if (design["lambda1"]) c.lambda1 = get<double>(design, "lambda1", "design");
  if (const YAML::Node sweep = design["bound_sweep"]) {
    check_keys(sweep, "design.bound_sweep", {"L", "K"});
    c.sweep_L = scalar_or_list<double>(sweep, "L", "design.bound_sweep");
    c.sweep_K = get<int>(sweep, "K", "design.bound_sweep");
  }

  if (const YAML::Node b = root["baselines"]) {
    c.baselines.clear();
    for (const auto& name : scalar_or_list<std::string>(root, "baselines", "config")) {
      const BaselineKind k = parse_baseline_kind(name);
      if (k == BaselineKind::FixedUser) throw InvalidArgument("config: list user quantizers under fixed_quantizers");
      c.baselines.push_back(k);
    }
  }
  if (const YAML::Node f = root["fixed_quantizers"]) {
    if (!f.IsSequence()) throw InvalidArgument("config: fixed_quantizers must be a list of level lists");
    for (const auto& levels : f) {
      try {
        c.fixed_user.push_back({levels.as<std::vector<double>>()});
      } catch (const YAML::Exception&) {
        throw InvalidArgument("config: fixed_quantizers entries must be lists of numbers");
      }
    }
  }
  if (const YAML::Node z = root["zgrid"]) {
    check_keys(z, "zgrid", {"n_points", "margin", "log_z_min", "log_z_max"});
    maybe(z, "n_points", "zgrid", c.zgrid.n_points);
    maybe(z, "margin", "zgrid", c.zgrid.margin);
    if (z["log_z_min"]) c.zgrid.log_z_min = get<double>(z, "log_z_min", "zgrid");
    if (z["log_z_max"]) c.zgrid.log_z_max = get<double>(z, "log_z_max", "zgrid");
  }
  if (const YAML::Node s = root["solver"]) {
    check_keys(s, "solver", {"tol", "max_iter", "mode"});
    maybe(s, "tol", "solver", c.solver_tol);
    maybe(s, "max_iter", "solver", c.solver_max_iter);
    if (s["mode"]) {
      const auto m = get<std::string>(s, "mode", "solver");
      if (m == "policy_iteration")
        c.solver_mode = SolverMode::ModifiedPolicyIteration;
      else if (m == "value_iteration")
        c.solver_mode = SolverMode::ValueIteration;
      else
        throw InvalidArgument("config: solver.mode must be 'policy_iteration' or 'value_iteration'");
    }
  }
  if (const YAML::Node cal = root["calibration"]) {
    check_keys(cal, "calibration", {"rel_tol", "max_outer", "max_evaluations"});
    maybe(cal, "rel_tol", "calibration", c.calibration_rel_tol);
    maybe(cal, "max_outer", "calibration", c.calibration_max_outer);
    maybe(cal, "max_evaluations", "calibration", c.calibration_max_evaluations);
  }
  if (const YAML::Node ev = root["evaluation"]) {
    check_keys(ev, "evaluation", {"tol", "max_iter", "refine", "max_refine", "refine_tol"});
    maybe(ev, "tol", "evaluation", c.evaluation.tol);
    maybe(ev, "max_iter", "evaluation", c.evaluation.max_iter);
    maybe(ev, "refine", "evaluation", c.evaluation.refine);
    maybe(ev, "max_refine", "evaluation", c.evaluation.max_refine);
    maybe(ev, "refine_tol", "evaluation", c.evaluation.refine_tol);
  }
  if (const YAML::Node lm = root["lloyd_max"]) {
    check_keys(lm, "lloyd_max", {"tol"});
    maybe(lm, "tol", "lloyd_max", c.lloyd_max_tol);
  }
  if (const YAML::Node sim = root["simulation"]) {
    check_keys(sim, "simulation", {"enabled", "n_runs", "seed", "max_steps"});
    maybe(sim, "enabled", "simulation", c.simulate);
    maybe(sim, "n_runs", "simulation", c.simulation.n_runs);
    maybe(sim, "seed", "simulation", c.simulation.seed);
    maybe(sim, "max_steps", "simulation", c.simulation.max_steps);
  }
  maybe(root, "candidate_budget", "config", c.candidate_budget);
  maybe(root, "threads", "config", c.threads);
  if (const YAML::Node out = root["output"]) {
    check_keys(out, "output", {"dir"});
    maybe(out, "dir", "output", c.out_dir);
  }
  c.validate();
  return c;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace seqquant
