#include <ftc/attain.hpp>
#include <ftc/chattering.hpp>
#include <ftc/commands.hpp>
#include <ftc/integrate.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ftc {

namespace {

template <class T>
T get_or(const Json& req, const char* key, T fallback) {
  if (!req.contains(key) || req[key].is_null()) return fallback;
  try {
    return req[key].get<T>();
  } catch (const nlohmann::json::exception&) {
    fail(ErrorKind::Config, std::string("request field '") + key + "' has the wrong type");
  }
}

bool has(const Json& req, const char* key) { return req.contains(key) && !req[key].is_null(); }

struct Context {
  Scenario scenario;
  int cells = 1000;
  int workers = 0;
};

Context load_context(const Json& req) {
  if (!req.is_object()) fail(ErrorKind::Config, "request must be a JSON object");
  if (!has(req, "scenario")) fail(ErrorKind::Config, "missing required field 'scenario'");
  Context ctx;
  const ScenarioParams params =
      scenario_params_from_json(has(req, "scenario_params") ? req["scenario_params"] : Json::object());
  ctx.scenario = get_scenario(get_or<std::string>(req, "scenario", ""), params);
  ctx.cells = get_or<int>(req, "cells", 1000);
  ctx.workers = get_or<int>(req, "workers", 0);
  if (ctx.cells < 1) fail(ErrorKind::Config, "cells must be positive");
  if (ctx.workers < 0) fail(ErrorKind::Config, "workers must be >= 0");
  return ctx;
}

const ReferencePairSpec& pick_pair(const Context& ctx, const Json& req) {
  const auto& sc = ctx.scenario;
  if (has(req, "pair")) return sc.pair(get_or<std::string>(req, "pair", ""));
  if (sc.reference_pairs.empty()) fail(ErrorKind::Lookup, "scenario has no reference pairs");
  return sc.reference_pairs.front();
}

double positive(const Json& req, const char* key, double fallback) {
  const double v = get_or<double>(req, key, fallback);
  if (!(v > 0.0)) fail(ErrorKind::Config, std::string(key) + " must be > 0");
  return v;
}

LambdaConfig lambda_config(const Context& ctx, const Json& req) {
  LambdaConfig c;
  c.s = get_or<int>(req, "s", -1);
  c.sphere_resolution = positive(req, "resolution", c.sphere_resolution);
  c.residual_tol = positive(req, "residual_tol", c.residual_tol);
  c.continuity_jump_tol = positive(req, "continuity_jump_tol", c.continuity_jump_tol);
  c.adjoint_tol = positive(req, "adjoint_tol", c.adjoint_tol);
  c.admissibility_tol = positive(req, "admissibility_tol", c.admissibility_tol);
  c.allow_inadmissible = get_or<bool>(req, "allow_inadmissible", false);
  const auto conv = get_or<std::string>(req, "convention", "definition");
  if (conv == "definition") {
    c.convention = TransversalityConvention::Definition;
  } else if (conv == "theorem") {
    c.convention = TransversalityConvention::Theorem;
  } else {
    fail(ErrorKind::Config, "convention must be 'definition' or 'theorem'");
  }
  c.workers = ctx.workers;
  c.validate();
  return c;
}

Json header(const Context& ctx, const std::string& command) {
  Json j;
  j["command"] = command;
  j["scenario"] = ctx.scenario.id;
  return j;
}

Json report_json(const CertificateReport& r) {
  Json j;
  j["psi_terminal"] = to_json(r.psi_terminal);
  j["max_condition_residual"] = r.max_condition_residual;
  j["adjoint_residual"] = r.adjoint_residual;
  j["continuity_jump"] = r.continuity_jump;
  j["transversality_value"] = r.transversality_value;
  j["verdict"] = r.verdict == Verdict::Member ? "member" : "rejected";
  j["reason"] = r.reason;
  return j;
}

std::string control_csv(const OrdinaryControl& u) {
  std::ostringstream os;
  os << "t_start,t_end";
  const Eigen::Index r = u.values.empty() ? 0 : u.values.front().size();
  for (Eigen::Index k = 0; k < r; ++k) os << ",u" << k;
  os << "\n";
  for (int k = 0; k < u.pieces(); ++k) {
    os << format_real(u.breakpoints[static_cast<size_t>(k)]) << ","
       << format_real(u.breakpoints[static_cast<size_t>(k) + 1]);
    for (Eigen::Index c = 0; c < r; ++c) os << "," << format_real(u.values[static_cast<size_t>(k)](c));
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------

CommandResult cmd_simulate(const Json& req) {
  const Context ctx = load_context(req);
  const auto& sc = ctx.scenario;
  if (has(req, "pair") && has(req, "control")) {
    fail(ErrorKind::Config, "simulate takes either a pair or a control, not both");
  }
  const Mesh mesh = mesh_with_density(sc.t1, sc.t2_hat, ctx.cells);
  Json j = header(ctx, "simulate");
  Trajectory tr;
  if (has(req, "control")) {
    const auto& law = sc.control_law(get_or<std::string>(req, "control", ""));
    const OrdinaryControl u = OrdinaryControl::sampled(sc.t1, sc.t2_hat, mesh.cells, law.law);
    u.validate(&sc.system.controls);
    tr = integrate_ordinary(sc.system.dynamics, u, sc.x1, mesh);
    j["mode"] = "control";
    j["control"] = law.name;
    j["control_pieces"] = u.pieces();
  } else {
    const auto& spec = pick_pair(ctx, req);
    const ReferencePair pair = resolve_pair(sc, spec, ctx.cells);
    tr = integrate_relaxed(sc.system.dynamics, pair.control, sc.x1, mesh);
    double dev = 0.0;
    for (size_t i = 0; i < tr.samples.size(); ++i) {
      dev = std::max(dev, (tr.samples[i] - pair.trajectory.samples[i]).norm());
    }
    j["mode"] = "pair";
    j["pair"] = spec.name;
    j["sup_deviation_vs_reference"] = dev;
  }
  j["t1"] = mesh.t1;
  j["t2"] = mesh.t2;
  j["cells"] = mesh.cells;
  j["x1"] = to_json(tr.front());
  j["endpoint"] = to_json(tr.back());

  CommandResult res;
  res.json = dump_json(j);
  res.artifacts.emplace_back("trajectory.csv", trajectory_csv(tr));
  res.artifacts.emplace_back("summary.json", res.json);
  return res;
}

CommandResult cmd_audit(const Json& req) {
  const Context ctx = load_context(req);
  const auto& spec = pick_pair(ctx, req);
  const double tol = positive(req, "tol", 1e-6);
  const ReferencePair pair = resolve_pair(ctx.scenario, spec, ctx.cells);
  const auto rep = audit_admissibility(ctx.scenario.system.dynamics, pair.trajectory, pair.control, tol);

  Json j = header(ctx, "audit");
  j["pair"] = spec.name;
  j["tol"] = tol;
  j["sup_residual"] = rep.sup_residual;
  j["verdict"] = rep.pass ? "pass" : "fail";
  const auto worst = std::max_element(rep.residual_profile.begin(), rep.residual_profile.end());
  const int idx = static_cast<int>(worst - rep.residual_profile.begin());
  j["worst_node"] = idx;
  j["worst_time"] = pair.trajectory.mesh.node(idx);
  Json prof = Json::array();
  for (double r : rep.residual_profile) prof.push_back(r);
  j["residual_profile"] = std::move(prof);

  CommandResult res;
  res.outcome = rep.pass ? Outcome::Ok : Outcome::AuditFail;
  res.json = dump_json(j);
  res.artifacts.emplace_back("audit.json", res.json);
  return res;
}

CommandResult cmd_lambda(const Json& req) {
  const Context ctx = load_context(req);
  const auto& spec = pick_pair(ctx, req);
  const LambdaConfig cfg = lambda_config(ctx, req);
  const ReferencePair pair = resolve_pair(ctx.scenario, spec, ctx.cells);
  const LambdaVerdict v = search_lambda(ctx.scenario.system, pair, cfg);

  Json j = header(ctx, "lambda");
  j["pair"] = spec.name;
  j["s"] = cfg.s;
  j["convention"] = cfg.convention == TransversalityConvention::Definition ? "definition" : "theorem";
  j["sphere_resolution"] = cfg.sphere_resolution;
  j["residual_tol"] = cfg.residual_tol;
  j["scan_size"] = v.scan_size;
  if (v.found()) {
    const auto& f = v.as_found();
    j["outcome"] = "found";
    j["psi_terminal"] = to_json(f.psi_terminal);
    j["from_refinement"] = f.from_refinement;
    j["report"] = report_json(f.report);
  } else {
    const auto& e = v.as_empty();
    j["outcome"] = "empty_up_to_resolution";
    j["min_score"] = e.min_score;
    j["best_direction"] = to_json(e.best_direction);
    if (spec.analytic_min_score && cfg.s == -1) j["analytic_min_score"] = *spec.analytic_min_score;
  }

  CommandResult res;
  res.outcome = v.found() ? Outcome::Ok : Outcome::LambdaEmpty;
  res.json = dump_json(j);
  res.artifacts.emplace_back("lambda.json", res.json);
  return res;
}

CommandResult cmd_chatter(const Json& req) {
  const Context ctx = load_context(req);
  const auto& sc = ctx.scenario;
  const auto& spec = pick_pair(ctx, req);
  if (!has(req, "p")) fail(ErrorKind::Config, "chatter needs a p list");
  const auto p_list = get_or<std::vector<int>>(req, "p", {});
  const int control_cells = get_or<int>(req, "control_cells", 1);
  if (control_cells < 1) fail(ErrorKind::Config, "control_cells must be positive");
  const RelaxedControl mu = spec.control(Mesh(sc.t1, sc.t2_hat, control_cells));
  mu.validate(sc.system.n(), sc.system.r(), spec.atoms_in_control_set ? &sc.system.controls : nullptr);
  const Mesh sample = mesh_with_density(sc.t1, sc.t2_hat, ctx.cells);
  const auto rows = convergence_study(sc.system.dynamics, mu, sc.x1, p_list, sample);

  std::ostringstream csv;
  csv << "p,sup_deviation,excursion_bound\n";
  Json j = header(ctx, "chatter");
  j["pair"] = spec.name;
  j["control_cells"] = control_cells;
  j["sample_cells"] = sample.cells;
  Json arr = Json::array();
  for (size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    csv << r.p << "," << format_real(r.sup_deviation) << "," << format_real(r.excursion_bound) << "\n";
    Json row;
    row["p"] = r.p;
    row["sup_deviation"] = r.sup_deviation;
    row["excursion_bound"] = r.excursion_bound;
    if (k > 0) {
      row["ratio_to_previous"] =
          r.sup_deviation > 0.0 ? rows[k - 1].sup_deviation / r.sup_deviation : std::nan("");
    }
    arr.push_back(std::move(row));
  }
  j["rows"] = std::move(arr);

  CommandResult res;
  res.json = dump_json(j);
  res.artifacts.emplace_back("chatter.csv", csv.str());
  res.artifacts.emplace_back("chatter.json", res.json);
  return res;
}

Json attain_json(const AttainabilityResult& r, const std::vector<VariationDirection>& dirs) {
  Json j;
  j["status"] = to_string(r.status);
  j["side"] = r.side < 0 ? "left" : "right";
  j["eps"] = r.eps;
  j["tau"] = r.tau;
  j["tube_deviation"] = r.tube_deviation;
  j["endpoint_error"] = r.endpoint_error;
  j["best_residual"] = r.best_residual;
  j["iterations"] = r.iterations;
  j["subdivisions"] = r.subdivisions;
  Json alpha = Json::object();
  for (size_t i = 0; i < dirs.size() && static_cast<Eigen::Index>(i) < r.alpha.size(); ++i) {
    alpha[dirs[i].name] = r.alpha[static_cast<Eigen::Index>(i)];
  }
  j["alpha"] = std::move(alpha);
  j["control_pieces"] = r.control.pieces();
  j["message"] = r.message;
  return j;
}

CommandResult cmd_attain(const Json& req) {
  const Context ctx = load_context(req);
  const auto& sc = ctx.scenario;
  const auto& spec = pick_pair(ctx, req);
  const ReferencePair pair = resolve_pair(sc, spec, ctx.cells);

  AttainConfig cfg;
  cfg.s = get_or<int>(req, "s", -1);
  cfg.eps = positive(req, "eps", 1e-2);
  cfg.force = get_or<bool>(req, "force", false);
  cfg.cells_per_unit = ctx.cells;
  cfg.max_iterations = get_or<int>(req, "max_iterations", cfg.max_iterations);
  cfg.lambda = lambda_config(ctx, req);
  if (cfg.s != -1 && cfg.s != 1) fail(ErrorKind::Config, "s must be -1 or +1");

  std::vector<VariationDirection> dirs;
  for (const auto& t : spec.directions) dirs.push_back(make_direction(t, pair.control));

  Json j = header(ctx, "attain");
  j["pair"] = spec.name;
  j["force"] = cfg.force;
  CommandResult res;
  if (has(req, "sequence")) {
    const int K = get_or<int>(req, "sequence", 0);
    const auto seq = minimizing_sequence(sc.system, pair, dirs, K, cfg.eps, cfg);
    Json arr = Json::array();
    for (size_t k = 0; k < seq.results.size(); ++k) {
      arr.push_back(attain_json(seq.results[k], dirs));
      if (!seq.results[k].control.values.empty()) {
        res.artifacts.emplace_back("control_" + std::to_string(k) + ".csv",
                                   control_csv(seq.results[k].control));
      }
    }
    j["eps0"] = cfg.eps;
    j["sequence_length"] = K;
    j["complete"] = seq.complete;
    j["message"] = seq.message;
    j["sequence"] = std::move(arr);
    if (!seq.complete) {
      const bool refused = !seq.results.empty() && seq.results.back().status == AttainStatus::Refused;
      res.outcome = refused ? Outcome::AttainRefused : Outcome::AttainFailed;
    }
  } else {
    const auto r = probe_attainability(sc.system, pair, dirs, cfg);
    j["result"] = attain_json(r, dirs);
    if (!r.control.values.empty()) res.artifacts.emplace_back("control.csv", control_csv(r.control));
    if (r.status == AttainStatus::Refused) {
      res.outcome = Outcome::AttainRefused;
    } else if (!r.success()) {
      res.outcome = Outcome::AttainFailed;
    }
  }
  res.json = dump_json(j);
  res.artifacts.emplace_back("attain.json", res.json);
  return res;
}

Json value_json(const ValueEstimate& e, const Vec& target) {
  Json j;
  j["target"] = to_json(target);
  j["hit"] = e.hit;
  if (e.hit) {
    j["estimate"] = e.estimate;
    j["entry_time"] = e.entry_time;
    j["best_sample"] = e.best_sample;
  } else {
    j["closest_distance"] = e.closest_distance;
  }
  return j;
}

CommandResult cmd_value(const Json& req) {
  const Context ctx = load_context(req);
  const auto& sc = ctx.scenario;
  ValueProbeConfig cfg;
  cfg.ball = positive(req, "ball", cfg.ball);
  cfg.horizon = positive(req, "horizon", cfg.horizon);
  cfg.samples = get_or<int>(req, "samples", cfg.samples);
  cfg.seed = get_or<std::uint64_t>(req, "seed", cfg.seed);
  cfg.cells = get_or<int>(req, "grid", cfg.cells);
  cfg.max_switches = get_or<int>(req, "max_switches", cfg.max_switches);

  Json j = header(ctx, "value");
  j["ball"] = cfg.ball;
  j["horizon"] = cfg.horizon;
  j["samples"] = cfg.samples;
  j["seed"] = cfg.seed;
  if (has(req, "scan")) {
    if (sc.system.n() != 1) fail(ErrorKind::Config, "target scans need a scalar state");
    std::vector<double> targets;
    for (const auto& t : req["scan"]) targets.push_back(t.get<double>());
    Json arr = Json::array();
    std::vector<std::pair<double, double>> by_abs;
    for (double y : targets) {
      Vec target(1);
      target[0] = y;
      const auto e = value_probe(sc.system, sc.x1, target, cfg);
      arr.push_back(value_json(e, target));
      by_abs.emplace_back(std::abs(y - sc.x1[0]), e.hit ? e.estimate : std::nan(""));
    }
    std::sort(by_abs.begin(), by_abs.end());
    bool monotone = true;
    for (size_t k = 1; k < by_abs.size(); ++k) {
      if (by_abs[k].first > by_abs[k - 1].first && !(by_abs[k].second >= by_abs[k - 1].second)) {
        monotone = false;
      }
    }
    j["scan"] = std::move(arr);
    j["monotone_in_distance"] = monotone;
  } else {
    if (!has(req, "target")) fail(ErrorKind::Config, "value needs a target or a scan");
    const Vec target = vec_from_json(req["target"]);
    j["result"] = value_json(value_probe(sc.system, sc.x1, target, cfg), target);
  }

  CommandResult res;
  res.json = dump_json(j);
  res.artifacts.emplace_back("value.json", res.json);
  return res;
}

}  // namespace

ScenarioParams scenario_params_from_json(const Json& j) {
  ScenarioParams p;
  if (!j.is_object()) fail(ErrorKind::Config, "scenario_params must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number()) fail(ErrorKind::Config, "scenario parameter '" + it.key() + "' must be numeric");
    if (it.key() == "omega") {
      p.omega = it.value().get<double>();
    } else if (it.key() == "j") {
      const double jv = it.value().get<double>();
      if (jv != std::floor(jv)) fail(ErrorKind::Config, "scenario parameter j must be an integer");
      p.j = static_cast<int>(jv);
    } else {
      fail(ErrorKind::Config, "unknown scenario parameter '" + it.key() + "'");
    }
  }
  return p;
}

ReferencePair resolve_pair(const Scenario& sc, const ReferencePairSpec& spec, int cells_per_unit) {
  const Mesh mesh = mesh_with_density(sc.t1, sc.t2_hat, cells_per_unit);
  ReferencePair pair;
  pair.control = spec.control(mesh);
  pair.control.validate(sc.system.n(), sc.system.r(), spec.atoms_in_control_set ? &sc.system.controls : nullptr);
  if (spec.trajectory) {
    pair.trajectory.mesh = mesh;
    for (int i = 0; i <= mesh.cells; ++i) pair.trajectory.samples.push_back(spec.trajectory(mesh.node(i)));
  } else {
    pair.trajectory = integrate_relaxed(sc.system.dynamics, pair.control, sc.x1, mesh);
  }
  return pair;
}

std::vector<std::string> command_names() {
  return {"simulate", "audit", "lambda", "chatter", "attain", "value"};
}

CommandResult run_command(const std::string& command, const Json& request) {
  if (command == "simulate") return cmd_simulate(request);
  if (command == "audit") return cmd_audit(request);
  if (command == "lambda") return cmd_lambda(request);
  if (command == "chatter") return cmd_chatter(request);
  if (command == "attain") return cmd_attain(request);
  if (command == "value") return cmd_value(request);
  fail(ErrorKind::Config, "unknown command '" + command + "'");
}

}  // namespace ftc
