// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "support.hpp"

#include <ftc/ftc.h>

#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace ftc;
using ftc_test::directions_of;
using ftc_test::pair_of;
using ftc_test::rel_err;
using ftc_test::row;
using ftc_test::vec;

namespace {

constexpr double kTwoPi = 6.283185307179586;

struct Check {
  bool ok = true;
  std::ostringstream detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

Vec loop_closed_form(double w, double t) {
  return vec({std::sin(w * t) / w, (1 - std::cos(w * t)) / w, (t - std::sin(w * t) / w) / w});
}

void integrator_order(Check& c) {
  const auto sc = get_scenario("brockett");
  const auto& f = sc.system.dynamics;
  const auto& law = sc.control_law("loop").law;
  const Vec exact = loop_closed_form(kTwoPi, 1.0);

  const auto u = OrdinaryControl::sampled(0.0, 1.0, 2000, law);
  const double err2000 = (integrate_ordinary(f, u, vec({0, 0, 0}), Mesh(0.0, 1.0, 2000)).back() - exact).norm();
  c.expect(err2000 <= 1e-5, "N=2000 error <= 1e-5");

  const TimeField field = [&](double t, const Vec& x) { return f.eval(t, x, law(t)); };
  const double e20 = (integrate_field(field, vec({0, 0, 0}), Mesh(0.0, 1.0, 20)).back() - exact).norm();
  const double e40 = (integrate_field(field, vec({0, 0, 0}), Mesh(0.0, 1.0, 40)).back() - exact).norm();
  const double ratio = e20 / e40;
  c.expect(ratio >= 8.0 && ratio <= 32.0, "halving ratio in [8, 32]");
  c.detail << "err(N=2000)=" << err2000 << " ratio(20->40)=" << ratio;
}

void family_formula(Check& c) {
  double worst1 = 0.0, worst2 = 0.0;
  for (int j : {2, 5, 10}) {
    ScenarioParams p;
    p.j = j;
    const auto sc = get_scenario("paper_example_31", p);
    const Mesh m(0.0, 1.0, 1000);
    const auto tr = integrate_relaxed(sc.system.dynamics, sc.pair("mu_j").control(m), vec({0, 0}), m);
    const double jj = j;
    for (int i = 0; i <= m.cells; ++i) {
      worst1 = std::max(worst1, std::abs(tr.samples[static_cast<size_t>(i)][0] - m.node(i) / (jj * jj)));
    }
    const double x2 = (1 - 1 / jj - 1 / (jj * jj) + 1 / (jj * jj * jj)) - 1 / (3 * std::pow(jj, 4));
    worst2 = std::max(worst2, std::abs(tr.back()[1] - x2));
    if (j == 2) c.expect(std::abs(tr.back()[1] - 0.3541666667) <= 1e-8, "j=2 value 0.3541666667");
  }
  c.expect(worst1 <= 1e-10, "x1 = t/j^2 within 1e-10");
  c.expect(worst2 <= 1e-8, "x2(1) within 1e-8");
  c.detail << "max|x1 err|=" << worst1 << " max|x2(1) err|=" << worst2;
}

void inconsistency(Check& c) {
  const auto sc = get_scenario("paper_example_31");
  const auto br = get_scenario("brockett");
  const auto pp = pair_of(sc, "paper");
  const auto bp = pair_of(br, "paper");
  const auto cp = pair_of(sc, "corrected");
  const auto a = audit_admissibility(sc.system.dynamics, pp.trajectory, pp.control, 1e-6);
  const auto b = audit_admissibility(br.system.dynamics, bp.trajectory, bp.control, 1e-6);
  const auto k = audit_admissibility(sc.system.dynamics, cp.trajectory, cp.control, 1e-9);
  c.expect(std::abs(a.sup_residual - 1.0) <= 1e-6 && !a.pass, "two-state paper pair = 1.0, fail");
  c.expect(std::abs(b.sup_residual - 1.0) <= 1e-6 && !b.pass, "brockett paper pair = 1.0, fail");
  c.expect(k.pass, "corrected pair passes at 1e-9");
  c.detail << "paper=" << a.sup_residual << " brockett=" << b.sup_residual << " corrected=" << k.sup_residual;
}

void lambda_verdicts(Check& c) {
  LambdaConfig cfg;
  cfg.sphere_resolution = 1e-2;
  const auto bal = get_scenario("balanced_switch");
  const auto v = search_lambda(bal.system, pair_of(bal, "balanced"), cfg);
  c.expect(!v.found() && v.as_empty().min_score >= 0.99, "balanced_switch empty, min score >= 0.99");

  const auto ramp = get_scenario("ramp");
  const auto r = search_lambda(ramp.system, pair_of(ramp, "ramp"), cfg);
  double ramp_res = NAN, ramp_tv = NAN;
  if (r.found()) {
    ramp_res = r.as_found().report.max_condition_residual;
    ramp_tv = r.as_found().report.transversality_value;
  }
  c.expect(r.found() && ramp_res <= 1e-9 && ramp_tv < 0.0, "ramp found, residual <= 1e-9, s*M < 0");

  const auto sc = get_scenario("paper_example_31");
  const auto corr = pair_of(sc, "corrected");
  c.expect(search_lambda(sc.system, corr, cfg).found(), "corrected pair found");

  std::mt19937_64 rng(2024);
  std::normal_distribution<double> d;
  std::uniform_real_distribution<double> lam(0.01, 100.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const RowVec psi = row({d(rng), d(rng)});
    const double l = lam(rng);
    const auto a = check_lambda_candidate(sc.system, corr, psi, cfg);
    const auto b = check_lambda_candidate(sc.system, corr, l * psi, cfg);
    worst = std::max({worst, rel_err(b.max_condition_residual, l * a.max_condition_residual),
                      rel_err(b.transversality_value, l * a.transversality_value)});
  }
  c.expect(worst <= 1e-10, "homogeneity within 1e-10");
  c.detail << "balanced min_score=" << (v.found() ? NAN : v.as_empty().min_score) << " ramp residual=" << ramp_res
           << " ramp s*M=" << ramp_tv << " homogeneity=" << worst;
}

void chattering(Check& c) {
  const auto bal = get_scenario("balanced_switch");
  const Mesh one(0.0, 1.0, 1), sample(0.0, 1.0, 1000);
  const auto rows = convergence_study(bal.system.dynamics, bal.pair("balanced").control(one), bal.x1,
                                      {25, 50, 100}, sample);
  const double want[] = {0.02, 0.01, 0.005};
  for (size_t k = 0; k < 3; ++k) {
    c.expect(std::abs(rows[k].sup_deviation - want[k]) <= 0.01 * want[k], "balanced row " + std::to_string(k));
  }
  c.detail << "balanced=" << rows[0].sup_deviation << "/" << rows[1].sup_deviation << "/" << rows[2].sup_deviation;

  // every shipped pair with more than one atom
  for (const auto& id : scenario_ids()) {
    const auto sc = get_scenario(id);
    for (const auto& spec : sc.reference_pairs) {
      const auto mu = spec.control(one);
      if (mu.single_atom()) continue;
      const auto r = convergence_study(sc.system.dynamics, mu, sc.x1, {10, 20, 40}, sample);
      for (size_t k = 1; k < r.size(); ++k) {
        const double ratio = r[k - 1].sup_deviation / r[k].sup_deviation;
        c.expect(ratio >= 1.5 && ratio <= 2.5, id + "/" + spec.name + " doubling ratio");
        c.detail << " " << id << "/" << spec.name << "=" << ratio;
      }
    }
  }
}

void flagship(Check& c) {
  const auto sc = get_scenario("balanced_switch");
  const auto pair = pair_of(sc, "balanced");
  const auto dirs = directions_of(sc, "balanced", pair);
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    AttainConfig cfg;
    cfg.eps = eps;
    const auto r = probe_attainability(sc.system, pair, dirs, cfg);
    const bool ok = r.success() && r.tau < 1.0 && std::abs(r.tau - 1.0) <= eps && r.tube_deviation <= eps &&
                    r.endpoint_error <= 1e-9;
    c.expect(ok, "eps=" + format_real(eps));
    c.detail << "eps=" << eps << ":tau=" << r.tau << ",tube=" << r.tube_deviation << ",err=" << r.endpoint_error
             << " ";
  }
  AttainConfig cfg;
  const auto seq = minimizing_sequence(sc.system, pair, dirs, 3, 0.1, cfg);
  bool inc = seq.complete && seq.results.size() == 3;
  for (size_t k = 0; inc && k < seq.results.size(); ++k) {
    inc = seq.results[k].tau < 1.0 && (k == 0 || seq.results[k].tau > seq.results[k - 1].tau);
  }
  c.expect(inc, "sequence strictly increasing below 1");
  c.detail << "sequence:";
  for (const auto& r : seq.results) c.detail << " " << r.tau;
}

void necessity(Check& c) {
  const auto sc = get_scenario("ramp");
  const auto pair = pair_of(sc, "ramp");
  const auto dirs = directions_of(sc, "ramp", pair);
  AttainConfig cfg;
  cfg.force = true;
  const auto r = probe_attainability(sc.system, pair, dirs, cfg);
  c.expect(!r.success(), "forced attainment fails");
  c.expect(r.best_residual >= 1.0 - r.tau && r.best_residual > 0.0, "best residual >= 1 - tau > 0");

  // Oracle sweep: |x(tau) - 1| >= 1 - tau for every admissible perturbation.
  std::mt19937_64 rng(7);
  bool bound = true;
  for (double tau : {0.9, 0.95, 0.99, 0.999}) {
    for (int k = 0; k < 10; ++k) {
      std::uniform_real_distribution<double> a0(0.0, dirs[0].alpha_max), a1(0.0, dirs[1].alpha_max);
      Vec alpha = vec({a0(rng), a1(rng)});
      if (alpha.sum() > 1.0) alpha /= alpha.sum();
      const Vec x = endpoint_map(sc.system.dynamics, pair.control, dirs, tau, alpha, sc.x1);
      bound = bound && std::abs(x[0] - 1.0) >= 1.0 - tau - 1e-12;
    }
  }
  c.expect(bound, "endpoint residual never beats 1 - tau");
  LambdaConfig lc;
  const bool ramp_found = search_lambda(sc.system, pair, lc).found();
  const auto bal = get_scenario("balanced_switch");
  const bool bal_empty = !search_lambda(bal.system, pair_of(bal, "balanced"), lc).found();
  c.expect(ramp_found && bal_empty, "ramp nonempty, balanced empty");
  c.detail << "status=" << to_string(r.status) << " best_residual=" << r.best_residual << " tau=" << r.tau;
}

void value_probe_check(Check& c) {
  const auto sc = get_scenario("single_integrator");
  ValueProbeConfig cfg;
  cfg.ball = 1e-3;
  cfg.samples = 200;
  cfg.seed = 42;
  for (double y : {-0.02, -0.01, 0.01, 0.02}) {
    const auto e = value_probe(sc.system, sc.x1, vec({y}), cfg);
    c.expect(e.hit && std::abs(e.estimate - std::abs(y)) <= 0.1 * std::abs(y), "V(" + format_real(y) + ")");
    c.detail << "V(" << y << ")=" << e.estimate << " ";
  }
  const auto one = value_probe(sc.system, sc.x1, vec({1}), cfg);
  c.expect(one.hit && one.estimate >= 1.0 && one.estimate <= 1.01, "V(1) in [1, 1.01]");
  c.detail << "V(1)=" << one.estimate;
}

std::vector<std::pair<std::string, std::string>> suite_requests() {
  return {
      {"simulate", R"({"scenario": "paper_example_31", "pair": "corrected"})"},
      {"simulate", R"({"scenario": "brockett", "control": "loop", "scenario_params": {"omega": 6.283185307}})"},
      {"simulate", R"({"scenario": "frozen"})"},
      {"audit", R"({"scenario": "paper_example_31", "pair": "paper"})"},
      {"audit", R"({"scenario": "paper_example_31", "pair": "corrected"})"},
      {"audit", R"({"scenario": "brockett", "pair": "paper"})"},
      {"lambda", R"({"scenario": "balanced_switch", "s": -1})"},
      {"lambda", R"({"scenario": "ramp", "s": -1})"},
      {"lambda", R"({"scenario": "paper_example_31", "pair": "corrected", "s": -1})"},
      {"chatter", R"({"scenario": "balanced_switch", "p": [25, 50, 100]})"},
      {"chatter", R"({"scenario": "brockett", "pair": "paper", "p": [10, 20]})"},
      {"attain", R"({"scenario": "balanced_switch", "s": -1, "eps": 0.01})"},
      {"attain", R"({"scenario": "ramp", "s": -1, "eps": 0.01})"},
      {"attain", R"({"scenario": "balanced_switch", "s": -1, "eps": 0.1, "sequence": 3})"},
      {"value", R"({"scenario": "single_integrator", "target": 1, "ball": 0.001, "samples": 200, "seed": 42})"},
      {"value", R"({"scenario": "single_integrator", "scan": [-0.02, -0.01, 0, 0.01, 0.02]})"},
  };
}

std::string run_suite(bool& ok) {
  std::string all;
  for (const auto& [cmd, req] : suite_requests()) {
    ftc_result* res = nullptr;
    const ftc_status st = ftc_run(cmd.c_str(), req.c_str(), &res);
    if (!res) {
      ok = false;
      all += "error " + std::to_string(st) + ": " + ftc_last_error() + "\n";
      continue;
    }
    all += cmd + " -> " + std::to_string(st) + "\n";
    for (size_t i = 0; i < ftc_result_artifact_count(res); ++i) {
      size_t size = 0;
      const char* data = ftc_result_artifact_data(res, i, &size);
      all += std::string(ftc_result_artifact_name(res, i)) + "\n" + std::string(data, size);
    }
    ftc_result_free(res);
  }
  return all;
}

void determinism(Check& c) {
  bool ok = true;
  const std::string a = run_suite(ok);
  const std::string b = run_suite(ok);
  c.expect(ok, "every suite command ran");
  c.expect(a == b, "byte-identical outputs");
  c.detail << "suite bytes=" << a.size();
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"1 integrator order", integrator_order},
      {"2 relaxed family closed form", family_formula},
      {"3 inconsistency detection", inconsistency},
      {"4 multiplier verdicts", lambda_verdicts},
      {"5 chattering convergence", chattering},
      {"6 left attainment and minimizing sequence", flagship},
      {"7 necessity contrast", necessity},
      {"8 value continuity probe", value_probe_check},
      {"9 determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Check c;
    try {
      fn(c);
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail << " [exception: " << e.what() << "]";
    }
    std::printf("%s %s: %s\n", c.ok ? "PASS" : "FAIL", name.c_str(), c.detail.str().c_str());
    if (!c.ok) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
