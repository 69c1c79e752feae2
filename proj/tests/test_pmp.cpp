#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace ftc;
using ftc_test::pair_of;
using ftc_test::rel_err;
using ftc_test::row;
using ftc_test::vec;

TEST_CASE("hamiltonian examples") {
  const auto sc = get_scenario("paper_example_31");
  CHECK(hamiltonian(sc.system.dynamics, 0.0, vec({0, 0.4}), row({1, 2}), vec({1})) == 1.0);
  CHECK(hamiltonian(sc.system.dynamics, 0.0, vec({0, 0.4}), row({1, 2}), vec({0})) == 2.0);
  CHECK(hamiltonian(sc.system.dynamics, 0.0, vec({0, 0.4}), row({0, 0}), vec({-1})) == 0.0);
  const auto br = get_scenario("brockett");
  CHECK(hamiltonian(br.system.dynamics, 0.0, vec({0, 0, 0}), row({3, 4, 7}), vec({0, 1})) == 4.0);
  CHECK_THROWS_AS(hamiltonian(br.system.dynamics, 0.0, vec({0, 0, 0}), row({3, 4}), vec({0, 1})), Error);
}

TEST_CASE("maximum function examples") {
  const auto sc = get_scenario("paper_example_31");
  const auto m = max_function(sc.system, 0.0, vec({0, 0.5}), row({3, 1}));
  CHECK(m.value == 3.0);
  CHECK(m.witness[0] == 1.0);
  const auto z = max_function(sc.system, 0.0, vec({0, 0.5}), row({0, 0}));
  CHECK(z.value == 0.0);
  CHECK(z.witness[0] == -1.0);  // lowest index wins ties

  const auto br = get_scenario("brockett");
  const auto b = max_function(br.system, 0.0, vec({0, 0, 0}), row({3, 4, 7}));
  CHECK(b.value == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(b.witness[0] == doctest::Approx(0.6));
  CHECK(b.witness[1] == doctest::Approx(0.8));
  const auto bz = max_function(br.system, 0.0, vec({0, 0, 0}), row({0, 0, 0}));
  CHECK(bz.value == 0.0);
  CHECK(bz.witness == vec({1, 0}));
}

TEST_CASE("maximum over a box uses the sign rule") {
  // x' = (u1 - 2 u2, x1 u2)
  const DynamicsSpec f(2, 2, {{PolyTerm{1.0, {0, 0}, {1, 0}, 0}, PolyTerm{-2.0, {0, 0}, {0, 1}, 0}},
                              {PolyTerm{1.0, {1, 0}, {0, 1}, 0}}});
  const ControlSystem sys{f, ControlSet(Box{vec({-1, 0}), vec({2, 3})})};
  const Vec x = vec({-1.0, 0.0});
  const RowVec psi = row({1.0, 1.0});
  const auto m = max_function(sys, 0.0, x, psi);
  // coefficients: u1 -> 1, u2 -> -2 - 1 = -3
  CHECK(m.witness == vec({2, 0}));
  CHECK(m.value == doctest::Approx(2.0));
  // brute force over a fine grid of the box
  double best = -1e300;
  for (int i = 0; i <= 60; ++i)
    for (int k = 0; k <= 60; ++k) {
      const Vec u = vec({-1 + 3.0 * i / 60, 3.0 * k / 60});
      best = std::max(best, hamiltonian(f, 0.0, x, psi, u));
    }
  CHECK(m.value == doctest::Approx(best));
}

TEST_CASE("continuum control sets need affine dynamics") {
  const DynamicsSpec f(1, 1, {{PolyTerm{1.0, {0}, {2}, 0}}});
  const ControlSystem sys{f, ControlSet(UnitSphere{1})};
  try {
    max_function(sys, 0.0, vec({0}), row({1}));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Unsupported);
  }
}

TEST_CASE("witnesses attain the maximum") {
  std::mt19937_64 rng(13);
  std::normal_distribution<double> d;
  const auto sc = get_scenario("paper_example_31");
  const auto br = get_scenario("brockett");
  for (int k = 0; k < 100; ++k) {
    const Vec x2 = vec({d(rng), d(rng)});
    const RowVec p2 = row({d(rng), d(rng)});
    const auto m = max_function(sc.system, 0.1, x2, p2);
    CHECK(std::abs(hamiltonian(sc.system.dynamics, 0.1, x2, p2, m.witness) - m.value) <= 1e-12);
    const Vec x3 = vec({d(rng), d(rng), d(rng)});
    const RowVec p3 = row({d(rng), d(rng), d(rng)});
    const auto b = max_function(br.system, 0.1, x3, p3);
    CHECK(std::abs(hamiltonian(br.system.dynamics, 0.1, x3, p3, b.witness) - b.value) <= 1e-12);
    // no sampled unit control beats the closed form
    for (int s = 0; s < 16; ++s) {
      const double a = 6.283185307179586 * s / 16;
      CHECK(hamiltonian(br.system.dynamics, 0.1, x3, p3, vec({std::cos(a), std::sin(a)})) <= b.value + 1e-12);
    }
  }
}

TEST_CASE("certificate examples") {
  LambdaConfig cfg;
  const auto sc = get_scenario("paper_example_31");
  const auto corr = pair_of(sc, "corrected");
  const auto rep = check_lambda_candidate(sc.system, corr, row({0, 1}), cfg);
  CHECK(rep.verdict == Verdict::Member);
  CHECK(rep.max_condition_residual <= 1e-12);
  CHECK(rep.transversality_value == doctest::Approx(-1.0));
  CHECK(rep.adjoint_residual <= cfg.adjoint_tol);

  const auto bal = get_scenario("balanced_switch");
  const auto bp = pair_of(bal, "balanced");
  const auto brep = check_lambda_candidate(bal.system, bp, row({1}), cfg);
  CHECK(brep.verdict == Verdict::Rejected);
  CHECK(brep.max_condition_residual == doctest::Approx(1.0));
  CHECK(brep.reason == "max_condition");

  const auto zrep = check_lambda_candidate(bal.system, bp, row({0}), cfg);
  CHECK(zrep.verdict == Verdict::Rejected);
  CHECK(zrep.reason == "nonzero");
}

TEST_CASE("transversality convention") {
  LambdaConfig cfg;
  const auto sc = get_scenario("ramp");
  const auto pair = pair_of(sc, "ramp");
  const auto def = check_lambda_candidate(sc.system, pair, row({1}), cfg);
  CHECK(def.transversality_value == doctest::Approx(-1.0));
  CHECK(def.verdict == Verdict::Member);
  cfg.convention = TransversalityConvention::Theorem;
  const auto thm = check_lambda_candidate(sc.system, pair, row({1}), cfg);
  CHECK(thm.transversality_value == doctest::Approx(1.0));
  CHECK(thm.verdict == Verdict::Rejected);
  CHECK(thm.reason == "transversality");
  cfg.convention = TransversalityConvention::Definition;
  cfg.s = 1;
  CHECK(check_lambda_candidate(sc.system, pair, row({1}), cfg).verdict == Verdict::Rejected);
}

TEST_CASE("inadmissible pairs need an explicit override") {
  LambdaConfig cfg;
  const auto sc = get_scenario("paper_example_31");
  const auto paper = pair_of(sc, "paper");
  try {
    check_lambda_candidate(sc.system, paper, row({0, 1}), cfg);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Input);
  }
  cfg.allow_inadmissible = true;
  const auto rep = check_lambda_candidate(sc.system, paper, row({0, 1}), cfg);
  CHECK(std::isfinite(rep.max_condition_residual));
}

TEST_CASE("residuals are positively homogeneous") {
  LambdaConfig cfg;
  std::mt19937_64 rng(101);
  std::normal_distribution<double> d;
  std::uniform_real_distribution<double> lam(0.1, 10.0);
  const auto sc = get_scenario("paper_example_31");
  const auto pair = pair_of(sc, "mu_j", 200);
  cfg.allow_inadmissible = true;
  for (int k = 0; k < 100; ++k) {
    const RowVec psi = row({d(rng), d(rng)});
    const double l = lam(rng);
    const auto a = check_lambda_candidate(sc.system, pair, psi, cfg);
    const auto b = check_lambda_candidate(sc.system, pair, l * psi, cfg);
    CHECK(rel_err(b.max_condition_residual, l * a.max_condition_residual) <= 1e-10);
    CHECK(rel_err(b.transversality_value, l * a.transversality_value) <= 1e-10);
  }
}

TEST_CASE("sphere scan grids") {
  const auto d1 = sphere_directions(1, 1e-2);
  CHECK(d1.size() == 2);
  const auto d2 = sphere_directions(2, 1e-2);
  CHECK(d2.size() == static_cast<size_t>(std::ceil(2 * M_PI / 1e-2)));
  const auto d3 = sphere_directions(3, 5e-2);
  CHECK(d3.size() == static_cast<size_t>(std::ceil(4 * M_PI / (5e-2 * 5e-2))));
  for (const auto* set : {&d1, &d2, &d3})
    for (const auto& v : *set) CHECK(std::abs(v.norm() - 1.0) < 1e-14);
  const auto d4 = sphere_directions(4, 0.5);
  CHECK(!d4.empty());
  for (const auto& v : d4) CHECK(std::abs(v.norm() - 1.0) < 1e-14);
  CHECK_THROWS_AS(sphere_directions(7, 0.5), Error);
  CHECK_THROWS_AS(sphere_directions(2, 0.0), Error);
}

TEST_CASE("multiplier search verdicts") {
  LambdaConfig cfg;
  const auto bal = get_scenario("balanced_switch");
  const auto v = search_lambda(bal.system, pair_of(bal, "balanced"), cfg);
  REQUIRE_FALSE(v.found());
  CHECK(v.as_empty().min_score >= 0.99);
  CHECK(v.scan_size >= 2);

  const auto ramp = get_scenario("ramp");
  const auto r = search_lambda(ramp.system, pair_of(ramp, "ramp"), cfg);
  REQUIRE(r.found());
  CHECK(r.as_found().psi_terminal == row({1}));
  CHECK(r.as_found().report.max_condition_residual <= 1e-9);
  CHECK(r.as_found().report.transversality_value < 0.0);

  const auto sc = get_scenario("paper_example_31");
  const auto c = search_lambda(sc.system, pair_of(sc, "corrected"), cfg);
  REQUIRE(c.found());
  const RowVec psi = c.as_found().psi_terminal;
  CHECK(psi[1] >= std::abs(psi[0]));  // analytic membership region
}

TEST_CASE("multiplier search is independent of the worker count") {
  const auto sc = get_scenario("paper_example_31");
  const auto pair = pair_of(sc, "corrected", 300);
  LambdaConfig cfg;
  cfg.workers = 1;
  const auto a = search_lambda(sc.system, pair, cfg);
  cfg.workers = 4;
  const auto b = search_lambda(sc.system, pair, cfg);
  cfg.workers = 0;
  const auto c = search_lambda(sc.system, pair, cfg);
  REQUIRE(a.found());
  CHECK(a.as_found().psi_terminal == b.as_found().psi_terminal);
  CHECK(a.as_found().psi_terminal == c.as_found().psi_terminal);

  const auto bal = get_scenario("balanced_switch");
  cfg.workers = 1;
  const auto e1 = search_lambda(bal.system, pair_of(bal, "balanced"), cfg);
  cfg.workers = 3;
  const auto e3 = search_lambda(bal.system, pair_of(bal, "balanced"), cfg);
  CHECK(e1.as_empty().min_score == e3.as_empty().min_score);
  CHECK(e1.as_empty().best_direction == e3.as_empty().best_direction);
}

TEST_CASE("configuration validation") {
  LambdaConfig cfg;
  cfg.s = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.s = -1;
  cfg.residual_tol = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.residual_tol = 1e-9;
  cfg.sphere_resolution = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
