#include "support.hpp"

#include <doctest.h>

using namespace ftc;
using ftc_test::pair_of;
using ftc_test::vec;

TEST_CASE("single atom chatters to a constant control") {
  const auto sc = get_scenario("ramp");
  const Mesh m(0.0, 1.0, 5);
  const auto mu = RelaxedControl::constant(m, {{1.0, vec({1})}});
  for (int p : {1, 3, 10}) {
    const auto u = chatter({mu, p});
    for (const auto& v : u.values) CHECK(v == vec({1}));
    const auto a = integrate_ordinary(sc.system.dynamics, u, sc.x1, m);
    const auto b = integrate_relaxed(sc.system.dynamics, mu, sc.x1, m);
    for (size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);
  }
}

TEST_CASE("balanced chatter is a sawtooth") {
  const auto sc = get_scenario("balanced_switch");
  const auto mu = sc.pair("balanced").control(Mesh(0.0, 1.0, 1));
  const auto u = chatter({mu, 100});
  REQUIRE(u.pieces() == 200);
  for (int k = 0; k < u.pieces(); ++k) {
    const double width = u.breakpoints[static_cast<size_t>(k) + 1] - u.breakpoints[static_cast<size_t>(k)];
    CHECK(width == doctest::Approx(0.005).epsilon(1e-12));
    CHECK(u.values[static_cast<size_t>(k)][0] == (k % 2 == 0 ? -1.0 : 1.0));
  }
  const auto rows = convergence_study(sc.system.dynamics, mu, sc.x1, {100}, Mesh(0.0, 1.0, 1000));
  CHECK(rows[0].sup_deviation == doctest::Approx(0.005).epsilon(1e-9));
}

TEST_CASE("chattering conserves mass and stays in the control set") {
  const auto sc = get_scenario("paper_example_31");
  const Mesh m(0.0, 1.0, 7);
  const AtomList atoms = {{0.2, vec({-1})}, {0.0, vec({0})}, {0.8, vec({1})}};
  const auto mu = RelaxedControl::constant(m, atoms);
  const auto u = chatter({mu, 9});
  u.validate(&sc.system.controls);
  CHECK(u.breakpoints.front() == 0.0);
  CHECK(u.breakpoints.back() == 1.0);
  for (int c = 0; c < m.cells; ++c) {
    double dur_neg = 0.0, dur_pos = 0.0;
    for (int k = 0; k < u.pieces(); ++k) {
      const double a = std::max(u.breakpoints[static_cast<size_t>(k)], m.node(c));
      const double b = std::min(u.breakpoints[static_cast<size_t>(k) + 1], m.node(c + 1));
      if (b <= a) continue;
      const double v = u.values[static_cast<size_t>(k)][0];
      CHECK(v != 0.0);  // zero-weight atom emits nothing
      (v < 0 ? dur_neg : dur_pos) += b - a;
    }
    CHECK(std::abs(dur_neg - m.h() * 0.2) <= 1e-14);
    CHECK(std::abs(dur_pos - m.h() * 0.8) <= 1e-14);
  }
}

TEST_CASE("equal adjacent values merge") {
  const Mesh m(0.0, 1.0, 2);
  const auto mu = RelaxedControl::constant(m, {{0.5, vec({-1})}, {0.5, vec({-1})}});
  const auto u = chatter({mu, 4});
  CHECK(u.pieces() == 1);
  CHECK_THROWS_AS(chatter({mu, 0}), Error);
}

TEST_CASE("two-state family chattered on a fine mesh") {
  const auto sc = get_scenario("paper_example_31");
  const auto mu = sc.pair("mu_j").control(Mesh(0.0, 1.0, 100));
  const auto u = chatter({mu, 4});
  const auto x = integrate_ordinary(sc.system.dynamics, u, vec({0, 0}), Mesh(0.0, 1.0, 100));
  const auto fine = sc.pair("mu_j").control(Mesh(0.0, 1.0, 10000));
  const auto oracle = integrate_relaxed(sc.system.dynamics, fine, vec({0, 0}), Mesh(0.0, 1.0, 10000));
  CHECK((x.back() - oracle.back()).norm() <= 2e-3);
}

TEST_CASE("convergence study tables") {
  const auto sc = get_scenario("balanced_switch");
  const auto mu = sc.pair("balanced").control(Mesh(0.0, 1.0, 1));
  const auto rows = convergence_study(sc.system.dynamics, mu, sc.x1, {25, 50, 100}, Mesh(0.0, 1.0, 1000));
  REQUIRE(rows.size() == 3);
  const double want[] = {0.02, 0.01, 0.005};
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(rows[static_cast<size_t>(k)].sup_deviation - want[k]) <= 0.01 * want[k]);
    CHECK(rows[static_cast<size_t>(k)].excursion_bound >= rows[static_cast<size_t>(k)].sup_deviation);
  }

  const auto ramp = get_scenario("ramp");
  const auto single = ramp.pair("ramp").control(Mesh(0.0, 1.0, 1));
  for (const auto& r : convergence_study(ramp.system.dynamics, single, ramp.x1, {1, 2, 8}, Mesh(0.0, 1.0, 100)))
    CHECK(r.sup_deviation <= 1e-14);

  const auto br = get_scenario("brockett");
  const auto four = br.pair("paper").control(Mesh(0.0, 1.0, 1));
  const auto brows = convergence_study(br.system.dynamics, four, vec({0, 0, 0}), {10, 20}, Mesh(0.0, 1.0, 1000));
  const double ratio = brows[0].sup_deviation / brows[1].sup_deviation;
  CHECK(ratio >= 1.6);
  CHECK(ratio <= 2.4);

  CHECK_THROWS_AS(convergence_study(sc.system.dynamics, mu, sc.x1, {50, 25}, Mesh(0.0, 1.0, 100)), Error);
}
