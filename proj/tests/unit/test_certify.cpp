#include <vector>

#include "doctest.h"
#include "jamsim/certify.hpp"
#include "jamsim/rng.hpp"

using namespace jamsim;

TEST_CASE("certify_link: a quiet link sits at the floors") {
  const double ds = delta_star(0.1, 1, 2);
  const auto c = certify_link(DosSignal{}, ds, 20);
  CHECK(c.certified);
  CHECK(c.poc.alpha == 0.0);
  CHECK(c.params.eta == 1.0);
  CHECK(c.params.kappa == 0.0);
  CHECK(*c.poc.phi == 2 * ds);
  CHECK(c.duty_cycle == 0.0);
}

TEST_CASE("certify_link: an attack on every attempt is flagged with load one") {
  const double ds = delta_star(0.1, 1, 2);
  const auto c = certify_link(gen_pulse_train_at(retry_instants(ds, 20)), ds, 20);
  CHECK_FALSE(c.certified);
  CHECK(c.poc.alpha == 1.0);
  CHECK(c.params.tau_f == ds);
  CHECK_FALSE(c.poc.phi.has_value());
}

TEST_CASE("certify_link: long retry-aligned trains are still flagged") {
  for (double horizon : {10.0, 100.0}) {
    for (double eps : {0.1, 0.005}) {
      const double ds = delta_star(eps, 3, 3);
      const auto c = certify_link(gen_pulse_train_at(retry_instants(ds, horizon)), ds, horizon);
      CHECK_FALSE(c.certified);
      CHECK(c.poc.alpha == 1.0);
    }
  }
}

TEST_CASE("certify_link: the chosen pair passes its own assumption check") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const double horizon = 5;
    const auto s = gen_pwm(rng.next(), 0.15, 1.0, horizon);
    const double ds = delta_star(0.005, 4, 4);
    const auto c = certify_link(s, ds, horizon);
    CHECK(c.certified);
    CHECK(c.poc.alpha < 1.0);
    CHECK(*c.poc.phi <= 0.5 * horizon);
    CHECK(check_assumptions(s, c.params, horizon).pass);
    // No other grid pair does better.
    const FitGrid grid;
    const WindowSupremum table(s, horizon);
    for (double m : grid.tau_f_multiples) {
      for (double td : grid.tau_d) {
        const auto p = poc_certificate({table.eta(m * ds), table.kappa(td), m * ds, td}, ds);
        if (p.satisfied && *p.phi <= 0.5 * horizon) CHECK(*p.phi >= *c.poc.phi);
      }
    }
  }
}

TEST_CASE("certify_link: periodic attack at half load") {
  // Pulses of 0.5 s every 1.25 s: the duration term alone carries the load.
  const double ds = 3.125e-4;
  const auto s = gen_periodic(1.25, 0.4, 0, 50);
  FitGrid grid;
  grid.tau_f_multiples = {10};
  grid.tau_d = {2.5};
  const auto c = certify_link(s, ds, 50, grid);
  CHECK(c.poc.alpha == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(c.certified);
}

TEST_CASE("certify_links and summarize") {
  const Graph g = build_graph(3, std::vector<Edge>{Edge(0, 1), Edge(1, 2)});
  std::map<Edge, DosSignal> dos;
  dos[Edge(1, 2)] = gen_periodic(0.5, 0.3, 0, 10);
  const auto rows = certify_links(g, dos, 0.1, 10);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].edge == Edge(0, 1));
  const auto s = summarize(rows, dos);
  CHECK(s.all_certified);
  CHECK(s.phi_max == *rows[1].cert.poc.phi);
  CHECK(s.alpha_max == rows[1].cert.poc.alpha);

  dos[Edge(1, 2)] = gen_pulse_train_at(retry_instants(delta_star(0.1, 2, 1), 10));
  const auto bad = summarize(certify_links(g, dos, 0.1, 10), dos);
  CHECK_FALSE(bad.all_certified);
  CHECK(bad.alpha_max == 1.0);
  CHECK(summarize(certify_links(g, {}, 0.1, 10), {}).phi_max == 0.0);
}

TEST_CASE("certify_link: empty grid is rejected") {
  FitGrid grid;
  grid.tau_d.clear();
  CHECK_THROWS_AS(certify_link(DosSignal{}, 0.01, 1, grid), DosError);
}
