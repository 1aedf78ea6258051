#include <cmath>
#include <vector>

#include "doctest.h"
#include "jamsim/analysis.hpp"
#include "jamsim/certify.hpp"

using namespace jamsim;

namespace {

Graph make(std::size_t n, std::vector<std::pair<int, int>> edges) { return build_graph(n, edges); }

SimConfig config(double eps, double horizon) {
  SimConfig c;
  c.epsilon = eps;
  c.horizon = horizon;
  return c;
}

Trace two_node_trace() {
  const Graph g = make(2, {{0, 1}});
  return run(g, std::vector<double>{0, 1}, DirectedControls(1), config(0.1, 20));
}

std::vector<double> uniform_x(Rng& rng, std::size_t n) {
  std::vector<double> x(n);
  for (double& v : x) v = rng.uniform01();
  return x;
}

}  // namespace

TEST_CASE("lyapunov") {
  CHECK(lyapunov(std::vector<double>{0, 1}) == 0.5);
  CHECK(lyapunov(std::vector<double>(5, 0.0)) == 0.0);
  Rng rng(1);
  CHECK(lyapunov(uniform_x(rng, 40)) <= 20.0);
}

TEST_CASE("in_consensus_set") {
  const auto a = in_consensus_set(std::vector<double>{0.46875, 0.53125}, 0.1, 2);
  CHECK(a.in_set);
  CHECK(a.max_gap == 0.0625);
  CHECK(a.delta == 0.1);
  const auto b = in_consensus_set(std::vector<double>{0, 1}, 0.1, 2);
  CHECK_FALSE(b.in_set);
  CHECK(b.max_gap == 1.0);
  CHECK(in_consensus_set(std::vector<double>(40, 0.0), 0.005, 40).delta == doctest::Approx(0.195).epsilon(1e-15));
  // Equality at the boundary is outside the set.
  CHECK_FALSE(in_consensus_set(std::vector<double>{0, 0.5}, 0.5, 2).in_set);
}

TEST_CASE("convergence_bound") {
  CHECK(convergence_bound(0.1, 1, 1, 0, std::vector<double>{0, 1}) == doctest::Approx(20.0).epsilon(1e-14));
  CHECK(convergence_bound(0.1, 1, 1, 0, std::vector<double>{0, 0}) == 0.0);
  CHECK(convergence_bound_via_decrement(0.1, 1, 1, 0, std::vector<double>{0, 1}) ==
        doctest::Approx(20.0).epsilon(1e-14));
}

TEST_CASE("both forms of the convergence bound agree") {
  Rng rng(2);
  for (int trial = 0; trial < 1000; ++trial) {
    const int dmin = 1 + static_cast<int>(rng.below(6));
    const int dmax = dmin + static_cast<int>(rng.below(6));
    const double eps = rng.uniform(1e-4, 1.0);
    const double phi = rng.uniform(0, 2);
    std::vector<double> x(2 + rng.below(30));
    for (double& v : x) v = rng.uniform(-3, 3);
    const double a = convergence_bound(eps, dmax, dmin, phi, x);
    const double b = convergence_bound_via_decrement(eps, dmax, dmin, phi, x);
    CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
  }
}

TEST_CASE("consensus_report on the two-node run") {
  const Graph g = make(2, {{0, 1}});
  const auto r = consensus_report(two_node_trace(), g, 0.1, 0.0);
  CHECK(r.in_set);
  CHECK(r.max_pairwise_gap == 0.0625);
  CHECK(*r.t_star_measured == 0.46875);
  CHECK(r.t_star_bound == doctest::Approx(20.0));
  CHECK(*r.bound_holds);
}

TEST_CASE("measured_quiescence reads the attempt log") {
  const Graph g = make(2, {{0, 1}});
  auto tr = two_node_trace();
  CHECK(*measured_quiescence(tr, g) == 0.46875);
  tr.attempts.pop_back();
  CHECK_FALSE(measured_quiescence(tr, g).has_value());
}

TEST_CASE("verify_poc") {
  CHECK(verify_poc(two_node_trace(), {}).pass);

  const Graph g = make(2, {{0, 1}});
  auto cfg = config(0.1, 2);
  cfg.stop_on_quiescence = false;
  const double ds = delta_star(0.1, 1, 1);
  cfg.dos[Edge(0, 1)] = gen_pulse_train_at(retry_instants(ds, 2));
  const auto tr = run(g, std::vector<double>{0, 1}, DirectedControls(1), cfg);
  for (const auto& a : tr.attempts) CHECK(a.outcome == Outcome::Jammed);
  const auto cert = certify_link(cfg.dos[Edge(0, 1)], ds, 2);
  CHECK(cert.poc.alpha == 1.0);
  CHECK_FALSE(cert.certified);
  // Any finite window is eventually exceeded.
  const auto v = verify_poc(tr, {{Edge(0, 1), 0.5}});
  CHECK_FALSE(v.pass);
  REQUIRE(v.first_violation);
  CHECK(v.first_violation->jammed_at == 0.0);
  CHECK_FALSE(v.first_violation->next_success.has_value());
  CHECK_THROWS_AS(verify_poc(tr, {}), AnalysisError);
}

TEST_CASE("verify_poc passes on certified random attacks") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Graph g = random_regular_connected(10, 3, rng.next());
    const double eps = 0.01;
    const double horizon = 3;
    auto cfg = config(eps, horizon);
    cfg.stop_on_quiescence = false;
    for (const Edge& e : g.edges()) cfg.dos[e] = gen_pwm(rng.next(), 0.15, 1.0, horizon);
    const auto tr = run(g, uniform_x(rng, 10), DirectedControls(g.edge_count()), cfg);
    std::map<Edge, double> phi;
    for (const auto& row : certify_links(g, cfg.dos, eps, horizon)) {
      if (row.cert.certified) phi[row.edge] = *row.cert.poc.phi;
    }
    Trace checked = tr;
    std::erase_if(checked.attempts, [&](const Attempt& a) { return !phi.contains(a.edge); });
    const auto v = verify_poc(checked, phi);
    CHECK(v.pass);
    CHECK(v.jammed_checked > 0);
  }
}

TEST_CASE("trace invariants hold on the two-node oracle") {
  const Graph g = make(2, {{0, 1}});
  const auto r = verify_trace_invariants(two_node_trace(), g, 0.1);
  CHECK(r.all_pass());
  CHECK(r.attempts_checked == 5);
}

TEST_CASE("trace invariants catch a flipped control") {
  const Graph g = make(2, {{0, 1}});
  auto tr = two_node_trace();
  tr.attempts[1].control = -1;  // pushes the states apart
  const auto r = verify_trace_invariants(tr, g, 0.1);
  CHECK_FALSE(r.all_pass());
  CHECK_FALSE(r.lyapunov_monotone);
  CHECK_FALSE(r.failures.empty());
}

TEST_CASE("trace invariants catch a tampered sample and a short clock") {
  const Graph g = make(2, {{0, 1}});
  auto tr = two_node_trace();
  tr.samples.back().x[0] += 0.01;
  const auto a = verify_trace_invariants(tr, g, 0.1);
  CHECK_FALSE(a.conservation);
  CHECK_FALSE(a.replay_consistent);

  auto tr2 = two_node_trace();
  tr2.attempts[3].clock = 0.01;
  CHECK_FALSE(verify_trace_invariants(tr2, g, 0.1).all_pass());
}

TEST_CASE("trace invariants hold on random attacked runs") {
  Rng rng(4);
  for (int trial = 0; trial < 15; ++trial) {
    const Graph g = random_regular_connected(14, 4, rng.next());
    auto cfg = config(0.005, 2);
    cfg.record_dt = 0.01;
    for (const Edge& e : g.edges()) cfg.dos[e] = gen_pwm(rng.next(), 0.15, 1.0, 2);
    DirectedControls u0(g.edge_count());
    for (auto& c : u0) {
      c.forward = static_cast<int>(rng.below(3)) - 1;
      c.backward = -c.forward;
    }
    const auto tr = run(g, uniform_x(rng, 14), u0, cfg);
    const auto r = verify_trace_invariants(tr, g, 0.005);
    CHECK(r.all_pass());
    for (const auto& f : r.failures) MESSAGE(f);
  }
}

TEST_CASE("necessity: a jammed bridge blocks consensus, a second link restores it") {
  const Graph path = make(3, {{0, 1}, {1, 2}});
  const auto rep = necessity_experiment(path, Edge(1, 2), std::vector<double>{0, 0, 1}, 0.1, 20);
  CHECK(rep.added_link == Edge(0, 2));
  CHECK_FALSE(rep.cut.in_set);
  CHECK(rep.cut.max_gap >= rep.cut.delta);
  CHECK(rep.cut_bridge_successes == 0);
  CHECK(rep.cut_trace.final_state()[2] == 1.0);
  CHECK(rep.redundant.in_set);
  CHECK(rep.redundant_bridge_successes == 0);
  CHECK(verify_trace_invariants(rep.cut_trace, path, 0.1).all_pass());
}

TEST_CASE("necessity: preconditions") {
  const Graph tri = make(3, {{0, 1}, {1, 2}, {0, 2}});
  CHECK_THROWS_AS(necessity_experiment(tri, Edge(0, 1), std::vector<double>{0, 0, 1}, 0.1, 5), AnalysisError);
  const Graph path = make(3, {{0, 1}, {1, 2}});
  CHECK_THROWS_AS(necessity_experiment(path, Edge(1, 2), std::vector<double>{0, 0, 0.1}, 0.1, 5), AnalysisError);
  const Graph pair = make(2, {{0, 1}});
  CHECK_THROWS_AS(necessity_experiment(pair, Edge(0, 1), std::vector<double>{0, 1}, 0.1, 5), AnalysisError);
}

TEST_CASE("triangle with one link jammed forever still agrees") {
  const Graph tri = make(3, {{0, 1}, {1, 2}, {0, 2}});
  auto cfg = config(0.1, 20);
  cfg.dos[Edge(0, 2)] = DosSignal::from_intervals({{0.0, 20.0}});
  const auto tr = run(tri, std::vector<double>{0, 0.5, 1}, DirectedControls(3), cfg);
  CHECK(in_consensus_set(tr.final_state(), 0.1, 3).in_set);
  CHECK(verify_trace_invariants(tr, tri, 0.1).all_pass());
}

TEST_CASE("no attack: consensus on both graphs") {
  for (const auto& g : {make(3, {{0, 1}, {1, 2}}), make(3, {{0, 1}, {1, 2}, {0, 2}})}) {
    const auto tr = run(g, std::vector<double>{0, 0, 1}, DirectedControls(g.edge_count()), config(0.1, 20));
    CHECK(in_consensus_set(tr.final_state(), 0.1, 3).in_set);
  }
}

TEST_CASE("reports serialize to json") {
  const Graph g = make(2, {{0, 1}});
  const auto tr = two_node_trace();
  const auto j = to_json(consensus_report(tr, g, 0.1, 0));
  CHECK(j.at("in_set") == true);
  CHECK(j.at("t_star_measured") == 0.46875);
  CHECK(to_json(verify_trace_invariants(tr, g, 0.1)).at("all_pass") == true);
  CHECK(to_json(verify_poc(tr, {})).at("pass") == true);
}
