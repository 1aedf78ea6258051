#include "jamsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>

namespace jamsim {

namespace {

constexpr std::size_t kMaxDiagnostics = 8;

double sum_of_squares(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return s;
}

std::string edge_str(Edge e) { return "{" + std::to_string(e.i) + "," + std::to_string(e.j) + "}"; }

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

double lyapunov(std::span<const double> x) { return 0.5 * sum_of_squares(x); }

ConsensusCheck in_consensus_set(std::span<const double> x, double epsilon, std::size_t n) {
  if (!(epsilon > 0.0)) throw AnalysisError("epsilon must be > 0");
  if (n < 2) throw AnalysisError("consensus set needs n >= 2");
  ConsensusCheck c;
  c.delta = epsilon * static_cast<double>(n - 1);
  if (!x.empty()) {
    auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    c.max_gap = *hi - *lo;
  }
  c.in_set = c.max_gap < c.delta;
  return c;
}

double max_neighbor_gap(const Graph& g, std::span<const double> x) {
  double gap = 0.0;
  for (const Edge& e : g.edges()) gap = std::max(gap, std::abs(x[e.j] - x[e.i]));
  return gap;
}

double convergence_bound(double epsilon, int d_max, int d_min, double phi, std::span<const double> x0) {
  if (!(epsilon > 0.0)) throw AnalysisError("epsilon must be > 0");
  if (d_min < 1) throw AnalysisError("convergence bound needs d_min >= 1");
  if (!(phi >= 0.0)) throw AnalysisError("phi must be >= 0");
  const double dm = d_max;
  const double factor = 1.0 / epsilon + dm / (epsilon * d_min) + 4.0 * dm * phi / (epsilon * epsilon);
  return factor * sum_of_squares(x0);
}

double convergence_bound_via_decrement(double epsilon, int d_max, int d_min, double phi,
                                       std::span<const double> x0) {
  if (!(epsilon > 0.0)) throw AnalysisError("epsilon must be > 0");
  if (d_min < 1) throw AnalysisError("convergence bound needs d_min >= 1");
  const double decrement = epsilon * epsilon / (8.0 * d_max);
  const double period = epsilon / (4.0 * d_max) + epsilon / (4.0 * d_min) + phi;
  return period * lyapunov(x0) / decrement;
}

std::optional<double> measured_quiescence(const Trace& trace, const Graph& g) {
  std::vector<int> control(g.edge_count(), 0);
  double last_change = 0.0;
  for (const Attempt& a : trace.attempts) {
    auto idx = g.edge_index(a.edge);
    if (!idx) throw AnalysisError("trace refers to " + edge_str(a.edge) + ", not an edge of the graph");
    if (control[*idx] != a.control) {
      control[*idx] = a.control;
      last_change = a.time;
    }
  }
  if (std::any_of(control.begin(), control.end(), [](int u) { return u != 0; })) return std::nullopt;
  return last_change;
}

ConsensusReport consensus_report(const Trace& trace, const Graph& g, double epsilon, double phi) {
  if (trace.samples.empty()) throw AnalysisError("trace has no state samples");
  const auto stats = degree_stats(g);
  ConsensusReport r;
  const auto c = in_consensus_set(trace.final_state(), epsilon, g.node_count());
  r.delta = c.delta;
  r.max_pairwise_gap = c.max_gap;
  r.in_set = c.in_set;
  r.t_star_measured = trace.quiescence_time;
  r.t_star_bound = convergence_bound(epsilon, stats.d_max, stats.d_min, phi, trace.samples.front().x);
  if (r.t_star_measured) r.bound_holds = *r.t_star_measured <= r.t_star_bound;
  return r;
}

PocVerdict verify_poc(const Trace& trace, const std::map<Edge, double>& phi_per_edge) {
  std::map<Edge, std::vector<const Attempt*>> by_edge;
  for (const Attempt& a : trace.attempts) by_edge[a.edge].push_back(&a);

  PocVerdict v;
  for (const auto& [edge, attempts] : by_edge) {
    const bool any_jam = std::any_of(attempts.begin(), attempts.end(),
                                     [](const Attempt* a) { return a->outcome == Outcome::Jammed; });
    if (!any_jam) continue;
    auto it = phi_per_edge.find(edge);
    if (it == phi_per_edge.end()) {
      throw AnalysisError("no persistency bound for " + edge_str(edge) + ", which has jammed attempts");
    }
    const double phi = it->second;
    std::size_t next = 0;  // first successful attempt at or after the current one
    for (std::size_t k = 0; k < attempts.size(); ++k) {
      if (attempts[k]->outcome != Outcome::Jammed) continue;
      ++v.jammed_checked;
      const double t = attempts[k]->time;
      const double deadline = t + phi;
      next = std::max(next, k);
      while (next < attempts.size() && attempts[next]->outcome != Outcome::Success) ++next;
      const bool found = next < attempts.size();
      if (found && attempts[next]->time <= deadline) continue;
      if (!found && deadline > trace.end_time) {
        ++v.unverifiable;
        continue;
      }
      if (v.pass) {
        v.pass = false;
        PocViolation bad{edge, t, deadline, std::nullopt};
        if (found) bad.next_success = attempts[next]->time;
        v.first_violation = bad;
      }
    }
  }
  return v;
}

InvariantReport verify_trace_invariants(const Trace& trace, const Graph& g, double epsilon) {
  if (trace.samples.empty()) throw AnalysisError("trace has no state samples");
  InvariantReport r;
  auto fail = [&r](bool& flag, const std::string& msg) {
    flag = false;
    if (r.failures.size() < kMaxDiagnostics) r.failures.push_back(msg);
  };

  const auto stats = degree_stats(g);
  const double dwell_floor = epsilon / static_cast<double>(4 * stats.d_max);
  std::vector<double> x = trace.samples.front().x;
  if (x.size() != g.node_count()) throw AnalysisError("trace state size does not match the graph");

  double scale = 1.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  const double abs_sum0 = std::accumulate(x.begin(), x.end(), 0.0, [](double s, double v) { return s + std::abs(v); });
  const double sum0 = std::accumulate(x.begin(), x.end(), 0.0);
  const double conservation_tol = 1e-9 * std::max(1.0, abs_sum0);
  double v_prev = lyapunov(x);
  const double v_slack = 1e-12 * std::max(1.0, v_prev);
  const double replay_tol = 1e-9 * scale;
  const double gap_slack = 1e-12 * scale;

  const std::size_t m = g.edge_count();
  std::vector<int> control(m, 0);
  std::vector<int> rate(g.node_count(), 0);
  std::vector<double> last_time(m, -kInf);
  std::vector<double> last_clock(m, 0.0);
  // Open successful-exchange intervals with |D(t_k)| >= epsilon.
  std::vector<std::optional<double>> watch(m);
  double t = trace.samples.front().time;

  auto check_state = [&](double at, const std::string& where) {
    const double s = std::accumulate(x.begin(), x.end(), 0.0);
    if (std::abs(s - sum0) > conservation_tol) {
      fail(r.conservation, "sum of states drifted to " + fmt(s) + " (from " + fmt(sum0) + ") at " + where);
    }
    const double v = lyapunov(x);
    if (v > v_prev + v_slack) {
      fail(r.lyapunov_monotone, "V increased from " + fmt(v_prev) + " to " + fmt(v) + " at " + where);
    }
    v_prev = v;
    (void)at;
  };

  auto check_watched = [&](double at) {
    for (std::size_t e = 0; e < m; ++e) {
      if (!watch[e]) continue;
      const Edge& ed = g.edges()[e];
      const double d0 = *watch[e];
      const double d = x[ed.j] - x[ed.i];
      if (std::abs(d) < std::abs(d0) / 2.0 - gap_slack) {
        fail(r.half_gap, "edge " + edge_str(ed) + ": |D| fell to " + fmt(std::abs(d)) + " below half of " +
                             fmt(std::abs(d0)) + " at t=" + fmt(at));
      }
      if ((d > 0.0) != (d0 > 0.0) || d == 0.0) {
        fail(r.sign_preserved, "edge " + edge_str(ed) + ": disagreement changed sign at t=" + fmt(at));
      }
    }
  };

  std::size_t next_sample = 1;
  auto consume_samples_until = [&](double limit) {
    while (next_sample < trace.samples.size() && trace.samples[next_sample].time <= limit) {
      const StateSample& smp = trace.samples[next_sample];
      if (smp.x.size() != x.size()) throw AnalysisError("trace sample size does not match the graph");
      // Conservation and monotonicity on the recorded sample itself.
      const double s = std::accumulate(smp.x.begin(), smp.x.end(), 0.0);
      if (std::abs(s - sum0) > conservation_tol) {
        fail(r.conservation, "sample at t=" + fmt(smp.time) + " has sum " + fmt(s) + " (from " + fmt(sum0) + ")");
      }
      const double v = lyapunov(smp.x);
      if (v > v_prev + v_slack) {
        fail(r.lyapunov_monotone,
             "V increased from " + fmt(v_prev) + " to " + fmt(v) + " at sample t=" + fmt(smp.time));
      }
      v_prev = v;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double replayed = x[i] + rate[i] * (smp.time - t);
        if (std::abs(replayed - smp.x[i]) > replay_tol) {
          fail(r.replay_consistent, "sample at t=" + fmt(smp.time) + " disagrees with the replay at node " +
                                        std::to_string(i));
          break;
        }
      }
      ++next_sample;
    }
  };

  const auto& attempts = trace.attempts;
  for (std::size_t k = 0; k < attempts.size();) {
    const double now = attempts[k].time;
    if (now < t) throw AnalysisError("trace attempts are not in time order");
    consume_samples_until(now);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += rate[i] * (now - t);
    t = now;
    check_state(now, "t=" + fmt(now));
    check_watched(now);

    std::size_t end = k;
    while (end < attempts.size() && attempts[end].time == now) ++end;
    // Reads first, then writes, as the protocol does.
    for (std::size_t q = k; q < end; ++q) {
      const Attempt& a = attempts[q];
      auto idx = g.edge_index(a.edge);
      if (!idx) throw AnalysisError("trace refers to " + edge_str(a.edge) + ", not an edge of the graph");
      const std::size_t e = *idx;
      ++r.attempts_checked;
      const double d = x[a.edge.j] - x[a.edge.i];
      if (std::abs(d - a.disagreement) > replay_tol) {
        fail(r.replay_consistent, "edge " + edge_str(a.edge) + " recorded D=" + fmt(a.disagreement) +
                                      " but the replay gives " + fmt(d) + " at t=" + fmt(now));
      }
      if (last_time[e] > -kInf) {
        if (!(now > last_time[e]) || now != last_time[e] + last_clock[e]) {
          fail(r.dwell, "edge " + edge_str(a.edge) + " attempted at " + fmt(now) + ", expected " +
                            fmt(last_time[e] + last_clock[e]));
        }
      }
      if (!(a.clock >= dwell_floor)) {
        fail(r.dwell, "edge " + edge_str(a.edge) + " scheduled a gap of " + fmt(a.clock) + " < " + fmt(dwell_floor));
      }
      const int di = g.degree(a.edge.i);
      const int dj = g.degree(a.edge.j);
      if (a.outcome == Outcome::Success) {
        if (a.control != quantize_sign(a.disagreement, epsilon) ||
            a.clock != clock_map(a.disagreement, di, dj, epsilon)) {
          fail(r.protocol_conformance, "edge " + edge_str(a.edge) + " success at t=" + fmt(now) +
                                           " does not follow the quantizer/clock rule");
        }
      } else if (a.control != 0 || a.clock != delta_star(epsilon, di, dj)) {
        fail(r.protocol_conformance,
             "edge " + edge_str(a.edge) + " jammed at t=" + fmt(now) + " without reset to the retry period");
      }
    }
    for (std::size_t q = k; q < end; ++q) {
      const Attempt& a = attempts[q];
      const std::size_t e = *g.edge_index(a.edge);
      if (watch[e]) ++r.intervals_checked;
      watch[e].reset();
      if (a.outcome == Outcome::Success && std::abs(a.disagreement) >= epsilon) watch[e] = a.disagreement;
      const int delta = a.control - control[e];
      rate[a.edge.i] += delta;
      rate[a.edge.j] -= delta;
      control[e] = a.control;
      last_time[e] = now;
      last_clock[e] = a.clock;
    }
    k = end;
  }

  consume_samples_until(trace.end_time);
  if (trace.end_time > t) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += rate[i] * (trace.end_time - t);
    t = trace.end_time;
    check_state(t, "end of trace");
    check_watched(t);
  }
  return r;
}

NecessityReport necessity_experiment(const Graph& g, Edge bridge, std::span<const double> x0, double epsilon,
                                     double horizon) {
  if (!g.has_edge(bridge)) throw AnalysisError(edge_str(bridge) + " is not an edge");
  if (!is_connected(g)) throw AnalysisError("necessity experiment needs a connected graph");
  if (!is_cut_edge(g, bridge)) throw AnalysisError(edge_str(bridge) + " is not a cut edge");
  if (x0.size() != g.node_count()) throw AnalysisError("initial state size does not match the graph");

  // Side of the cut containing bridge.i.
  const Edge cut[] = {bridge};
  const Graph split = remove_links(g, cut);
  std::vector<char> side(g.node_count(), 0);
  std::queue<NodeId> frontier;
  frontier.push(bridge.i);
  side[bridge.i] = 1;
  while (!frontier.empty()) {
    const NodeId v = frontier.front();
    frontier.pop();
    for (NodeId w : split.neighbors(v)) {
      if (!side[w]) {
        side[w] = 1;
        frontier.push(w);
      }
    }
  }

  const double delta = epsilon * static_cast<double>(g.node_count() - 1);
  double cross = 0.0;
  for (std::size_t a = 0; a < g.node_count(); ++a) {
    for (std::size_t b = 0; b < g.node_count(); ++b) {
      if (side[a] && !side[b]) cross = std::max(cross, std::abs(x0[a] - x0[b]));
    }
  }
  if (cross < delta) {
    throw AnalysisError("initial disagreement across the cut (" + fmt(cross) + ") is below delta = " + fmt(delta));
  }

  auto pick = [&](char which, NodeId endpoint) {
    for (std::size_t v = 0; v < g.node_count(); ++v) {
      if (side[v] == which && static_cast<NodeId>(v) != endpoint) return static_cast<NodeId>(v);
    }
    return endpoint;
  };
  const Edge extra(pick(1, bridge.i), pick(0, bridge.j));
  if (extra == bridge) throw AnalysisError("both sides of the cut are single nodes; no redundant link can be added");

  auto attack = [&](const Graph& graph) {
    SimConfig cfg;
    cfg.epsilon = epsilon;
    cfg.mode = Mode::Resilient;
    cfg.horizon = horizon;
    cfg.record_dt = horizon / 100.0;
    const double dstar = delta_star(epsilon, graph.degree(bridge.i), graph.degree(bridge.j));
    cfg.dos.emplace(bridge, gen_pulse_train_at(retry_instants(dstar, horizon)));
    return run(graph, x0, DirectedControls(graph.edge_count()), cfg);
  };
  auto bridge_successes = [&](const Trace& tr) {
    return static_cast<std::size_t>(std::count_if(tr.attempts.begin(), tr.attempts.end(), [&](const Attempt& a) {
      return a.edge == bridge && a.outcome == Outcome::Success;
    }));
  };

  std::vector<Edge> edges = g.edges();
  edges.push_back(extra);
  const Graph augmented = build_graph(g.node_count(), edges);

  NecessityReport rep;
  rep.bridge = bridge;
  rep.added_link = extra;
  rep.cut_trace = attack(g);
  rep.redundant_trace = attack(augmented);
  rep.cut = in_consensus_set(rep.cut_trace.final_state(), epsilon, g.node_count());
  rep.redundant = in_consensus_set(rep.redundant_trace.final_state(), epsilon, g.node_count());
  rep.cut_bridge_successes = bridge_successes(rep.cut_trace);
  rep.redundant_bridge_successes = bridge_successes(rep.redundant_trace);
  return rep;
}

nlohmann::json to_json(const ConsensusReport& r) {
  nlohmann::json j;
  j["delta"] = r.delta;
  j["max_pairwise_gap"] = r.max_pairwise_gap;
  j["in_set"] = r.in_set;
  j["t_star_measured"] = r.t_star_measured ? nlohmann::json(*r.t_star_measured) : nlohmann::json("not reached");
  j["t_star_bound"] = number_to_json(r.t_star_bound);
  j["bound_holds"] = r.bound_holds ? nlohmann::json(*r.bound_holds) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const InvariantReport& r) {
  return {{"all_pass", r.all_pass()},
          {"conservation", r.conservation},
          {"lyapunov_monotone", r.lyapunov_monotone},
          {"dwell", r.dwell},
          {"half_gap", r.half_gap},
          {"sign_preserved", r.sign_preserved},
          {"protocol_conformance", r.protocol_conformance},
          {"replay_consistent", r.replay_consistent},
          {"attempts_checked", r.attempts_checked},
          {"intervals_checked", r.intervals_checked},
          {"failures", r.failures}};
}

nlohmann::json to_json(const PocVerdict& r) {
  nlohmann::json j{{"pass", r.pass}, {"jammed_checked", r.jammed_checked}, {"unverifiable", r.unverifiable}};
  if (r.first_violation) {
    const auto& v = *r.first_violation;
    j["first_violation"] = {{"edge", {v.edge.i, v.edge.j}},
                            {"jammed_at", v.jammed_at},
                            {"deadline", v.deadline},
                            {"next_success", v.next_success ? nlohmann::json(*v.next_success) : nlohmann::json(nullptr)}};
  }
  return j;
}

}  // namespace jamsim
