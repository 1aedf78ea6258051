#include "jamsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace jamsim {

int quantize_sign(double z, double epsilon) {
  if (std::abs(z) >= epsilon) return z > 0.0 ? 1 : -1;
  return 0;
}

double clock_map(double disagreement, int d_i, int d_j, double epsilon) {
  const double gap = std::abs(disagreement);
  if (gap >= epsilon) return gap / static_cast<double>(2 * (d_i + d_j));
  return delta_star(epsilon, d_i, d_j);
}

void SimConfig::validate(const Graph& g) const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw SimError("epsilon must be a positive number");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw SimError("horizon must be a positive number");
  if (!(record_dt >= 0.0)) throw SimError("record_dt must be >= 0");
  for (const auto& [e, s] : dos) {
    if (!g.has_edge(e)) {
      throw SimError("DoS signal given for {" + std::to_string(e.i) + "," + std::to_string(e.j) + "}, not an edge");
    }
  }
  for (const auto& [e, b] : genuine_beta) {
    if (!g.has_edge(e)) {
      throw SimError("loss bound given for {" + std::to_string(e.i) + "," + std::to_string(e.j) + "}, not an edge");
    }
    if (!(b >= 0.0 && b < 1.0)) throw SimError("genuine loss bound must lie in [0, 1)");
  }
}

Simulator::Simulator(Graph g, std::span<const double> x0, const DirectedControls& u0, SimConfig cfg)
    : graph_(std::move(g)), cfg_(std::move(cfg)) {
  cfg_.validate(graph_);
  const std::size_t n = graph_.node_count();
  const std::size_t m = graph_.edge_count();
  if (x0.size() != n) {
    throw SimError("initial state has " + std::to_string(x0.size()) + " entries, graph has " + std::to_string(n) +
                   " nodes");
  }
  if (u0.size() != m) {
    throw SimError("initial controls cover " + std::to_string(u0.size()) + " edges, graph has " + std::to_string(m));
  }
  state_.x.assign(x0.begin(), x0.end());
  state_.control.assign(m, 0);
  state_.rate.assign(n, 0);
  state_.next_attempt.assign(m, 0.0);
  for (std::size_t e = 0; e < m; ++e) {
    const auto [fwd, bwd] = u0[e];
    const Edge& ed = graph_.edges()[e];
    if (fwd < -1 || fwd > 1 || bwd < -1 || bwd > 1) {
      throw SimError("initial control on {" + std::to_string(ed.i) + "," + std::to_string(ed.j) +
                     "} is not in {-1, 0, 1}");
    }
    if (fwd != -bwd) {
      throw SimError("initial controls on {" + std::to_string(ed.i) + "," + std::to_string(ed.j) +
                     "} are not antisymmetric");
    }
    state_.control[e] = fwd;
    state_.rate[ed.i] += fwd;
    state_.rate[ed.j] -= fwd;
    if (fwd != 0) ++nonzero_;
    calendar_.emplace(0.0, e);
  }

  dos_.assign(m, nullptr);
  beta_.assign(m, 0.0);
  loss_rng_.reserve(m);
  for (std::size_t e = 0; e < m; ++e) {
    const Edge& ed = graph_.edges()[e];
    loss_rng_.emplace_back(std::initializer_list<std::uint64_t>{cfg_.beta_seed, static_cast<std::uint64_t>(ed.i),
                                                                static_cast<std::uint64_t>(ed.j)});
  }
  for (const auto& [ed, sig] : cfg_.dos) dos_[*graph_.edge_index(ed)] = &sig;
  for (const auto& [ed, b] : cfg_.genuine_beta) beta_[*graph_.edge_index(ed)] = b;
  last_success_.assign(m, -kInf);
  last_success_gap_.assign(m, kInf);
}

std::vector<std::pair<double, std::size_t>> Simulator::pending_events() const {
  auto copy = calendar_;
  std::vector<Entry> out;
  while (!copy.empty()) {
    out.push_back(copy.top());
    copy.pop();
  }
  return out;
}

bool Simulator::finished() const {
  return confirmed_ || calendar_.empty() || calendar_.top().first > cfg_.horizon;
}

std::vector<double> Simulator::state_at(double s) const {
  std::vector<double> x = state_.x;
  if (nonzero_ == 0) return x;
  const double dt = s - state_.t;
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += state_.rate[i] * dt;
  return x;
}

void Simulator::flow_to(double s) {
  if (nonzero_ != 0) {
    const double dt = s - state_.t;
    for (std::size_t i = 0; i < state_.x.size(); ++i) state_.x[i] += state_.rate[i] * dt;
  }
  state_.t = s;
}

bool Simulator::jammed(std::size_t e, double t) {
  bool lost = false;
  if (beta_[e] > 0.0) lost = loss_rng_[e].uniform01() < beta_[e];
  if (dos_[e] != nullptr && is_active(*dos_[e], t)) lost = true;
  return lost;
}

std::vector<Attempt> Simulator::advance() {
  std::vector<Attempt> batch;
  if (calendar_.empty()) return batch;
  const double now = calendar_.top().first;
  flow_to(now);

  std::vector<std::size_t> firing;
  while (!calendar_.empty() && calendar_.top().first == now) {
    firing.push_back(calendar_.top().second);
    calendar_.pop();
  }
  std::sort(firing.begin(), firing.end());

  // All disagreements are read before any control is written.
  batch.reserve(firing.size());
  for (std::size_t e : firing) {
    const Edge& ed = graph_.edges()[e];
    Attempt a;
    a.time = now;
    a.edge = ed;
    a.disagreement = state_.x[ed.j] - state_.x[ed.i];
    batch.push_back(a);
  }

  for (std::size_t k = 0; k < firing.size(); ++k) {
    const std::size_t e = firing[k];
    Attempt& a = batch[k];
    const Edge& ed = a.edge;
    const int di = graph_.degree(ed.i);
    const int dj = graph_.degree(ed.j);
    const bool lost = cfg_.mode == Mode::Resilient && jammed(e, now);
    if (lost) {
      a.outcome = Outcome::Jammed;
      a.control = 0;
      a.clock = delta_star(cfg_.epsilon, di, dj);
    } else {
      a.outcome = Outcome::Success;
      a.control = quantize_sign(a.disagreement, cfg_.epsilon);
      a.clock = clock_map(a.disagreement, di, dj, cfg_.epsilon);
      last_success_[e] = now;
      last_success_gap_[e] = std::abs(a.disagreement);
    }
    const int old = state_.control[e];
    if (a.control != old) {
      state_.rate[ed.i] += a.control - old;
      state_.rate[ed.j] -= a.control - old;
      if (old == 0) ++nonzero_;
      if (a.control == 0) --nonzero_;
      state_.control[e] = a.control;
      last_change_ = now;
    }
    state_.next_attempt[e] = now + a.clock;
    calendar_.emplace(state_.next_attempt[e], e);
  }

  update_confirmation();
  return batch;
}

void Simulator::update_confirmation() {
  if (!cfg_.stop_on_quiescence || nonzero_ != 0) return;
  // With every control at zero the state is frozen; it stays frozen for good
  // once every link has exchanged since the freeze and seen a sub-threshold gap.
  for (std::size_t e = 0; e < last_success_.size(); ++e) {
    if (last_success_[e] < last_change_ || !(last_success_gap_[e] < cfg_.epsilon)) return;
  }
  confirmed_ = true;
}

Trace run(const Graph& g, std::span<const double> x0, const DirectedControls& u0, const SimConfig& cfg) {
  Simulator sim(g, x0, u0, cfg);
  Trace trace;
  trace.samples.push_back({0.0, std::vector<double>(x0.begin(), x0.end())});

  const double dt = cfg.record_dt;
  std::size_t k = 1;
  auto next_sample = [&] { return dt > 0.0 ? static_cast<double>(k) * dt : kInf; };
  auto emit_samples_until = [&](double limit) {
    for (double s = next_sample(); s <= limit && s <= cfg.horizon; s = next_sample()) {
      trace.samples.push_back({s, sim.state_at(s)});
      ++k;
    }
  };

  while (!sim.finished()) {
    emit_samples_until(sim.next_event_time());
    auto batch = sim.advance();
    trace.attempts.insert(trace.attempts.end(), batch.begin(), batch.end());
  }

  if (sim.quiescence_confirmed()) {
    trace.quiescence_verified = true;
    trace.end_time = sim.state().t;
  } else {
    emit_samples_until(cfg.horizon);
    sim.flow_to(cfg.horizon);
    trace.end_time = cfg.horizon;
  }
  if (trace.samples.back().time < trace.end_time) trace.samples.push_back({trace.end_time, sim.state().x});

  const auto& u = sim.state().control;
  if (std::all_of(u.begin(), u.end(), [](int v) { return v == 0; })) trace.quiescence_time = sim.last_control_change();
  return trace;
}

}  // namespace jamsim
