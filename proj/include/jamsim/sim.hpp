#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

#include "jamsim/dos.hpp"
#include "jamsim/rng.hpp"
#include "jamsim/topology.hpp"

namespace jamsim {

class SimError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Mode { Nominal, Resilient };

// Quantizer with dead zone: sign(z) when |z| >= epsilon, else 0.
int quantize_sign(double z, double epsilon);

// Next clock duration after a successful exchange that observed disagreement D.
// Below the sensitivity the link falls back to the retry period
// epsilon / (2 (d_i + d_j)).
double clock_map(double disagreement, int d_i, int d_j, double epsilon);

struct SimConfig {
  double epsilon = 0.0;
  Mode mode = Mode::Resilient;
  double horizon = 0.0;
  std::map<Edge, DosSignal> dos;
  // Per-attempt genuine loss probability; an attempt fails when a uniform
  // draw from the link's own seeded stream falls below beta.
  std::map<Edge, double> genuine_beta;
  std::uint64_t beta_seed = 0;
  // Spacing of periodic state samples; 0 keeps only the first and last.
  double record_dt = 0.0;
  bool stop_on_quiescence = true;

  void validate(const Graph& g) const;
};

// Initial controls on one edge {i, j}, i < j: forward = u^ij, backward = u^ji.
struct DirectedControl {
  int forward = 0;
  int backward = 0;
};
using DirectedControls = std::vector<DirectedControl>;

enum class Outcome { Success, Jammed };

struct Attempt {
  double time = 0.0;
  Edge edge;
  Outcome outcome = Outcome::Success;
  double disagreement = 0.0;  // x^j - x^i at the attempt, i < j
  int control = 0;            // new u^ij
  double clock = 0.0;         // duration until the next attempt on this edge

  bool operator==(const Attempt&) const = default;
};

struct StateSample {
  double time = 0.0;
  std::vector<double> x;

  bool operator==(const StateSample&) const = default;
};

struct Trace {
  std::vector<Attempt> attempts;
  std::vector<StateSample> samples;
  // Time of the last control change when every control is zero at the end.
  std::optional<double> quiescence_time;
  // The run stopped early because the absorbing state was confirmed.
  bool quiescence_verified = false;
  double end_time = 0.0;

  const std::vector<double>& final_state() const { return samples.back().x; }
  bool operator==(const Trace&) const = default;
};

struct SimState {
  double t = 0.0;
  std::vector<double> x;
  std::vector<int> control;          // u^ij per edge index (u^ji = -u^ij)
  std::vector<int> rate;             // dx^i/dt = sum_j u^ij
  std::vector<double> next_attempt;  // per edge index
};

// Event-driven executor. Controls are piecewise constant, so the state is
// advanced in closed form between clock expirations.
class Simulator {
 public:
  Simulator(Graph g, std::span<const double> x0, const DirectedControls& u0, SimConfig cfg);

  const SimState& state() const { return state_; }
  const Graph& graph() const { return graph_; }
  const SimConfig& config() const { return cfg_; }

  // Pending (time, edge index) entries in firing order.
  std::vector<std::pair<double, std::size_t>> pending_events() const;
  double next_event_time() const { return calendar_.top().first; }

  // True once the next expiry lies beyond the horizon or the absorbing
  // state has been confirmed.
  bool finished() const;
  bool quiescence_confirmed() const { return confirmed_; }
  double last_control_change() const { return last_change_; }

  // Flows to the next expiry and processes every edge expiring then.
  std::vector<Attempt> advance();

  // State at time s >= state().t without mutating the simulator.
  std::vector<double> state_at(double s) const;
  // Flows the state to time s without processing events.
  void flow_to(double s);

 private:
  bool jammed(std::size_t e, double t);
  void update_confirmation();

  using Entry = std::pair<double, std::size_t>;
  Graph graph_;
  SimConfig cfg_;
  SimState state_;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> calendar_;
  std::vector<const DosSignal*> dos_;
  std::vector<double> beta_;
  std::vector<Rng> loss_rng_;
  std::vector<double> last_success_;
  std::vector<double> last_success_gap_;
  std::size_t nonzero_ = 0;
  double last_change_ = 0.0;
  bool confirmed_ = false;
};

Trace run(const Graph& g, std::span<const double> x0, const DirectedControls& u0, const SimConfig& cfg);

}  // namespace jamsim
