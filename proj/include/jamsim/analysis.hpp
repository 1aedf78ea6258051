#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "jamsim/sim.hpp"
#include "json.hpp"

namespace jamsim {

class AnalysisError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

double lyapunov(std::span<const double> x);

struct ConsensusCheck {
  bool in_set = false;
  double max_gap = 0.0;
  double delta = 0.0;
};

// Strict test max_{i,j} |x^i - x^j| < epsilon (n - 1).
ConsensusCheck in_consensus_set(std::span<const double> x, double epsilon, std::size_t n);

// Largest |x^j - x^i| over the edges of g.
double max_neighbor_gap(const Graph& g, std::span<const double> x);

// Convergence-time bound written in terms of sum_i x_i(0)^2.
double convergence_bound(double epsilon, int d_max, int d_min, double phi, std::span<const double> x0);
// The same bound written through the per-exchange Lyapunov decrement
// epsilon^2 / (8 d_max). Kept separate so the two algebraic routes can be compared.
double convergence_bound_via_decrement(double epsilon, int d_max, int d_min, double phi,
                                       std::span<const double> x0);

struct ConsensusReport {
  double delta = 0.0;
  double max_pairwise_gap = 0.0;
  bool in_set = false;
  std::optional<double> t_star_measured;
  double t_star_bound = 0.0;
  std::optional<bool> bound_holds;
};

ConsensusReport consensus_report(const Trace& trace, const Graph& g, double epsilon, double phi);

// Last control change read back from the attempt log; nullopt when some
// control is still nonzero at the end of the trace.
std::optional<double> measured_quiescence(const Trace& trace, const Graph& g);

struct PocViolation {
  Edge edge;
  double jammed_at = 0.0;
  double deadline = 0.0;
  std::optional<double> next_success;
};

struct PocVerdict {
  bool pass = true;
  std::size_t jammed_checked = 0;
  // Jammed attempts whose deadline lies past the end of the trace with no
  // success recorded in between.
  std::size_t unverifiable = 0;
  std::optional<PocViolation> first_violation;
};

// Every jammed attempt at t on edge e must be followed by a successful
// attempt on e no later than t + phi[e]. Exact time comparisons.
PocVerdict verify_poc(const Trace& trace, const std::map<Edge, double>& phi_per_edge);

struct InvariantReport {
  bool conservation = true;
  bool lyapunov_monotone = true;
  bool dwell = true;
  bool half_gap = true;
  bool sign_preserved = true;
  bool protocol_conformance = true;
  bool replay_consistent = true;
  std::size_t attempts_checked = 0;
  std::size_t intervals_checked = 0;
  std::vector<std::string> failures;  // first few diagnostics

  bool all_pass() const {
    return conservation && lyapunov_monotone && dwell && half_gap && sign_preserved && protocol_conformance &&
           replay_consistent;
  }
};

// Replays the attempt log from the first sample and checks: conservation of
// sum x, Lyapunov monotonicity at every event and sample, the per-edge dwell
// time, the half-gap and sign preservation between successful exchanges, and
// that the recorded samples match the replay.
InvariantReport verify_trace_invariants(const Trace& trace, const Graph& g, double epsilon);

struct NecessityReport {
  Edge bridge;
  Edge added_link;
  Trace cut_trace;
  Trace redundant_trace;
  ConsensusCheck cut;
  ConsensusCheck redundant;
  std::size_t cut_bridge_successes = 0;
  std::size_t redundant_bridge_successes = 0;
};

// Jams every transmission attempt on a cut edge, then repeats the attack on
// the same link after adding a second link across the cut.
NecessityReport necessity_experiment(const Graph& g, Edge bridge, std::span<const double> x0, double epsilon,
                                     double horizon);

nlohmann::json to_json(const ConsensusReport& r);
nlohmann::json to_json(const InvariantReport& r);
nlohmann::json to_json(const PocVerdict& r);

}  // namespace jamsim
