#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace jamsim {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

class DosError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Closed jamming interval [start, end]; start == end is a single instant.
struct DosInterval {
  double start = 0.0;
  double end = 0.0;

  double duration() const { return end - start; }
  bool operator==(const DosInterval&) const = default;
};

// Train of disjoint, strictly ordered jamming intervals on one link.
class DosSignal {
 public:
  DosSignal() = default;

  // Strict constructor: intervals must already satisfy end_n < start_{n+1}.
  static DosSignal from_intervals(std::vector<DosInterval> intervals);
  // (start, duration) pairs, strict.
  static DosSignal from_pairs(std::span<const std::pair<double, double>> pairs);
  // Sorts and fuses overlapping or touching intervals.
  static DosSignal merged(std::vector<DosInterval> intervals);

  std::span<const DosInterval> intervals() const { return intervals_; }
  std::size_t size() const { return intervals_.size(); }
  bool empty() const { return intervals_.empty(); }

  // Drops intervals starting after horizon and clips the rest to it.
  DosSignal truncated(double horizon) const;

  bool operator==(const DosSignal&) const = default;

 private:
  std::vector<DosInterval> intervals_;
};

struct DosParams {
  double eta = 1.0;
  double kappa = 0.0;
  double tau_f = kInf;
  double tau_d = kInf;

  // eta >= 1, kappa >= 0, tau_f > 0, tau_d >= 1. tau_d == 1 is admitted so
  // that always-jammed links can be described (their load factor is then 1).
  void validate() const;
};

struct PocCertificate {
  double delta_star = 0.0;
  double alpha = 0.0;
  std::optional<double> phi;
  bool satisfied = false;
};

bool is_active(const DosSignal& s, double t);

// |Xi(a, b)|: measure of the jammed part of [a, b].
double xi_measure(const DosSignal& s, double a, double b);
// |Theta(a, b)| = (b - a) - |Xi(a, b)|.
double theta_measure(const DosSignal& s, double a, double b);

// Number of onsets h_n with a <= h_n <= b.
std::size_t transition_count(const DosSignal& s, double a, double b);

struct AssumptionViolation {
  enum class Kind { Frequency, Duration };
  Kind kind = Kind::Frequency;
  double window_start = 0.0;
  double window_end = 0.0;
  double observed = 0.0;  // n(a, b) or |Xi(a, b)|
  double allowed = 0.0;   // eta + (b-a)/tau_f or kappa + (b-a)/tau_d
  double slack = 0.0;     // excess of the observed value over the regularization term; > 0 here
};

struct AssumptionVerdict {
  bool pass = true;
  std::optional<AssumptionViolation> first_violation;
};

// Checks the average frequency and duration bounds over every window inside
// [0, horizon]. The supremum of both bound expressions is attained on windows
// bounded by onsets (frequency) and onset-to-offset (duration), so only those
// are enumerated; the first violation in (start, end) order is reported.
AssumptionVerdict check_assumptions(const DosSignal& s, const DosParams& p, double horizon);

struct FittedRegularization {
  double eta = 1.0;
  double kappa = 0.0;
};

// Precomputed window data for one signal so that the smallest admissible
// (eta, kappa) can be evaluated cheaply for many (tau_f, tau_d) choices.
class WindowSupremum {
 public:
  WindowSupremum(const DosSignal& s, double horizon);

  // max(1, sup_windows n - len/tau_f)
  double eta(double tau_f) const;
  // max(0, sup_windows |Xi| - len/tau_d)
  double kappa(double tau_d) const;

  const DosSignal& signal() const { return signal_; }

 private:
  DosSignal signal_;
  std::vector<double> min_span_;  // min_span_[k] = shortest window holding k+1 onsets
  bool all_instants_ = true;
};

FittedRegularization fit_params(const DosSignal& s, double tau_f, double tau_d, double horizon);

double delta_star(double epsilon, int d_i, int d_j);

PocCertificate poc_certificate(const DosParams& p, double dstar);

DosSignal gen_pwm(std::uint64_t seed, double max_period, double max_duty, double horizon);
DosSignal gen_periodic(double period, double duty, double offset, double horizon);
DosSignal gen_pulse_train_at(std::span<const double> times);
// Instants 0, d, 2d, ... accumulated exactly as the simulator advances a
// link clock that keeps being jammed.
std::vector<double> retry_instants(double dstar, double horizon);

// Genuine (non-malicious) loss bound beta expressed as DoS parameters.
DosParams genuine_params(double beta, double b, double dstar);

// [a, b] minus the union of the intervals prolonged by dstar.
double prolonged_theta_measure(const DosSignal& s, double dstar, double a, double b);

double duty_cycle(const DosSignal& s, double horizon);

nlohmann::json to_json(const DosSignal& s);
DosSignal signal_from_json(const nlohmann::json& j);

// Numbers that may be infinite are written as the string "inf".
nlohmann::json number_to_json(double v);
double number_from_json(const nlohmann::json& j);

}  // namespace jamsim
