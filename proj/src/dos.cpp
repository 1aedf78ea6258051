#include "jamsim/dos.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "jamsim/rng.hpp"

namespace jamsim {

namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// First interval whose end is >= t.
std::span<const DosInterval>::iterator first_reaching(std::span<const DosInterval> iv, double t) {
  return std::lower_bound(iv.begin(), iv.end(), t,
                          [](const DosInterval& x, double v) { return x.end < v; });
}

}  // namespace

DosSignal DosSignal::from_intervals(std::vector<DosInterval> intervals) {
  for (std::size_t k = 0; k < intervals.size(); ++k) {
    const auto& iv = intervals[k];
    if (!std::isfinite(iv.start) || iv.start < 0.0) {
      throw DosError("DoS interval " + std::to_string(k) + ": start must be finite and >= 0");
    }
    if (std::isnan(iv.end) || iv.end < iv.start) {
      throw DosError("DoS interval " + std::to_string(k) + ": duration must be >= 0");
    }
    if (k > 0 && !(iv.start > intervals[k - 1].end)) {
      throw DosError("DoS interval " + std::to_string(k) + " starts at " + num(iv.start) +
                     ", not after the previous interval's end " + num(intervals[k - 1].end));
    }
  }
  DosSignal s;
  s.intervals_ = std::move(intervals);
  return s;
}

DosSignal DosSignal::from_pairs(std::span<const std::pair<double, double>> pairs) {
  std::vector<DosInterval> iv;
  iv.reserve(pairs.size());
  for (auto [h, tau] : pairs) {
    if (std::isnan(tau) || tau < 0.0) throw DosError("DoS duration must be >= 0");
    iv.push_back({h, h + tau});
  }
  return from_intervals(std::move(iv));
}

DosSignal DosSignal::merged(std::vector<DosInterval> intervals) {
  std::sort(intervals.begin(), intervals.end(),
            [](const DosInterval& a, const DosInterval& b) { return a.start < b.start; });
  std::vector<DosInterval> out;
  out.reserve(intervals.size());
  for (const auto& iv : intervals) {
    if (!out.empty() && iv.start <= out.back().end) {
      out.back().end = std::max(out.back().end, iv.end);
    } else {
      out.push_back(iv);
    }
  }
  return from_intervals(std::move(out));
}

DosSignal DosSignal::truncated(double horizon) const {
  DosSignal s;
  for (const auto& iv : intervals_) {
    if (iv.start > horizon) break;
    s.intervals_.push_back({iv.start, std::min(iv.end, horizon)});
  }
  return s;
}

void DosParams::validate() const {
  if (!(eta >= 1.0)) throw DosError("eta must be >= 1");
  if (!(kappa >= 0.0)) throw DosError("kappa must be >= 0");
  if (!(tau_f > 0.0)) throw DosError("tau_f must be > 0");
  if (!(tau_d >= 1.0)) throw DosError("tau_d must be >= 1");
}

bool is_active(const DosSignal& s, double t) {
  auto iv = s.intervals();
  auto it = std::upper_bound(iv.begin(), iv.end(), t,
                             [](double v, const DosInterval& x) { return v < x.start; });
  if (it == iv.begin()) return false;
  return t <= std::prev(it)->end;
}

double xi_measure(const DosSignal& s, double a, double b) {
  auto iv = s.intervals();
  double total = 0.0;
  for (auto it = first_reaching(iv, a); it != iv.end() && it->start <= b; ++it) {
    total += std::min(b, it->end) - std::max(a, it->start);
  }
  return total;
}

double theta_measure(const DosSignal& s, double a, double b) { return (b - a) - xi_measure(s, a, b); }

std::size_t transition_count(const DosSignal& s, double a, double b) {
  auto iv = s.intervals();
  auto lo = std::lower_bound(iv.begin(), iv.end(), a,
                             [](const DosInterval& x, double v) { return x.start < v; });
  auto hi = std::upper_bound(iv.begin(), iv.end(), b,
                             [](double v, const DosInterval& x) { return v < x.start; });
  return hi > lo ? static_cast<std::size_t>(hi - lo) : 0;
}

AssumptionVerdict check_assumptions(const DosSignal& s, const DosParams& p, double horizon) {
  p.validate();
  const DosSignal sig = s.truncated(horizon);
  auto iv = sig.intervals();
  AssumptionVerdict verdict;
  for (std::size_t a = 0; a < iv.size(); ++a) {
    const double from = iv[a].start;
    double jammed = 0.0;
    for (std::size_t b = a; b < iv.size(); ++b) {
      // Frequency window [h_a, h_b].
      const double onsets = static_cast<double>(b - a + 1);
      const double f_len = iv[b].start - from;
      const double f_excess = onsets - f_len / p.tau_f;
      if (f_excess > p.eta) {
        verdict.pass = false;
        verdict.first_violation = AssumptionViolation{AssumptionViolation::Kind::Frequency, from, iv[b].start,
                                                      onsets, p.eta + f_len / p.tau_f, f_excess - p.eta};
        return verdict;
      }
      // Duration window [h_a, h_b + tau_b].
      jammed += iv[b].end - std::max(from, iv[b].start);
      const double d_len = iv[b].end - from;
      const double d_excess = jammed - d_len / p.tau_d;
      if (d_excess > p.kappa) {
        verdict.pass = false;
        verdict.first_violation = AssumptionViolation{AssumptionViolation::Kind::Duration, from, iv[b].end,
                                                      jammed, p.kappa + d_len / p.tau_d, d_excess - p.kappa};
        return verdict;
      }
    }
  }
  return verdict;
}

WindowSupremum::WindowSupremum(const DosSignal& s, double horizon) : signal_(s.truncated(horizon)) {
  auto iv = signal_.intervals();
  const std::size_t n = iv.size();
  min_span_.assign(n, kInf);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      const double span = iv[b].start - iv[a].start;
      if (span < min_span_[b - a]) min_span_[b - a] = span;
    }
  }
  all_instants_ = std::all_of(iv.begin(), iv.end(), [](const DosInterval& x) { return x.end == x.start; });
}

double WindowSupremum::eta(double tau_f) const {
  double best = 1.0;
  for (std::size_t k = 0; k < min_span_.size(); ++k) {
    best = std::max(best, static_cast<double>(k + 1) - min_span_[k] / tau_f);
  }
  return best;
}

double WindowSupremum::kappa(double tau_d) const {
  // With zero-length intervals every |Xi| is 0 and the floor is the answer.
  if (all_instants_) return 0.0;
  auto iv = signal_.intervals();
  double best = 0.0;
  for (std::size_t a = 0; a < iv.size(); ++a) {
    const double from = iv[a].start;
    double jammed = 0.0;
    for (std::size_t b = a; b < iv.size(); ++b) {
      jammed += iv[b].end - std::max(from, iv[b].start);
      best = std::max(best, jammed - (iv[b].end - from) / tau_d);
    }
  }
  return best;
}

FittedRegularization fit_params(const DosSignal& s, double tau_f, double tau_d, double horizon) {
  if (!(tau_f > 0.0)) throw DosError("fit_params: tau_f must be > 0");
  if (!(tau_d >= 1.0)) throw DosError("fit_params: tau_d must be >= 1");
  WindowSupremum table(s, horizon);
  return {table.eta(tau_f), table.kappa(tau_d)};
}

double delta_star(double epsilon, int d_i, int d_j) {
  return epsilon / static_cast<double>(2 * (d_i + d_j));
}

PocCertificate poc_certificate(const DosParams& p, double dstar) {
  p.validate();
  if (!(dstar > 0.0)) throw DosError("poc_certificate: delta_star must be > 0");
  PocCertificate c;
  c.delta_star = dstar;
  c.alpha = 1.0 / p.tau_d + dstar / p.tau_f;
  if (c.alpha < 1.0) {
    c.phi = (p.kappa + (p.eta + 1.0) * dstar) / (1.0 - c.alpha);
    c.satisfied = true;
  }
  return c;
}

DosSignal gen_pwm(std::uint64_t seed, double max_period, double max_duty, double horizon) {
  if (!(max_period > 0.0)) throw DosError("pwm: max_period must be > 0");
  if (!(max_duty >= 0.0 && max_duty <= 1.0)) throw DosError("pwm: max_duty must lie in [0, 1]");
  Rng rng(seed);
  std::vector<DosInterval> out;
  double t = 0.0;
  while (t <= horizon) {
    const double period = max_period * rng.uniform_open_closed();
    const double duty = max_duty * rng.uniform01();
    if (duty > 0.0) out.push_back({t, t + duty * period});
    t += period;
  }
  return DosSignal::merged(std::move(out));
}

DosSignal gen_periodic(double period, double duty, double offset, double horizon) {
  if (!(period > 0.0)) throw DosError("periodic: period must be > 0");
  if (!(duty >= 0.0 && duty <= 1.0)) throw DosError("periodic: duty must lie in [0, 1]");
  if (!(offset >= 0.0)) throw DosError("periodic: offset must be >= 0");
  if (duty == 0.0 || offset >= horizon) return {};
  if (duty == 1.0) return DosSignal::from_intervals({{offset, horizon}});
  std::vector<DosInterval> out;
  for (std::size_t k = 0;; ++k) {
    const double h = offset + static_cast<double>(k) * period;
    if (h >= horizon) break;
    out.push_back({h, std::min(horizon, h + duty * period)});
  }
  return DosSignal::merged(std::move(out));
}

DosSignal gen_pulse_train_at(std::span<const double> times) {
  std::vector<DosInterval> out;
  out.reserve(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(times[k]) || times[k] < 0.0) throw DosError("pulse train: times must be finite and >= 0");
    if (k > 0 && !(times[k] > times[k - 1])) throw DosError("pulse train: times must be strictly increasing");
    out.push_back({times[k], times[k]});
  }
  return DosSignal::from_intervals(std::move(out));
}

std::vector<double> retry_instants(double dstar, double horizon) {
  if (!(dstar > 0.0)) throw DosError("retry_instants: spacing must be > 0");
  std::vector<double> out;
  for (double t = 0.0; t <= horizon; t = t + dstar) out.push_back(t);
  return out;
}

DosParams genuine_params(double beta, double b, double dstar) {
  if (!(beta >= 0.0 && beta < 1.0)) throw DosError("genuine failure bound beta must lie in [0, 1)");
  if (!(b >= 1.0)) throw DosError("genuine failure offset b must be >= 1");
  if (!(dstar > 0.0)) throw DosError("genuine_params: delta_star must be > 0");
  return DosParams{b, 0.0, dstar / beta, kInf};
}

double prolonged_theta_measure(const DosSignal& s, double dstar, double a, double b) {
  std::vector<DosInterval> grown;
  grown.reserve(s.size());
  for (const auto& iv : s.intervals()) grown.push_back({iv.start, iv.end + dstar});
  return theta_measure(DosSignal::merged(std::move(grown)), a, b);
}

double duty_cycle(const DosSignal& s, double horizon) {
  if (!(horizon > 0.0)) throw DosError("duty_cycle: horizon must be > 0");
  return xi_measure(s, 0.0, horizon) / horizon;
}

nlohmann::json number_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

double number_from_json(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return kInf;
    throw DosError("expected a number or \"inf\", got \"" + s + "\"");
  }
  if (!j.is_number()) throw DosError("expected a number, got " + j.dump());
  return j.get<double>();
}

nlohmann::json to_json(const DosSignal& s) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& iv : s.intervals()) out.push_back({iv.start, number_to_json(iv.duration())});
  return out;
}

DosSignal signal_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw DosError("DoS signal must be an array of [h, tau] pairs");
  std::vector<std::pair<double, double>> pairs;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) throw DosError("DoS signal entries must be [h, tau] pairs");
    pairs.emplace_back(number_from_json(e[0]), number_from_json(e[1]));
  }
  return DosSignal::from_pairs(pairs);
}

}  // namespace jamsim
