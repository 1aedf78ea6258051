#include "jamsim/certify.hpp"

#include <algorithm>
#include <cmath>

namespace jamsim {

namespace {

// Onset times built by repeated addition carry up to about one ulp of the
// horizon per step, so a fitted term can sit just above its floor. This is the
// largest excess that accumulated rounding alone can explain.
double rounding_slack(std::size_t onsets, double horizon) {
  const double ulp = std::nextafter(horizon, kInf) - horizon;
  return static_cast<double>(onsets) * ulp;
}

}  // namespace

LinkCertificate certify_link(const DosSignal& s, double dstar, double horizon, const FitGrid& grid) {
  if (grid.tau_f_multiples.empty() || grid.tau_d.empty()) throw DosError("fit grid must not be empty");
  const WindowSupremum table(s, horizon);
  std::vector<double> etas;
  std::vector<double> kappas;
  for (double m : grid.tau_f_multiples) etas.push_back(table.eta(m * dstar));
  for (double td : grid.tau_d) kappas.push_back(table.kappa(td));

  const double phi_cap = grid.max_phi_fraction * horizon;
  const double slack = rounding_slack(s.size(), horizon);
  std::optional<LinkCertificate> best;
  std::optional<LinkCertificate> floor_pick;
  std::optional<LinkCertificate> least_alpha;
  for (std::size_t a = 0; a < etas.size(); ++a) {
    for (std::size_t b = 0; b < kappas.size(); ++b) {
      LinkCertificate c;
      c.params = DosParams{etas[a], kappas[b], grid.tau_f_multiples[a] * dstar, grid.tau_d[b]};
      c.poc = poc_certificate(c.params, dstar);
      c.certified = c.poc.satisfied && *c.poc.phi <= phi_cap;
      if (c.certified && (!best || *c.poc.phi < *best->poc.phi)) best = c;
      const bool at_floor = c.params.eta <= 1.0 + 1e-9 + slack / c.params.tau_f && c.params.kappa <= 1e-9 + slack;
      if (at_floor && (!floor_pick || c.poc.alpha < floor_pick->poc.alpha)) {
        floor_pick = c;
      }
      if (!least_alpha || c.poc.alpha < least_alpha->poc.alpha) least_alpha = c;
    }
  }
  LinkCertificate out = best ? *best : floor_pick ? *floor_pick : *least_alpha;
  out.duty_cycle = duty_cycle(s, horizon);
  return out;
}

std::vector<LinkRow> certify_links(const Graph& g, const std::map<Edge, DosSignal>& dos, double epsilon,
                                   double horizon, const FitGrid& grid) {
  static const DosSignal kQuiet;
  std::vector<LinkRow> rows;
  rows.reserve(g.edge_count());
  for (const Edge& e : g.edges()) {
    auto it = dos.find(e);
    const DosSignal& s = it == dos.end() ? kQuiet : it->second;
    rows.push_back({e, certify_link(s, delta_star(epsilon, g.degree(e.i), g.degree(e.j)), horizon, grid)});
  }
  return rows;
}

CertificateSummary summarize(const std::vector<LinkRow>& rows, const std::map<Edge, DosSignal>& dos) {
  CertificateSummary s;
  for (const auto& row : rows) {
    s.alpha_max = std::max(s.alpha_max, row.cert.poc.alpha);
    s.all_certified = s.all_certified && row.cert.certified;
    auto it = dos.find(row.edge);
    if (it != dos.end() && !it->second.empty() && row.cert.poc.phi) s.phi_max = std::max(s.phi_max, *row.cert.poc.phi);
  }
  return s;
}

}  // namespace jamsim
