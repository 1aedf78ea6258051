#pragma once

#include <map>
#include <vector>

#include "jamsim/dos.hpp"
#include "jamsim/topology.hpp"

namespace jamsim {

// Candidate (tau_f, tau_d) pairs scanned when certifying a link. tau_f is
// given in multiples of the link's retry period delta_star.
struct FitGrid {
  std::vector<double> tau_f_multiples{1,   1.25, 1.5, 2,   3,    4,    6,    8,    12,   16,    24,  32, 48,
                                      64,  96,   128, 192, 256,  384,  512,  1024, 2048, 4096, 8192, 16384, kInf};
  std::vector<double> tau_d{1, 1.05, 1.1, 1.2, 1.3, 1.4, 1.5, 1.75, 2, 2.5, 3, 4, 5, 7.5, 10, 20, 50, 100, kInf};
  // A certificate whose persistency window exceeds this fraction of the
  // horizon says nothing about the finite run and is not accepted.
  double max_phi_fraction = 0.5;
};

struct LinkCertificate {
  DosParams params;
  PocCertificate poc;
  double duty_cycle = 0.0;
  // alpha < 1 with a persistency window short enough to be meaningful.
  bool certified = false;
};

// Fits (eta, kappa) on every grid pair and keeps the certified pair with the
// smallest persistency window. When none qualifies, the reported pair is the
// least-loaded one among those needing no regularization (eta = 1,
// kappa = 0), which exposes alpha >= 1 for attacks that jam every attempt.
LinkCertificate certify_link(const DosSignal& s, double dstar, double horizon, const FitGrid& grid = {});

struct LinkRow {
  Edge edge;
  LinkCertificate cert;
};

// One row per edge of g; edges missing from the map carry an empty signal.
std::vector<LinkRow> certify_links(const Graph& g, const std::map<Edge, DosSignal>& dos, double epsilon,
                                   double horizon, const FitGrid& grid = {});

// Largest persistency window over attacked edges (0 without attacks) and
// whether every edge is certified.
struct CertificateSummary {
  double phi_max = 0.0;
  double alpha_max = 0.0;
  bool all_certified = true;
};
CertificateSummary summarize(const std::vector<LinkRow>& rows, const std::map<Edge, DosSignal>& dos);

}  // namespace jamsim
