#pragma once

#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "jamsim/certify.hpp"
#include "jamsim/sim.hpp"

namespace jamsim {

class TraceIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kAttemptsFile = "attempts.csv";
inline constexpr const char* kSamplesFile = "samples.csv";
inline constexpr const char* kSummaryFile = "summary.json";
inline constexpr const char* kDosPatternFile = "dos_patterns.csv";
inline constexpr const char* kFitFile = "fit.csv";

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

// time,edge_i,edge_j,outcome,D,u_new,clock_new
void write_attempts_csv(std::ostream& out, const std::vector<Attempt>& attempts);
// time,x_0,...,x_{n-1}
void write_samples_csv(std::ostream& out, const std::vector<StateSample>& samples, std::size_t n);
// edge_i,edge_j,h,tau
void write_dos_patterns_csv(std::ostream& out, const std::map<Edge, DosSignal>& dos);
// edge_i,edge_j,duty_cycle,tau_f,tau_d,eta,kappa,alpha,phi,poc_ok
void write_fit_csv(std::ostream& out, const std::vector<LinkRow>& rows);

std::vector<Attempt> read_attempts_csv(std::istream& in, const std::string& origin);
std::vector<StateSample> read_samples_csv(std::istream& in, const std::string& origin);

// Reads attempts and samples from a run directory. The trace ends at the
// last sample; quiescence fields are left for the caller to recompute.
Trace read_trace_dir(const std::filesystem::path& dir);

}  // namespace jamsim
