#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "jamsim/analysis.hpp"
#include "jamsim/certify.hpp"
#include "jamsim/config.hpp"
#include "json.hpp"

namespace jamsim {

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfigError = 2;

struct RunOutcome {
  Trace trace;
  std::vector<LinkRow> links;
  CertificateSummary certificates;
  ConsensusReport consensus;
};

// Simulates the experiment and certifies every link against its own signal.
RunOutcome execute(const Experiment& exp);

nlohmann::json summary_json(const Experiment& exp, const RunOutcome& r);

struct AxisSpec {
  std::string name;
  double start = 0.0;
  double stop = 0.0;
  double step = 0.0;

  std::vector<double> points() const;
};

// NAME=START:STOP:STEP. A zero step or START == STOP gives a single point.
AxisSpec parse_axis(const std::string& text);

struct SweepRow {
  double parameter = 0.0;
  std::optional<double> t_star;
  double bound = 0.0;
  bool in_set = false;
  double max_gap = 0.0;
  double max_alpha = 0.0;
};

// Rows come back ordered by parameter value whatever the thread count.
std::vector<SweepRow> sweep(const nlohmann::json& config, const AxisSpec& axis, unsigned parallel);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

// Subcommands. Each returns a process exit code and writes diagnostics to err.
int cmd_run(const std::string& config_path, const std::filesystem::path& out_dir, std::ostream& log,
            std::ostream& err);
int cmd_fit(const std::string& config_path, const std::filesystem::path& out_dir, std::ostream& log,
            std::ostream& err);
int cmd_check(const std::filesystem::path& trace_dir, const std::string& config_path, std::ostream& log,
              std::ostream& err);
int cmd_sweep(const std::string& config_path, const std::string& axis, unsigned parallel,
              const std::filesystem::path& out_dir, std::ostream& log, std::ostream& err);

}  // namespace jamsim
