#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "jamsim/certify.hpp"
#include "jamsim/sim.hpp"
#include "json.hpp"

namespace jamsim {

// Invalid experiment configuration. The message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kConfigSchemaVersion = 1;

struct Seeds {
  std::uint64_t graph_seed = 0;
  std::uint64_t x0_seed = 0;
  std::uint64_t u0_seed = 0;
  std::uint64_t dos_seed = 0;
  std::uint64_t beta_seed = 0;
};

// Everything a run needs, with all randomness already drawn.
struct Experiment {
  Graph graph;
  std::vector<double> x0;
  DirectedControls u0;
  SimConfig sim;
  std::map<Edge, std::string> dos_kind;  // generator name per attacked edge
  FitGrid fit;
  Seeds seeds;
};

// Parses JSON text; syntax errors are reported with line and column.
nlohmann::json parse_config_text(const std::string& text, const std::string& origin);
nlohmann::json load_config_file(const std::string& path);

// Validates the document and draws all seeded quantities.
Experiment resolve_experiment(const nlohmann::json& config);

// Sets a numeric field addressed by a dotted path such as "dos.default.max_duty".
void set_config_value(nlohmann::json& config, const std::string& dotted_path, double value);

}  // namespace jamsim
