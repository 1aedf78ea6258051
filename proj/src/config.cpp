#include "jamsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "jamsim/rng.hpp"

namespace jamsim {

namespace {

using nlohmann::json;

const json& require(const json& obj, const std::string& key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  return obj.at(key);
}

double number_field(const json& obj, const std::string& key, const std::string& where) {
  const json& v = require(obj, key, where);
  try {
    return number_from_json(v);
  } catch (const DosError&) {
    throw ConfigError(where + "." + key + ": expected a number, got " + v.dump());
  }
}

double number_field_or(const json& obj, const std::string& key, double fallback, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return number_field(obj, key, where);
}

std::uint64_t seed_field(const json& obj, const std::string& key) {
  if (!obj.is_object() || !obj.contains(key)) return 0;
  const json& v = obj.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  if (v.is_number_float() && v.get<double>() >= 0.0) return static_cast<std::uint64_t>(v.get<double>());
  throw ConfigError("seeds." + key + ": expected a non-negative integer, got " + v.dump());
}

std::string string_field(const json& obj, const std::string& key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_string()) throw ConfigError(where + "." + key + ": expected a string, got " + v.dump());
  return v.get<std::string>();
}

Edge edge_field(const json& obj, const Graph& g, const std::string& where) {
  const json& v = require(obj, "edge", where);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
    throw ConfigError(where + ".edge: expected [i, j], got " + v.dump());
  }
  const Edge e(v[0].get<int>(), v[1].get<int>());
  if (!g.has_edge(e)) throw ConfigError(where + ".edge: " + v.dump() + " is not an edge of the graph");
  return e;
}

Graph resolve_graph(const json& spec, const Seeds& seeds) {
  const std::string type = spec.value("type", "explicit");
  try {
    if (type == "explicit") {
      require(spec, "n", "graph");
      require(spec, "edges", "graph");
      return graph_from_json(spec);
    }
    if (type == "random_regular") {
      const auto n = require(spec, "n", "graph").get<std::int64_t>();
      const auto deg = require(spec, "deg", "graph").get<int>();
      if (n < 2) throw ConfigError("graph.n: need at least 2 nodes");
      return random_regular_connected(static_cast<std::size_t>(n), deg, seeds.graph_seed);
    }
  } catch (const TopologyError& e) {
    throw ConfigError(std::string("graph: ") + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(std::string("graph: ") + e.what());
  }
  throw ConfigError("graph.type: unknown graph type '" + type + "' (expected explicit | random_regular)");
}

std::vector<double> resolve_x0(const json& spec, std::size_t n, const Seeds& seeds) {
  const std::string type = string_field(spec, "type", "x0");
  if (type == "explicit") {
    const json& vals = require(spec, "values", "x0");
    if (!vals.is_array() || vals.size() != n) {
      throw ConfigError("x0.values: expected " + std::to_string(n) + " numbers");
    }
    std::vector<double> x;
    for (const auto& v : vals) {
      if (!v.is_number()) throw ConfigError("x0.values: expected numbers, got " + v.dump());
      x.push_back(v.get<double>());
    }
    return x;
  }
  if (type == "uniform") {
    const double lo = number_field_or(spec, "lo", 0.0, "x0");
    const double hi = number_field_or(spec, "hi", 1.0, "x0");
    if (!(hi >= lo)) throw ConfigError("x0: need lo <= hi");
    Rng rng(seeds.x0_seed);
    std::vector<double> x(n);
    for (double& v : x) v = rng.uniform(lo, hi);
    return x;
  }
  throw ConfigError("x0.type: unknown initial state type '" + type + "' (expected explicit | uniform)");
}

DirectedControls resolve_u0(const json& spec, std::size_t m, const Seeds& seeds) {
  const std::string type = spec.is_null() ? "zeros" : string_field(spec, "type", "u0");
  DirectedControls u(m);
  if (type == "zeros") return u;
  if (type == "random") {
    Rng rng(seeds.u0_seed);
    for (auto& c : u) {
      c.forward = static_cast<int>(rng.below(3)) - 1;
      c.backward = -c.forward;
    }
    return u;
  }
  throw ConfigError("u0.type: unknown control initialization '" + type + "' (expected zeros | random)");
}

// Builds the signal for one edge, or returns nullopt for "none".
std::optional<DosSignal> make_signal(const json& spec, Edge e, const Graph& g, double epsilon, double horizon,
                                     const Seeds& seeds, const std::string& where, std::string& kind) {
  kind = string_field(spec, "type", where);
  try {
    if (kind == "none") return std::nullopt;
    if (kind == "periodic") {
      return gen_periodic(number_field(spec, "period", where), number_field(spec, "duty", where),
                          number_field_or(spec, "offset", 0.0, where), horizon);
    }
    if (kind == "pwm") {
      Rng stream({seeds.dos_seed, static_cast<std::uint64_t>(e.i), static_cast<std::uint64_t>(e.j)});
      return gen_pwm(stream.next(), number_field(spec, "max_period", where), number_field(spec, "max_duty", where),
                     horizon);
    }
    if (kind == "pulse_train_at_attempts") {
      return gen_pulse_train_at(retry_instants(delta_star(epsilon, g.degree(e.i), g.degree(e.j)), horizon));
    }
    if (kind == "explicit") {
      return signal_from_json(require(spec, "intervals", where));
    }
  } catch (const DosError& err) {
    throw ConfigError(where + ": " + err.what());
  }
  throw ConfigError(where + ".type: unknown DoS generator '" + kind +
                    "' (expected none | periodic | pwm | pulse_train_at_attempts | explicit)");
}

std::vector<double> number_list(const json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a non-empty array");
  std::vector<double> out;
  for (const auto& x : v) {
    try {
      out.push_back(number_from_json(x));
    } catch (const DosError&) {
      throw ConfigError(where + ": expected numbers or \"inf\", got " + x.dump());
    }
  }
  return out;
}

}  // namespace

json parse_config_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": invalid JSON");
  }
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

Experiment resolve_experiment(const json& config) {
  if (!config.is_object()) throw ConfigError("config: top level must be an object");
  if (config.contains("schema_version")) {
    const json& v = config.at("schema_version");
    if (!v.is_number_integer() || v.get<int>() != kConfigSchemaVersion) {
      throw ConfigError("schema_version: unsupported version " + v.dump() + " (expected " +
                        std::to_string(kConfigSchemaVersion) + ")");
    }
  }
  Experiment ex;
  const json seeds = config.value("seeds", json::object());
  ex.seeds = {seed_field(seeds, "graph_seed"), seed_field(seeds, "x0_seed"), seed_field(seeds, "u0_seed"),
              seed_field(seeds, "dos_seed"), seed_field(seeds, "beta_seed")};

  ex.graph = resolve_graph(require(config, "graph", "config"), ex.seeds);
  if (!is_connected(ex.graph)) throw ConfigError("graph: the network must be connected");

  SimConfig& sim = ex.sim;
  sim.epsilon = number_field(config, "epsilon", "config");
  if (!(sim.epsilon > 0.0)) throw ConfigError("epsilon: must be > 0");
  sim.horizon = number_field(config, "horizon", "config");
  if (!(sim.horizon > 0.0) || std::isinf(sim.horizon)) throw ConfigError("horizon: must be a positive number");
  const std::string mode = config.value("mode", "resilient");
  if (mode == "resilient") {
    sim.mode = Mode::Resilient;
  } else if (mode == "nominal") {
    sim.mode = Mode::Nominal;
  } else {
    throw ConfigError("mode: expected nominal | resilient, got '" + mode + "'");
  }
  sim.record_dt = number_field_or(config, "record_dt", sim.horizon / 200.0, "config");
  if (!(sim.record_dt >= 0.0)) throw ConfigError("record_dt: must be >= 0");
  sim.stop_on_quiescence = config.value("stop_on_quiescence", true);
  sim.beta_seed = ex.seeds.beta_seed;

  ex.x0 = resolve_x0(require(config, "x0", "config"), ex.graph.node_count(), ex.seeds);
  ex.u0 = resolve_u0(config.value("u0", json()), ex.graph.edge_count(), ex.seeds);

  if (config.contains("dos")) {
    const json& dos = config.at("dos");
    std::map<Edge, const json*> specs;
    if (dos.contains("default")) {
      for (const Edge& e : ex.graph.edges()) specs[e] = &dos.at("default");
    }
    if (dos.contains("edges")) {
      const json& list = dos.at("edges");
      if (!list.is_array()) throw ConfigError("dos.edges: expected an array");
      for (std::size_t k = 0; k < list.size(); ++k) {
        specs[edge_field(list[k], ex.graph, "dos.edges[" + std::to_string(k) + "]")] = &list[k];
      }
    }
    for (const auto& [e, spec] : specs) {
      std::string kind;
      const std::string where = "dos(" + std::to_string(e.i) + "," + std::to_string(e.j) + ")";
      if (auto sig = make_signal(*spec, e, ex.graph, sim.epsilon, sim.horizon, ex.seeds, where, kind)) {
        sim.dos.emplace(e, std::move(*sig));
        ex.dos_kind.emplace(e, kind);
      }
    }
  }

  if (config.contains("genuine_beta")) {
    const json& gb = config.at("genuine_beta");
    auto check = [](double b, const std::string& where) {
      if (!(b >= 0.0 && b < 1.0)) throw ConfigError(where + ": loss bound must lie in [0, 1)");
      return b;
    };
    if (gb.contains("default")) {
      const double b = check(number_field(gb, "default", "genuine_beta"), "genuine_beta.default");
      if (b > 0.0) {
        for (const Edge& e : ex.graph.edges()) sim.genuine_beta[e] = b;
      }
    }
    if (gb.contains("edges")) {
      const json& list = gb.at("edges");
      if (!list.is_array()) throw ConfigError("genuine_beta.edges: expected an array");
      for (std::size_t k = 0; k < list.size(); ++k) {
        const std::string where = "genuine_beta.edges[" + std::to_string(k) + "]";
        const Edge e = edge_field(list[k], ex.graph, where);
        const double b = check(number_field(list[k], "beta", where), where);
        if (b > 0.0) {
          sim.genuine_beta[e] = b;
        } else {
          sim.genuine_beta.erase(e);
        }
      }
    }
  }

  if (config.contains("fit")) {
    const json& f = config.at("fit");
    if (f.contains("tau_f_multiples")) ex.fit.tau_f_multiples = number_list(f.at("tau_f_multiples"), "fit.tau_f_multiples");
    if (f.contains("tau_d")) ex.fit.tau_d = number_list(f.at("tau_d"), "fit.tau_d");
    ex.fit.max_phi_fraction = number_field_or(f, "max_phi_fraction", ex.fit.max_phi_fraction, "fit");
    for (double m : ex.fit.tau_f_multiples) {
      if (!(m > 0.0)) throw ConfigError("fit.tau_f_multiples: entries must be > 0");
    }
    for (double td : ex.fit.tau_d) {
      if (!(td >= 1.0)) throw ConfigError("fit.tau_d: entries must be >= 1");
    }
  }
  return ex;
}

void set_config_value(json& config, const std::string& dotted_path, double value) {
  json* node = &config;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = dotted_path.find('.', pos);
    const std::string key = dotted_path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (key.empty()) throw ConfigError("axis: malformed field path '" + dotted_path + "'");
    json* slot = nullptr;
    if (node->is_array()) {
      // Array elements are addressed by their index, e.g. dos.edges.0.duty.
      std::size_t idx = 0;
      auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), idx);
      if (ec != std::errc() || ptr != key.data() + key.size() || idx >= node->size()) {
        throw ConfigError("axis: '" + key + "' is not a valid index in '" + dotted_path + "'");
      }
      slot = &(*node)[idx];
    } else if (node->is_object() || node->is_null()) {
      slot = &(*node)[key];
    } else {
      throw ConfigError("axis: '" + dotted_path + "' does not address an object field");
    }
    if (dot == std::string::npos) {
      const bool integral = value == std::floor(value);
      if (dotted_path.rfind("seeds.", 0) == 0 || (slot->is_number_integer() && integral)) {
        *slot = static_cast<std::int64_t>(std::llround(value));
      } else {
        *slot = value;
      }
      return;
    }
    node = slot;
    pos = dot + 1;
  }
}

}  // namespace jamsim
