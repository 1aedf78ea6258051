#include "jamsim/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <thread>

#include "jamsim/trace_io.hpp"

namespace jamsim {

using nlohmann::json;

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

void open_out(std::ofstream& f, const std::filesystem::path& p) {
  f.open(p, std::ios::binary);
  if (!f) throw TraceIoError(p.string() + ": cannot write");
}

void ensure_dir(const std::filesystem::path& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw TraceIoError(dir.string() + ": " + ec.message());
}

// Runs body and maps the library's error types onto exit codes.
template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const TraceIoError& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitConfigError;
}

std::string yes_no(bool v) { return v ? "yes" : "no"; }

void print_fit_table(std::ostream& log, const std::vector<LinkRow>& rows) {
  log << std::left << std::setw(9) << "edge" << std::right << std::setw(9) << "duty" << std::setw(12) << "tau_f"
      << std::setw(8) << "tau_d" << std::setw(8) << "eta" << std::setw(10) << "kappa" << std::setw(10) << "alpha"
      << std::setw(12) << "phi" << std::setw(6) << "ok" << '\n';
  for (const auto& r : rows) {
    const auto& c = r.cert;
    const std::string edge = std::to_string(r.edge.i) + "-" + std::to_string(r.edge.j);
    log << std::left << std::setw(9) << edge << std::right << std::setw(8) << std::fixed << std::setprecision(2)
        << 100.0 * c.duty_cycle << '%' << std::defaultfloat << std::setprecision(5) << std::setw(12)
        << c.params.tau_f << std::setw(8) << c.params.tau_d << std::setw(8)
        << c.params.eta << std::setw(10) << c.params.kappa << std::setw(10) << c.poc.alpha << std::setw(12)
        << (c.poc.phi ? *c.poc.phi : kInf) << std::setw(6) << yes_no(c.certified) << '\n';
  }
  log << std::defaultfloat << std::setprecision(6);
}

}  // namespace

RunOutcome execute(const Experiment& exp) {
  RunOutcome r;
  r.trace = run(exp.graph, exp.x0, exp.u0, exp.sim);
  r.links = certify_links(exp.graph, exp.sim.dos, exp.sim.epsilon, exp.sim.horizon, exp.fit);
  r.certificates = summarize(r.links, exp.sim.dos);
  r.consensus = consensus_report(r.trace, exp.graph, exp.sim.epsilon, r.certificates.phi_max);
  return r;
}

json summary_json(const Experiment& exp, const RunOutcome& r) {
  json j;
  j["n"] = exp.graph.node_count();
  j["edges"] = exp.graph.edge_count();
  j["epsilon"] = exp.sim.epsilon;
  j["horizon"] = exp.sim.horizon;
  j["mode"] = exp.sim.mode == Mode::Resilient ? "resilient" : "nominal";
  j["T_star"] = optional_number(r.trace.quiescence_time);
  j["quiescence_verified"] = r.trace.quiescence_verified;
  j["end_time"] = r.trace.end_time;
  j["event_count"] = r.trace.attempts.size();
  j["jammed_count"] = std::count_if(r.trace.attempts.begin(), r.trace.attempts.end(),
                                    [](const Attempt& a) { return a.outcome == Outcome::Jammed; });
  j["max_gap"] = r.consensus.max_pairwise_gap;
  j["delta"] = r.consensus.delta;
  j["in_set"] = r.consensus.in_set;
  j["phi_max"] = r.certificates.phi_max;
  j["alpha_max"] = r.certificates.alpha_max;
  j["all_certified"] = r.certificates.all_certified;
  j["bound"] = r.consensus.t_star_bound;
  j["bound_applicable"] = r.certificates.all_certified;
  j["bound_holds"] = r.consensus.bound_holds ? json(*r.consensus.bound_holds) : json(nullptr);
  j["final_x"] = r.trace.final_state();
  return j;
}

std::vector<double> AxisSpec::points() const {
  if (step == 0.0 || start == stop) return {start};
  if ((stop - start) * step < 0.0) throw ConfigError("axis '" + name + "': step points away from stop");
  std::vector<double> out;
  const double tol = 1e-9 * std::abs(step);
  for (std::size_t k = 0;; ++k) {
    const double v = start + static_cast<double>(k) * step;
    if (step > 0 ? v > stop + tol : v < stop - tol) break;
    out.push_back(v);
    if (out.size() > 100000) throw ConfigError("axis '" + name + "': too many points");
  }
  return out;
}

AxisSpec parse_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("axis: expected NAME=START:STOP:STEP, got '" + text + "'");
  AxisSpec a;
  a.name = text.substr(0, eq);
  const std::string range = text.substr(eq + 1);
  double vals[3];
  std::size_t pos = 0;
  for (int k = 0; k < 3; ++k) {
    const auto colon = range.find(':', pos);
    if ((k < 2) != (colon != std::string::npos)) {
      throw ConfigError("axis: expected NAME=START:STOP:STEP, got '" + text + "'");
    }
    const std::string cell = range.substr(pos, colon == std::string::npos ? std::string::npos : colon - pos);
    try {
      std::size_t used = 0;
      vals[k] = std::stod(cell, &used);
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ConfigError("axis: '" + cell + "' is not a number");
    }
    pos = colon + 1;
  }
  a.start = vals[0];
  a.stop = vals[1];
  a.step = vals[2];
  return a;
}

std::vector<SweepRow> sweep(const json& config, const AxisSpec& axis, unsigned parallel) {
  const auto points = axis.points();
  std::vector<SweepRow> rows(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < points.size(); k = next++) {
      try {
        json cfg = config;
        set_config_value(cfg, axis.name, points[k]);
        const Experiment exp = resolve_experiment(cfg);
        const RunOutcome r = execute(exp);
        rows[k] = SweepRow{points[k],          r.trace.quiescence_time,        r.consensus.t_star_bound,
                           r.consensus.in_set, r.consensus.max_pairwise_gap, r.certificates.alpha_max};
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(parallel, static_cast<unsigned>(points.size())));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow& a, const SweepRow& b) { return a.parameter < b.parameter; });
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "parameter,T_star,bound,in_set,max_gap,max_alpha\n";
  for (const auto& r : rows) {
    out << format_double(r.parameter) << ',' << (r.t_star ? format_double(*r.t_star) : std::string("none")) << ','
        << format_double(r.bound) << ',' << (r.in_set ? "true" : "false") << ',' << format_double(r.max_gap) << ','
        << format_double(r.max_alpha) << '\n';
  }
}

int cmd_run(const std::string& config_path, const std::filesystem::path& out_dir, std::ostream& log,
            std::ostream& err) {
  return guarded(err, [&] {
    const Experiment exp = resolve_experiment(load_config_file(config_path));
    const RunOutcome r = execute(exp);
    const json summary = summary_json(exp, r);
    ensure_dir(out_dir);
    std::ofstream f;
    open_out(f, out_dir / kAttemptsFile);
    write_attempts_csv(f, r.trace.attempts);
    f.close();
    open_out(f, out_dir / kSamplesFile);
    write_samples_csv(f, r.trace.samples, exp.graph.node_count());
    f.close();
    open_out(f, out_dir / kDosPatternFile);
    write_dos_patterns_csv(f, exp.sim.dos);
    f.close();
    open_out(f, out_dir / kSummaryFile);
    f << summary.dump(2) << '\n';
    f.close();

    log << "nodes " << exp.graph.node_count() << ", edges " << exp.graph.edge_count() << ", attempts "
        << r.trace.attempts.size() << '\n';
    log << "T*        " << (r.trace.quiescence_time ? format_double(*r.trace.quiescence_time) : "none") << '\n';
    log << "bound     " << format_double(r.consensus.t_star_bound)
        << (r.certificates.all_certified ? "" : " (not applicable: some link is uncertified)") << '\n';
    log << "max gap   " << format_double(r.consensus.max_pairwise_gap) << '\n';
    log << "delta     " << format_double(r.consensus.delta) << '\n';
    log << "in set    " << yes_no(r.consensus.in_set) << '\n';
    log << "wrote " << (out_dir / kAttemptsFile).string() << ", " << kSamplesFile << ", " << kSummaryFile << ", "
        << kDosPatternFile << '\n';
    return kExitPass;
  });
}

int cmd_fit(const std::string& config_path, const std::filesystem::path& out_dir, std::ostream& log,
            std::ostream& err) {
  return guarded(err, [&] {
    const Experiment exp = resolve_experiment(load_config_file(config_path));
    const auto rows = certify_links(exp.graph, exp.sim.dos, exp.sim.epsilon, exp.sim.horizon, exp.fit);
    print_fit_table(log, rows);
    if (!out_dir.empty()) {
      ensure_dir(out_dir);
      std::ofstream f;
      open_out(f, out_dir / kFitFile);
      write_fit_csv(f, rows);
      log << "wrote " << (out_dir / kFitFile).string() << '\n';
    }
    return kExitPass;
  });
}

int cmd_check(const std::filesystem::path& trace_dir, const std::string& config_path, std::ostream& log,
              std::ostream& err) {
  return guarded(err, [&]() -> int {
    const Experiment exp = resolve_experiment(load_config_file(config_path));
    Trace trace = read_trace_dir(trace_dir);
    const std::size_t n = exp.graph.node_count();
    if (trace.samples.front().x.size() != n) {
      throw TraceIoError("trace has " + std::to_string(trace.samples.front().x.size()) + " nodes, config has " +
                         std::to_string(n));
    }
    if (trace.samples.front().x != exp.x0) throw TraceIoError("trace initial state does not match the config x0");
    for (const Attempt& a : trace.attempts) {
      if (!exp.graph.has_edge(a.edge)) {
        throw TraceIoError("trace attempt on " + std::to_string(a.edge.i) + "-" + std::to_string(a.edge.j) +
                           ", not an edge of the configured graph");
      }
    }
    trace.quiescence_time = measured_quiescence(trace, exp.graph);

    bool ok = true;
    const InvariantReport inv = verify_trace_invariants(trace, exp.graph, exp.sim.epsilon);
    log << "invariants      " << (inv.all_pass() ? "pass" : "FAIL") << " (" << inv.attempts_checked << " attempts)\n";
    for (const auto& f : inv.failures) log << "  " << f << '\n';
    ok = ok && inv.all_pass();

    // Persistency of communication is only promised on certified links that
    // see no random loss.
    const auto rows = certify_links(exp.graph, exp.sim.dos, exp.sim.epsilon, exp.sim.horizon, exp.fit);
    const auto cert = summarize(rows, exp.sim.dos);
    std::map<Edge, double> phi;
    for (const auto& row : rows) {
      auto b = exp.sim.genuine_beta.find(row.edge);
      const bool lossy = b != exp.sim.genuine_beta.end() && b->second > 0.0;
      if (row.cert.certified && !lossy) phi[row.edge] = *row.cert.poc.phi;
    }
    Trace checked = trace;
    std::erase_if(checked.attempts, [&](const Attempt& a) { return !phi.contains(a.edge); });
    const PocVerdict poc = verify_poc(checked, phi);
    log << "persistency     " << (poc.pass ? "pass" : "FAIL") << " (" << poc.jammed_checked << " jammed attempts, "
        << poc.unverifiable << " past the horizon, " << phi.size() << "/" << rows.size() << " links)\n";
    if (poc.first_violation) {
      const auto& v = *poc.first_violation;
      log << "  edge " << v.edge.i << "-" << v.edge.j << " jammed at " << format_double(v.jammed_at)
          << " had no success by " << format_double(v.deadline) << '\n';
    }
    ok = ok && poc.pass;

    const ConsensusReport rep = consensus_report(trace, exp.graph, exp.sim.epsilon, cert.phi_max);
    log << "consensus set   " << (rep.in_set ? "pass" : "FAIL") << " (max gap " << format_double(rep.max_pairwise_gap)
        << ", delta " << format_double(rep.delta) << ")\n";
    if (!rep.in_set) log << "  not in consensus set\n";
    ok = ok && rep.in_set;

    if (cert.all_certified && rep.t_star_measured) {
      log << "time bound      " << (*rep.bound_holds ? "pass" : "FAIL") << " (T* "
          << format_double(*rep.t_star_measured) << " <= " << format_double(rep.t_star_bound) << ")\n";
      ok = ok && *rep.bound_holds;
    } else {
      log << "time bound      n/a ("
          << (cert.all_certified ? "controls still active at the end" : "some link is uncertified") << ")\n";
    }
    log << (ok ? "PASS" : "FAIL") << '\n';
    return ok ? kExitPass : kExitCheckFailed;
  });
}

int cmd_sweep(const std::string& config_path, const std::string& axis, unsigned parallel,
              const std::filesystem::path& out_dir, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const json config = load_config_file(config_path);
    const auto rows = sweep(config, parse_axis(axis), parallel);
    if (out_dir.empty()) {
      write_sweep_csv(log, rows);
    } else {
      ensure_dir(out_dir);
      std::ofstream f;
      open_out(f, out_dir / "sweep.csv");
      write_sweep_csv(f, rows);
      log << "wrote " << (out_dir / "sweep.csv").string() << " (" << rows.size() << " points)\n";
    }
    return kExitPass;
  });
}

}  // namespace jamsim
