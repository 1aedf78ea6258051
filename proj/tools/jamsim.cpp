#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "jamsim/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"jamsim: self-triggered ternary consensus under per-link DoS"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::string trace;
  std::string axis;
  unsigned parallel = std::max(1u, std::thread::hardware_concurrency());

  auto* run = app.add_subcommand("run", "simulate a config and export the trace");
  run->add_option("--config", config, "experiment config (JSON)")->required();
  run->add_option("--out", out, "output directory")->required();

  auto* fit = app.add_subcommand("fit", "fit per-link DoS parameters and certificates");
  fit->add_option("--config", config, "experiment config (JSON)")->required();
  fit->add_option("--out", out, "directory for fit.csv");

  auto* check = app.add_subcommand("check", "verify an exported trace");
  check->add_option("--trace", trace, "directory written by run")->required();
  check->add_option("--config", config, "config the trace was produced from")->required();

  auto* sweep = app.add_subcommand("sweep", "run one point per value of a config field");
  sweep->add_option("--config", config, "experiment config (JSON)")->required();
  sweep->add_option("--axis", axis, "NAME=START:STOP:STEP, NAME a dotted config path")->required();
  sweep->add_option("--parallel", parallel, "worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--out", out, "directory for sweep.csv (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : jamsim::kExitConfigError;
  }

  if (*run) return jamsim::cmd_run(config, out, std::cout, std::cerr);
  if (*fit) return jamsim::cmd_fit(config, out, std::cout, std::cerr);
  if (*check) return jamsim::cmd_check(trace, config, std::cout, std::cerr);
  return jamsim::cmd_sweep(config, axis, parallel, out, std::cout, std::cerr);
}
