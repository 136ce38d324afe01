// devroll command-line front end.
//
//   devroll run <scenario.json> [--out DIR] [--frames] [--quiet]
//
// Exit codes: 0 ok, 1 gate failed, 2 invalid input, 3 numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include "devroll/scenario.hpp"

int main(int argc, char** argv) {
  namespace sc = devroll::scenario;

  CLI::App app{"devroll: chart-based development, transport and splitting checks"};
  app.require_subcommand(1);

  std::string scenario_path;
  sc::RunOptions opts;
  std::string out_dir = ".";

  auto* run = app.add_subcommand("run", "run a JSON scenario");
  run->add_option("scenario", scenario_path, "scenario file")->required();
  run->add_option("--out", out_dir, "output directory (default: current directory)");
  run->add_flag("--frames", opts.frames, "include frame columns in trajectory CSVs");
  run->add_flag("--quiet", opts.quiet, "suppress the summary line on success");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return sc::invalid_input;
  }

  opts.out_dir = out_dir;
  const sc::RunResult r = sc::run_file(scenario_path, opts);
  if (r.exit_code != sc::ok) {
    std::cerr << "devroll: " << r.message << '\n';
  } else if (!opts.quiet) {
    std::cout << "devroll: " << r.report.value("command", std::string{}) << " ok; wrote";
    for (const auto& a : r.artifacts) std::cout << ' ' << a;
    std::cout << '\n';
  }
  return r.exit_code;
}
