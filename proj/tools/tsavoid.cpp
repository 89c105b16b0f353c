#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tsavoid/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"tsavoid: avoidance strategies for linear systems on time scales"};
  app.require_subcommand(1);

  std::string config;
  std::string out_file;
  std::string out_dir;

  auto* syn = app.add_subcommand("synthesize", "compute Q, D and the switching strategy");
  syn->add_option("-c,--config", config, "configuration JSON")->required();
  syn->add_option("-o,--out", out_file, "write the synthesis report as JSON");

  auto* sim = app.add_subcommand("simulate", "simulate every initial state in the config");
  sim->add_option("-c,--config", config, "configuration JSON")->required();
  sim->add_option("-d,--dir", out_dir, "output directory for CSV and JSON runs")->required();

  auto* ver = app.add_subcommand("verify", "check the avoidance conditions on a grid");
  ver->add_option("-c,--config", config, "configuration JSON")->required();

  auto* rep = app.add_subcommand("reproduce-paper", "recompute the worked example");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : tsavoid::kExitConfig;
  }

  if (syn->parsed()) {
    std::optional<std::string> out;
    if (!out_file.empty()) out = out_file;
    return tsavoid::cmd_synthesize(config, out, std::cout, std::cerr);
  }
  if (sim->parsed()) return tsavoid::cmd_simulate(config, out_dir, std::cout, std::cerr);
  if (ver->parsed()) return tsavoid::cmd_verify(config, std::cout, std::cerr);
  if (rep->parsed()) return tsavoid::cmd_reproduce_paper(std::cout, std::cerr);
  return tsavoid::kExitConfig;
}
