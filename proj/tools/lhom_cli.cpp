#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "lhom/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Fiberwise verification of periodic nonlocal homogenization rates"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  int workers = 0;
  int truncation = 0;
  std::string xi;

  for (const std::string& name : lhom::command_names()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "study configuration (JSON)")->required();
    sub->add_option("--out", out, "output directory (default: config \"output\" or .)");
    sub->add_option("--workers", workers, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    sub->add_option("--truncation", truncation, "override the Fourier truncation N")->check(CLI::PositiveNumber);
    if (name == "fiber") sub->add_option("--xi", xi, "quasimomenta: components ',' separated, points ';' separated")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  lhom::CommandOptions opt;
  opt.command = app.get_subcommands().front()->get_name();
  opt.config_path = config;
  if (!out.empty()) opt.out_dir = out;
  opt.workers = workers;
  if (truncation > 0) opt.truncation = truncation;
  opt.xi_list = xi;
  return lhom::run_command(opt, std::cout).exit_code;
}
