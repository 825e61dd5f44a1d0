#include <CLI11.hpp>

#include <iostream>

#include "hslab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Hardy-Sobolev Neumann problem toolkit"};
  app.require_subcommand(1);

  hslab::cli::Invocation inv;
  std::string out;
  std::uint64_t seed = 0;
  double tol = 0.0;
  for (std::string_view name : hslab::cli::kCommands) {
    CLI::App* sub = app.add_subcommand(std::string(name));
    sub->add_option("--config", inv.config_path, "experiment config (YAML or JSON)")->required();
    sub->add_option("--out", out, "CSV output path (overrides the config's output key)");
    sub->add_option("--seed", seed, "seed for randomized solver inputs");
    sub->add_option("--tol", tol, "relative quadrature tolerance");
    sub->callback([&inv, name] { inv.command = std::string(name); });
  }
  CLI11_PARSE(app, argc, argv);

  for (CLI::App* sub : app.get_subcommands()) {
    if (sub->count("--out")) inv.out = out;
    if (sub->count("--seed")) inv.seed = seed;
    if (sub->count("--tol")) inv.tol = tol;
  }
  return hslab::cli::run_invocation(inv, std::cout, std::cerr);
}
