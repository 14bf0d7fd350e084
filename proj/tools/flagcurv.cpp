// flagcurv: flag curvature of invariant Randers metrics from Lie algebra data.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "finsler/commands.hpp"

namespace {

struct SourceArgs {
  std::string path;
  std::string builtin;

  void attach(CLI::App* cmd) {
    cmd->add_option("file", path, "Algebra file (JSON)");
    cmd->add_option("--builtin", builtin,
                    "Builtin space: heisenberg3, su2, su2_x_r:<t>, abelian:<n>, toy_gh4");
  }

  finsler::cli::Source source() const {
    finsler::cli::Source s;
    if (!path.empty()) s.path = path;
    if (!builtin.empty()) s.builtin = builtin;
    return s;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flag curvature of invariant Randers metrics on homogeneous spaces"};
  app.require_subcommand(1);

  bool pretty = false;
  app.add_flag("--pretty", pretty, "Human-readable output");

  SourceArgs validate_src, flag_src, counter_src, sweep_src, export_src;

  auto* validate = app.add_subcommand("validate", "Check an algebra file");
  validate_src.attach(validate);

  auto* flag = app.add_subcommand("flag-curvature", "Curvature report for one flag");
  flag_src.attach(flag);
  std::string y, u, variant = "oracle-consistent";
  bool force = false;
  flag->add_option("--y", y, "Flagpole, comma-separated m-coordinates")->required();
  flag->add_option("--u", u, "Transverse edge, comma-separated m-coordinates")->required();
  flag->add_option("--variant", variant, "oracle-consistent | paper-literal | all")
      ->check(CLI::IsMember({"oracle-consistent", "paper-literal", "all"}));
  flag->add_flag("--force", force, "Evaluate the closed form outside its hypotheses");

  auto* counter = app.add_subcommand("counterexample",
                                     "Second-kind formula vs Koszul curvature on a Lie group");
  counter_src.attach(counter);
  int samples = 0;
  std::uint64_t seed = 0;
  counter->add_option("--samples", samples, "Random flags in addition to basis planes");
  counter->add_option("--seed", seed, "Seed for the random flags");

  auto* sweep = app.add_subcommand("sweep", "All variants over a flag grid");
  sweep_src.attach(sweep);
  std::string grid = "basis";
  bool sweep_force = false;
  sweep->add_option("--grid", grid, "basis | random:<N>[:<seed>] | basis+random:<N>[:<seed>]");
  sweep->add_flag("--force", sweep_force, "Evaluate the closed form outside its hypotheses");

  auto* exp = app.add_subcommand("export", "Write a space as an algebra file");
  export_src.attach(exp);

  for (auto* sub : {validate, flag, counter, sweep, exp})
    sub->add_flag("--pretty", pretty, "Human-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : finsler::cli::invalid_input;
  }

  using namespace finsler::cli;
  CommandResult r;
  if (*validate)
    r = cmd_validate(validate_src.source(), pretty);
  else if (*flag)
    r = cmd_flag_curvature(flag_src.source(), y, u, variant, force, pretty);
  else if (*counter)
    r = cmd_counterexample(counter_src.source(), samples, seed, pretty);
  else if (*sweep)
    r = cmd_sweep(sweep_src.source(), grid, sweep_force, pretty);
  else
    r = cmd_export(export_src.source());

  std::cout << r.out;
  std::cerr << r.err;
  return r.exit_code;
}
