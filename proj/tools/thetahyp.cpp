// thetahyp: evaluate theta hypergeometric series and verify identities from the shell.
//
//   thetahyp eval SPEC.json
//   thetahyp verify [TARGET] [-i PARAMS.json]
//   thetahyp ellipticity CHECK.json
//   thetahyp sample TARGET --draws 20 --seed 7 --out params.json

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "thetahyp/cli.hpp"

namespace {

using thetahyp::cli::Command;
using thetahyp::cli::RunConfig;

struct Flags {
  std::optional<double> tol;
  std::uint64_t seed = 1;
  int draws = 10;
  std::string out;
  std::vector<double> band;
  std::vector<double> nome;
  int n_max = 4;
  int rank = 2;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--tol", f.tol, "relative tolerance in (0, 1)");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--draws", f.draws, "number of draws / samples");
  cmd->add_option("--out", f.out, "output file (default stdout)");
  cmd->add_option("--band", f.band, "modulus band lo,hi for sampled parameters")->delimiter(',')->expected(2);
  cmd->add_option("--nome", f.nome, "q_re,q_im,p_re,p_im")->delimiter(',')->expected(4);
  cmd->add_option("--N", f.n_max, "largest truncation integer drawn by samplers");
  cmd->add_option("--rank", f.rank, "rank n of the multiple sums");
}

RunConfig to_config(Command command, const Flags& f) {
  RunConfig c;
  c.command = command;
  c.tolerance = f.tol;
  c.seed = f.seed;
  c.draws = f.draws;
  c.output_path = f.out;
  if (!f.band.empty()) c.band = thetahyp::Band{f.band.at(0), f.band.at(1)};
  if (!f.nome.empty()) c.nome = thetahyp::Nome{{f.nome.at(0), f.nome.at(1)}, {f.nome.at(2), f.nome.at(3)}};
  c.n_max = f.n_max;
  c.rank = f.rank;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"theta hypergeometric series: evaluation and identity verification"};
  app.require_subcommand(1);

  Flags flags;
  std::string input;
  std::string target;

  auto* eval = app.add_subcommand("eval", "evaluate a series spec");
  eval->add_option("input", input, "series spec JSON")->required();
  add_common(eval, flags);

  auto* verify = app.add_subcommand("verify", "verify ft_sum, bailey, multi1, multi2 or ge_split");
  verify->add_option("target", target, "identity name (optional when the input names it)");
  verify->add_option("-i,--input", input, "parameter JSON (sample output or a sampler block)");
  add_common(verify, flags);

  auto* ellipticity = app.add_subcommand("ellipticity", "run ellipticity / modularity checks");
  ellipticity->add_option("input", input, "check description JSON")->required();
  add_common(ellipticity, flags);

  auto* sample = app.add_subcommand("sample", "draw constraint-respecting parameter sets");
  sample->add_option("target", target, "identity name")->required();
  add_common(sample, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << thetahyp::json{{"error", "usage_error"}, {"message", e.what()}}.dump() << "\n";
    return thetahyp::cli::exit_invalid;
  }

  Command command = Command::eval;
  if (*verify) command = Command::verify;
  if (*ellipticity) command = Command::ellipticity;
  if (*sample) command = Command::sample;

  RunConfig config = to_config(command, flags);
  config.input_path = input;
  config.target = target;
  return thetahyp::cli::run(config);
}
