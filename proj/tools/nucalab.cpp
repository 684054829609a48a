// nucalab: command-line front end for linear NUCA analysis.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "nucalab/nucalab.hpp"

namespace cli = nucalab::cli;

namespace {

int emit(const cli::Output& o) {
  std::cout << o.out << std::flush;
  std::cerr << o.err << std::flush;
  return o.code;
}

void add_bounds(CLI::App* cmd, nucalab::AnalysisBounds& b) {
  cmd->add_option("--bound", b.n_max, "Largest window radius n (E_n = [-n, n])")->check(CLI::NonNegativeNumber);
  cmd->add_option("--mem-bound", b.mem_bound, "Memory bound for inverse searches")->check(CLI::NonNegativeNumber);
  cmd->add_option("--support-bound", b.support_bound, "Override bound for inverse searches")->check(CLI::NonNegativeNumber);
  cmd->add_option("--max-period", b.max_period, "Largest tail period for kernel searches")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact analysis of linear non-uniform cellular automata over GF(p)^k"};
  app.require_subcommand(1);
  std::vector<std::string> echo(argv + 1, argv + argc);

  cli::CheckOptions check;
  auto* c_check = app.add_subcommand("check", "Decide one property; exit 0 Holds, 1 Fails, 2 Inconclusive");
  c_check->add_option("rule", check.rule_path, "Rule file (JSON)")->required();
  c_check->add_option("--property", check.property,
                      "pre-injective|injective|surjective|post-surjective|stable-injective|stable-post-surjective|invertible")
      ->required();
  add_bounds(c_check, check.bounds);
  c_check->add_flag("--json", check.json, "Emit a JSON run report");

  std::string dual_path;
  auto* c_dual = app.add_subcommand("dual", "Print the dual rule configuration");
  c_dual->add_option("rule", dual_path, "Rule file (JSON)")->required();

  cli::InvertOptions inv;
  auto* c_inv = app.add_subcommand("invert", "Search for left/right inverses or construct a two-sided inverse");
  c_inv->add_option("rule", inv.rule_path, "Rule file (JSON)")->required();
  c_inv->add_option("--mode", inv.mode, "left|right|construct|all")->check(CLI::IsMember({"left", "right", "construct", "all"}));
  c_inv->add_option("--mem-bound", inv.mem_bound, "Memory bound of the inverse")->check(CLI::NonNegativeNumber);
  c_inv->add_option("--support-bound", inv.support_bound, "Override bound of the inverse")->check(CLI::NonNegativeNumber);
  c_inv->add_option("--e-bound", inv.e_bound, "Preimage radius bound for construct")->check(CLI::NonNegativeNumber);
  c_inv->add_flag("--json", inv.json, "Emit a JSON run report");

  cli::ShadowOptions sh;
  std::optional<std::uint64_t> sh_seed;
  auto* c_sh = app.add_subcommand("shadow", "Generate a pseudo-orbit and shadow it exactly (JSON report)");
  c_sh->add_option("rule", sh.rule_path, "Rule file (JSON)")->required();
  c_sh->add_option("--epsilon", sh.epsilon, "Target distance, a power of two such as 2^-2");
  c_sh->add_option("--horizon", sh.horizon, "Horizon T: indices 0..T per generator")->check(CLI::NonNegativeNumber);
  c_sh->add_option("--perturb", sh.perturb, "none|edge|random")->check(CLI::IsMember({"none", "edge", "random"}));
  c_sh->add_option("--sft-window", sh.sft_window, "Window parameter N")->check(CLI::PositiveNumber);
  c_sh->add_option("--powers", sh.powers, "Generators as powers of the rule, e.g. 1,2")->delimiter(',');
  c_sh->add_option("--seed", sh_seed, "Seed (default: NUCALAB_SEED or a fixed value)");

  cli::ReproOptions rp;
  std::string rp_rule;
  std::optional<std::uint64_t> rp_seed;
  auto* c_rp = app.add_subcommand("repro-paper", "Confirm the property table of the bijective counterexample");
  c_rp->add_option("--rule", rp_rule, "Counterexample rule file (default: built in)");
  add_bounds(c_rp, rp.bounds);
  c_rp->add_option("--samples", rp.structural_samples, "Random instances per structural identity")
      ->check(CLI::NonNegativeNumber);
  c_rp->add_option("--seed", rp_seed, "Seed (default: NUCALAB_SEED or a fixed value)");
  c_rp->add_flag("--json", rp.json, "Emit a JSON run report");

  std::string cert_path;
  auto* c_cert = app.add_subcommand("verify-cert", "Re-verify every certificate in a verdict or report file");
  c_cert->add_option("file", cert_path, "Verdict or report (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : cli::kExitMalformed;
  }

  if (*c_check) {
    check.echo = echo;
    return emit(cli::cmd_check(check));
  }
  if (*c_dual) return emit(cli::cmd_dual(dual_path));
  if (*c_inv) {
    inv.echo = echo;
    return emit(cli::cmd_invert(inv));
  }
  if (*c_sh) {
    sh.seed = sh_seed;
    sh.echo = echo;
    return emit(cli::cmd_shadow(sh));
  }
  if (*c_rp) {
    if (!rp_rule.empty()) rp.rule_path = rp_rule;
    rp.seed = rp_seed;
    rp.echo = echo;
    return emit(cli::cmd_repro_paper(rp));
  }
  if (*c_cert) return emit(cli::cmd_verify_cert(cert_path));
  return cli::kExitMalformed;
}
