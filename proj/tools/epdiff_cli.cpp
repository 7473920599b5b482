// epdiff: simulate / verify / sweep / decompose.
//
// Every option may also be given in a flat key = value file passed with
// --config; flags on the command line take precedence.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "epdiff/experiment.hpp"

int main(int argc, char** argv) {
  epdiff::ExperimentConfig cfg;
  std::string suite = "all";

  CLI::App app{"Euler-Arnold flows of Fourier-multiplier metrics on the circle"};
  app.set_config("--config", "", "flat key = value configuration file");
  app.fallthrough();
  app.require_subcommand(1);

  app.add_option("--operator", cfg.op, "builtin name, sobolev, or a k,a CSV file")->capture_default_str();
  app.add_option("--s", cfg.s, "order of the sobolev symbol (1+k^2)^(s/2)");
  app.add_option("--N", cfg.N, "bandwidth")->capture_default_str();
  app.add_option("--cfl", cfg.cfl)->capture_default_str();
  app.add_option("--dt-max", cfg.dt_max)->capture_default_str();
  app.add_option("--T", cfg.T, "horizon")->capture_default_str();
  app.add_option("--u0", cfg.u0, "sin, minus_sin, cos, zero, const:c, random:p:seed or a JSON file")
      ->capture_default_str();
  app.add_option("--output", cfg.output, "output directory")->capture_default_str();
  app.add_option("--cadence", cfg.cadence, "snapshot every this many steps (0: automatic)")
      ->capture_default_str();
  app.add_flag("--allow-degenerate", cfg.allow_degenerate, "invert on the complement of the kernel");
  app.add_option("--corpus", cfg.corpus, "number of random fields")->capture_default_str();
  app.add_option("--seed", cfg.seed)->capture_default_str();
  app.add_option("--adversaries", cfg.adversaries, "coordinate-ascent fields per lemma")
      ->capture_default_str();
  app.add_option("--order", cfg.order, "symbol order for the lemma_c multiplier")->capture_default_str();
  app.add_option("--s-min", cfg.s_min, "smallest metric order in a sweep")->capture_default_str();
  app.add_option("--s-max", cfg.s_max, "largest metric order in a sweep")->capture_default_str();
  app.add_option("--steps", cfg.steps, "number of sweep rows")->capture_default_str();
  app.add_option("--threads", cfg.threads, "sweep workers (default EPDIFF_THREADS or all cores)");

  auto* simulate = app.add_subcommand("simulate", "integrate one trajectory");
  auto* verify = app.add_subcommand("verify", "run verification suites");
  verify->add_option("suite", suite,
                     "lemma_a, lemma_b, lemma_c, lemma_d, q_decomposition, gronwall or all")
      ->capture_default_str();
  auto* sweep = app.add_subcommand("sweep", "blow-up phase table over metric orders");
  auto* decompose = app.add_subcommand("decompose", "certify a symbol and print its expansion");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*simulate) return epdiff::cmd_simulate(cfg, std::cout, std::cerr);
  if (*verify) return epdiff::cmd_verify(suite, cfg, std::cout, std::cerr);
  if (*sweep) return epdiff::cmd_sweep(cfg, std::cout, std::cerr);
  if (*decompose) return epdiff::cmd_decompose(cfg, std::cout, std::cerr);
  return 1;
}
