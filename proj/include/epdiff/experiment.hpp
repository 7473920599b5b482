#pragma once

// Experiment orchestration behind the command-line tool.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "epdiff/analysis_verifier.hpp"
#include "epdiff/flow_solver.hpp"
#include "epdiff/operator_algebra.hpp"

namespace epdiff {

struct ExperimentConfig {
  // builtin name, "sobolev" (with s), or a path to a k,a CSV
  std::string op = "sobolev";
  std::optional<double> s;
  int N = 256;
  double cfl = 0.3;
  double dt_max = 1e-2;
  double T = 10.0;
  std::string u0 = "sin";
  std::filesystem::path output = "out";
  long cadence = 0;
  bool allow_degenerate = false;

  int corpus = 1000;
  std::uint64_t seed = 1;
  int adversaries = 4;
  double order = -2.0;

  double s_min = 0.0;
  double s_max = 2.0;
  int steps = 5;
  // 0: EPDIFF_THREADS, else hardware concurrency
  int threads = 0;
};

Symbol resolve_symbol(const ExperimentConfig& config);
InertiaOperator resolve_operator(const ExperimentConfig& config);

// "sin", "minus_sin", "cos", "zero", "const:c", "random:p:seed" or a JSON
// file {"coefficients": [[re, im], ...]} holding u_0..u_K.
FourierField parse_initial_condition(const std::string& spec, int bandwidth);

SolverConfig solver_config(const ExperimentConfig& config);

// Exit codes: 0 clean, 1 configuration / precondition / failed check,
// 2 (simulate) blow-up verdict or resolution exhaustion.
int cmd_simulate(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int cmd_verify(const std::string& suite, const ExperimentConfig& config, std::ostream& out,
               std::ostream& err);
int cmd_sweep(const ExperimentConfig& config, std::ostream& out, std::ostream& err);
int cmd_decompose(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

int sweep_threads(const ExperimentConfig& config);

}  // namespace epdiff
