#pragma once

#include <string>
#include <vector>

#include "lbmdp/environments.hpp"
#include "lbmdp/io.hpp"
#include "lbmdp/solver.hpp"

namespace cli {

enum Exit { ok = 0, input_error = 1, not_converged = 2, stalled = 3, bound_failed = 4 };

enum class Level { quiet = 0, info = 1, trace = 2 };
Level log_level();  // from BARRIER_MDP_LOG
void log(Level at, const std::string& msg);

struct SolveArgs {
  std::string mdp, out = "-", step = "backtracking", policy;
  double eta = 0, tol = 1e-8, margin = 1.0, vi_tol = 1e-12;
  long max_iters = 200'000;
  bool history = false;
};

struct OracleArgs {
  std::string mdp, policy, out = "-";
  bool qstar = false;
  double tol = 1e-12;
};

struct BenchArgs {
  std::string env, etas, step = "backtracking", csv;
  double tol = 1e-8, margin = 1.0;
  long max_iters = 200'000, stride = 100;
  bool warm = false;
};

struct GenArgs {
  std::string env, out = "-";
  double gamma = -1;  // negative: generator default
};

int cmd_solve(const SolveArgs& a);
int cmd_oracle(const OracleArgs& a);
int cmd_certify(const SolveArgs& a);
int cmd_bench(const BenchArgs& a);
int cmd_gen(const GenArgs& a);

// helpers shared with the tests of the command layer
lbmdp::StepMode parse_step(const std::string& text);
std::vector<double> parse_etas(const std::string& text);
lbmdp::Mdp<double> make_env(const std::string& spec, double gamma);
std::string shortest(double v);
int exit_for(lbmdp::Termination t);

}  // namespace cli
