#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"log-barrier MDP solver"};
  app.require_subcommand(1);

  cli::SolveArgs solve_args;
  auto* solve = app.add_subcommand("solve", "minimize the barrier objective and write the solver report");
  solve->add_option("--mdp", solve_args.mdp, "model file (.mdp.json)")->required();
  solve->add_option("--eta", solve_args.eta, "barrier parameter")->required();
  solve->add_option("--tol", solve_args.tol, "gradient sup-norm tolerance");
  solve->add_option("--max-iters", solve_args.max_iters, "iteration budget");
  solve->add_option("--step", solve_args.step, "backtracking | constant:<alpha>");
  solve->add_option("--margin", solve_args.margin, "margin of the feasible start");
  solve->add_flag("--history", solve_args.history, "record every iteration");
  solve->add_option("--out", solve_args.out, "output path, - for stdout");

  cli::OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle", "value iteration or exact policy evaluation");
  oracle->add_option("--mdp", oracle_args.mdp, "model file")->required();
  auto* qstar = oracle->add_flag("--qstar", oracle_args.qstar, "optimal Q by value iteration");
  auto* pol = oracle->add_option("--policy", oracle_args.policy, "row-stochastic policy file; exact Q^pi");
  qstar->excludes(pol);
  oracle->add_option("--tol", oracle_args.tol, "value-iteration tolerance");
  oracle->add_option("--out", oracle_args.out, "output path, - for stdout");

  cli::SolveArgs cert_args;
  auto* certify = app.add_subcommand("certify", "solve, run the oracle, and evaluate every error bound");
  certify->add_option("--mdp", cert_args.mdp, "model file")->required();
  certify->add_option("--eta", cert_args.eta, "barrier parameter")->required();
  certify->add_option("--policy", cert_args.policy, "policy file: certify policy evaluation instead");
  certify->add_option("--tol", cert_args.tol, "gradient sup-norm tolerance");
  certify->add_option("--vi-tol", cert_args.vi_tol, "value-iteration tolerance");
  certify->add_option("--max-iters", cert_args.max_iters, "iteration budget");
  certify->add_option("--step", cert_args.step, "backtracking | constant:<alpha>");
  certify->add_option("--margin", cert_args.margin, "margin of the feasible start");
  certify->add_option("--out", cert_args.out, "output path, - for stdout");

  cli::BenchArgs bench_args;
  bool cold = false;
  auto* bench = app.add_subcommand("bench", "error-vs-iteration curves for a list of barrier parameters");
  bench->add_option("--env", bench_args.env, "frozenlake6 | chain:<n> | random:<seed>,<S>,<A>")->required();
  bench->add_option("--etas", bench_args.etas, "comma-separated barrier parameters")->required();
  bench->add_option("--step", bench_args.step, "backtracking | constant:<alpha>");
  bench->add_option("--csv", bench_args.csv, "CSV output path, - for stdout")->required();
  bench->add_option("--tol", bench_args.tol, "gradient sup-norm tolerance");
  bench->add_option("--max-iters", bench_args.max_iters, "iteration budget per solve");
  bench->add_option("--stride", bench_args.stride, "emit a row every this many iterations");
  bench->add_option("--margin", bench_args.margin, "margin of the feasible start");
  auto* warm = bench->add_flag("--warm", bench_args.warm, "warm-started path over decreasing etas");
  auto* coldf = bench->add_flag("--cold", cold, "independent solves (default)");
  warm->excludes(coldf);

  cli::GenArgs gen_args;
  auto* gen = app.add_subcommand("gen", "write a generated model file");
  gen->add_option("--env", gen_args.env, "frozenlake6 | chain:<n> | random:<seed>,<S>,<A>")->required();
  gen->add_option("--gamma", gen_args.gamma, "discount (generator default if omitted)");
  gen->add_option("--out", gen_args.out, "output path, - for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    return cli::input_error;
  }

  if (*solve) return cli::cmd_solve(solve_args);
  if (*oracle) return cli::cmd_oracle(oracle_args);
  if (*certify) return cli::cmd_certify(cert_args);
  if (*bench) return cli::cmd_bench(bench_args);
  return cli::cmd_gen(gen_args);
}
