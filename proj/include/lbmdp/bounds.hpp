#pragma once

#include <array>
#include <string>

#include "lbmdp/oracle.hpp"
#include "lbmdp/solver.hpp"

namespace lbmdp {

struct BoundCertificate {
  std::string name;
  double lower = 0, value = 0, upper = 0;
  bool lower_ok = false, upper_ok = false;
  double slack_tolerance = 0;
  std::string note;  // how slack_tolerance was assembled

  bool ok() const { return lower_ok && upper_ok; }
};

inline BoundCertificate make_certificate(std::string name, double lower, double value, double upper, double tol,
                                         std::string note) {
  BoundCertificate c{std::move(name), lower, value, upper, false, false, tol, std::move(note)};
  c.lower_ok = value >= lower - tol;
  c.upper_ok = value <= upper + tol;
  return c;
}

template <typename Scalar>
PolicyDet primal_policy(const QTable<Scalar>& q) {
  return greedy_policy(q);
}

// rows proportional to the action marginals lam(s,a) = sum_a' lam(s,a,a')
template <typename Scalar>
PolicyStoch<Scalar> dual_policy(const DualTensor<Scalar>& lam, Index num_actions) {
  if (num_actions <= 0 || lam.rows() % num_actions != 0) throw std::invalid_argument("dual tensor has wrong shape");
  const Index S = lam.rows() / num_actions;
  PolicyStoch<Scalar> out(S, num_actions);
  for (Index s = 0; s < S; ++s) {
    Scalar tot(0);
    for (Index a = 0; a < num_actions; ++a) {
      out(s, a) = lam.row(s * num_actions + a).sum();
      tot += out(s, a);
    }
    if (!(tot > Scalar(0))) throw DegenerateStateError("state " + std::to_string(s) + " carries no dual mass", s);
    out.row(s) /= tot;
  }
  return out;
}

struct CertifyContext {
  double vi_tol = 1e-12;   // value-iteration tolerance behind q_star
  double grad_tol = 1e-8;  // solver tolerance behind the report
};

namespace detail {

template <typename Scalar>
void require_converged(const SolverReport<Scalar>& rep, double grad_tol) {
  if (!rep.converged() || !(static_cast<double>(rep.final_grad_norm) <= grad_tol))
    throw PreconditionError(std::string("certificate needs a converged solve (termination ") +
                            to_string(rep.termination) + ", grad " +
                            std::to_string(static_cast<double>(rep.final_grad_norm)) + ")");
}

// oracle_tol (1+g)/(1-g) + kappa grad_tol, kappa = (number of constraints) * max w / min w
template <typename Scalar>
std::pair<double, std::string> slack_model(const Mdp<Scalar>& m, const std::type_identity_t<Table<Scalar>>& w, double oracle_tol,
                                           double grad_tol) {
  double g = static_cast<double>(m.gamma());
  double kappa = static_cast<double>(w.size()) * static_cast<double>(w.maxCoeff() / w.minCoeff());
  double tol = oracle_tol * (1 + g) / (1 - g) + kappa * grad_tol;
  return {tol, "oracle_tol*(1+gamma)/(1-gamma) + kappa*grad_tol with oracle_tol=" + std::to_string(oracle_tol) +
                   ", kappa=" + std::to_string(kappa) + ", grad_tol=" + std::to_string(grad_tol)};
}

}  // namespace detail

// optimality-gap and Bellman-error sandwiches for the full barrier problem
template <typename Scalar>
std::array<BoundCertificate, 2> certify_theorem1(const SolverReport<Scalar>& rep, const QTable<Scalar>& q_star,
                                                 const Mdp<Scalar>& m, const BarrierParams<Scalar>& p,
                                                 const CertifyContext& ctx = {}) {
  detail::require_converged(rep, ctx.grad_tol);
  p.check(m.num_states(), m.num_actions());
  const double g = static_cast<double>(m.gamma()), eta = static_cast<double>(p.eta);
  const double wmin = static_cast<double>(p.weights.minCoeff()), wsum = static_cast<double>(p.weights.sum());
  const double rmin = static_cast<double>(p.rho.minCoeff());
  auto [tol, note] = detail::slack_model(m, p.weights, ctx.vi_tol, ctx.grad_tol);

  const QTable<Scalar>& qt = rep.q_tilde;
  double gap = static_cast<double>((qt - q_star).cwiseAbs().maxCoeff());
  double bell = static_cast<double>((qt - bellman_T(m, qt)).cwiseAbs().maxCoeff());
  return {make_certificate("optimality_gap", eta * wmin, gap, eta * wsum / rmin, tol, note),
          make_certificate("bellman_error", eta * (1 - g) * wmin, bell, (1 + g) * eta * wsum / rmin, tol, note)};
}

template <typename Scalar>
struct ObjectiveValues {
  Scalar j_star, j_dual, j_primal;
};

template <typename Scalar>
ObjectiveValues<Scalar> objective_values(const SolverReport<Scalar>& rep, const Mdp<Scalar>& m,
                                         const std::type_identity_t<Vec<Scalar>>& rho_state, double vi_tol) {
  QTable<Scalar> q_star = value_iteration(m, OracleTolerances{vi_tol});
  ObjectiveValues<Scalar> v;
  v.j_star = exact_j(m, greedy_policy(q_star), rho_state);
  v.j_dual = exact_j(m, dual_policy(rep.lambda_tilde, m.num_actions()), rho_state);
  v.j_primal = exact_j(m, primal_policy(rep.q_tilde), rho_state);
  return v;
}

// objective sandwiches for the dual policy, the primal policy, and their difference
template <typename Scalar>
std::array<BoundCertificate, 3> certify_theorem2(const SolverReport<Scalar>& rep, const Mdp<Scalar>& m,
                                                 const BarrierParams<Scalar>& p, const std::type_identity_t<Vec<Scalar>>& rho_state,
                                                 const CertifyContext& ctx = {}) {
  detail::require_converged(rep, ctx.grad_tol);
  p.check(m.num_states(), m.num_actions());
  Vec<Scalar> marg = state_marginal(p.rho);
  if (rho_state.size() != marg.size() || !((rho_state - marg).cwiseAbs().maxCoeff() <= Scalar(1e-12)))
    throw PreconditionError("rho_state must equal the state marginal of rho");
  const double g = static_cast<double>(m.gamma()), eta = static_cast<double>(p.eta);
  const double wsum = static_cast<double>(p.weights.sum()), rmin = static_cast<double>(p.rho.minCoeff());
  const double B = eta * (1 + g) * wsum / ((1 - g) * rmin);
  auto [tol, note] = detail::slack_model(m, p.weights, ctx.vi_tol, ctx.grad_tol);

  auto v = objective_values(rep, m, marg, ctx.vi_tol);
  const double js = static_cast<double>(v.j_star), jd = static_cast<double>(v.j_dual),
               jp = static_cast<double>(v.j_primal);
  return {make_certificate("dual_policy_objective", js - eta * wsum, jd, js, tol, note),
          make_certificate("primal_policy_objective", js - B, jp, js, tol, note),
          make_certificate("primal_minus_dual_objective", -B, jp - jd, eta * wsum, tol, note)};
}

// policy-evaluation sandwiches; q_pi from policy_q, whose residual bound 1e-10 plays the oracle role
template <typename Scalar>
std::array<BoundCertificate, 2> certify_policy_eval(const SolverReport<Scalar>& rep, const QTable<Scalar>& q_pi,
                                                    const Mdp<Scalar>& m, const std::type_identity_t<PolicyStoch<Scalar>>& pi,
                                                    const PolicyBarrierParams<Scalar>& p,
                                                    const CertifyContext& ctx = {}) {
  detail::require_converged(rep, ctx.grad_tol);
  p.check(m.num_states(), m.num_actions());
  const double g = static_cast<double>(m.gamma()), eta = static_cast<double>(p.eta);
  const double wmin = static_cast<double>(p.weights.minCoeff()), wsum = static_cast<double>(p.weights.sum());
  const double rmin = static_cast<double>(p.rho.minCoeff());
  Table<Scalar> wcol = Eigen::Map<const Table<Scalar>>(p.weights.data(), m.num_pairs(), 1);
  auto [tol, note] = detail::slack_model(m, wcol, 1e-10, ctx.grad_tol);

  const QTable<Scalar>& qt = rep.q_tilde;
  double gap = static_cast<double>((qt - q_pi).cwiseAbs().maxCoeff());
  double bell = static_cast<double>((qt - bellman_T_pi(m, pi, qt)).cwiseAbs().maxCoeff());
  return {make_certificate("policy_eval_gap", eta * wmin, gap, eta * wsum / rmin, tol, note),
          make_certificate("policy_eval_bellman_error", eta * (1 - g) * wmin, bell, (1 + g) * eta * wsum / rmin, tol,
                           note)};
}

}  // namespace lbmdp
