#pragma once

#include <Eigen/LU>

#include "lbmdp/mdp.hpp"

namespace lbmdp {

struct OracleTolerances {
  double vi_tol = 1e-12;
  long max_iters = 1'000'000;
};

// Q_{k+1} = T Q_k until ||Q_k - T Q_k|| <= vi_tol; returns the Q_k that met it.
template <typename Scalar>
QTable<Scalar> value_iteration(const Mdp<Scalar>& m, const OracleTolerances& tol = {}) {
  if (!(tol.vi_tol > 0)) throw std::invalid_argument("vi_tol must be positive");
  if (tol.max_iters <= 0) throw std::invalid_argument("max_iters must be positive");
  require_valid(m);
  QTable<Scalar> q = QTable<Scalar>::Zero(m.num_states(), m.num_actions());
  Scalar res(0);
  for (long k = 0; k < tol.max_iters; ++k) {
    QTable<Scalar> tq = bellman_T(m, q);
    res = (tq - q).cwiseAbs().maxCoeff();
    if (res <= Scalar(tol.vi_tol)) return q;
    q.swap(tq);
  }
  throw NonConvergenceError("value iteration did not reach tolerance", static_cast<double>(res), tol.max_iters);
}

// I - gamma * P_pi over flattened (s,a)
template <typename Scalar>
Table<Scalar> policy_system(const Mdp<Scalar>& m, const std::type_identity_t<PolicyStoch<Scalar>>& pi) {
  const Index A = m.num_actions(), n = m.num_pairs();
  Table<Scalar> M = Table<Scalar>::Identity(n, n);
  for (Index s = 0; s < m.num_states(); ++s)
    for (Index a = 0; a < A; ++a)
      for (const auto& e : m.successors(s, a))
        for (Index a2 = 0; a2 < A; ++a2) M(s * A + a, e.next * A + a2) -= m.gamma() * e.p * pi(e.next, a2);
  return M;
}

// Exact Q^pi by dense LU with one refinement sweep.
template <typename Scalar>
QTable<Scalar> policy_q(const Mdp<Scalar>& m, const std::type_identity_t<PolicyStoch<Scalar>>& pi) {
  require_valid(m);
  check_policy(pi, m.num_states(), m.num_actions());
  const Index S = m.num_states(), A = m.num_actions();
  Table<Scalar> M = policy_system(m, pi);
  Eigen::PartialPivLU<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> lu(M);
  Vec<Scalar> b = Eigen::Map<const Vec<Scalar>>(m.expected_reward().data(), S * A);
  Vec<Scalar> x = lu.solve(b);
  x += lu.solve(Vec<Scalar>(b - M * x));
  QTable<Scalar> q = Eigen::Map<const QTable<Scalar>>(x.data(), S, A);
  Scalar res = (q - bellman_T_pi(m, pi, q)).cwiseAbs().maxCoeff();
  if (!(res <= Scalar(1e-10)))
    throw std::runtime_error("policy_q: linear solve residual " + std::to_string(static_cast<double>(res)));
  return q;
}

template <typename Scalar>
Scalar exact_j(const Mdp<Scalar>& m, const std::type_identity_t<PolicyStoch<Scalar>>& pi, const std::type_identity_t<Vec<Scalar>>& rho_state) {
  using std::abs;
  if (rho_state.size() != m.num_states()) throw std::invalid_argument("rho_state has wrong length");
  if (!(rho_state.minCoeff() >= Scalar(0)) || !(abs(rho_state.sum() - Scalar(1)) <= Scalar(1e-12)))
    throw std::invalid_argument("rho_state must be a distribution");
  QTable<Scalar> q = policy_q(m, pi);
  Scalar j(0);
  for (Index s = 0; s < m.num_states(); ++s) {
    Scalar v(0);
    for (Index a = 0; a < m.num_actions(); ++a) v += pi(s, a) * q(s, a);
    j += rho_state(s) * v;
  }
  return j;
}

template <typename Scalar>
Scalar exact_j(const Mdp<Scalar>& m, const PolicyDet& pi, const std::type_identity_t<Vec<Scalar>>& rho_state) {
  return exact_j(m, one_hot<Scalar>(pi, m.num_actions()), rho_state);
}

// sum_a' lam(s,a,a') - gamma sum_{s',a'} P(s|s',a') lam(s',a',a) - rho(s,a)
template <typename Scalar>
QTable<Scalar> dual_residual(const Mdp<Scalar>& m, const std::type_identity_t<DualTensor<Scalar>>& lam, const std::type_identity_t<Table<Scalar>>& rho) {
  const Index S = m.num_states(), A = m.num_actions();
  if (lam.rows() != S * A || lam.cols() != A) throw std::invalid_argument("dual tensor has wrong shape");
  QTable<Scalar> inflow = QTable<Scalar>::Zero(S, A);
  for (Index s = 0; s < S; ++s)
    for (Index a = 0; a < A; ++a)
      for (const auto& e : m.successors(s, a)) inflow.row(e.next) += e.p * lam.row(s * A + a);
  QTable<Scalar> out(S, A);
  for (Index s = 0; s < S; ++s)
    for (Index a = 0; a < A; ++a) out(s, a) = lam.row(s * A + a).sum() - m.gamma() * inflow(s, a) - rho(s, a);
  return out;
}

// (s,a)-indexed dual of the policy-evaluation LP:
// lam(s,a) - gamma pi(a|s) sum_{s',a'} P(s|s',a') lam(s',a') - rho(s,a)
template <typename Scalar>
QTable<Scalar> dual_residual_pi(const Mdp<Scalar>& m, const std::type_identity_t<PolicyStoch<Scalar>>& pi, const std::type_identity_t<DualTensor<Scalar>>& lam,
                                const std::type_identity_t<Table<Scalar>>& rho) {
  const Index S = m.num_states(), A = m.num_actions();
  if (lam.rows() != S * A || lam.cols() != 1) throw std::invalid_argument("policy dual has wrong shape");
  Vec<Scalar> inflow = Vec<Scalar>::Zero(S);
  for (Index s = 0; s < S; ++s)
    for (Index a = 0; a < A; ++a)
      for (const auto& e : m.successors(s, a)) inflow(e.next) += e.p * lam(s * A + a, 0);
  QTable<Scalar> out(S, A);
  for (Index s = 0; s < S; ++s)
    for (Index a = 0; a < A; ++a) out(s, a) = lam(s * A + a, 0) - m.gamma() * pi(s, a) * inflow(s) - rho(s, a);
  return out;
}

template <typename Scalar>
struct OccupancyReport {
  Scalar mass_error;           // |(1-gamma) sum lam - 1|
  Scalar occupancy_deviation;  // max_s |lam(s) - mu^pi(s)/(1-gamma)|
  PolicyStoch<Scalar> induced;
  Vec<Scalar> state_mass;
  Vec<Scalar> occupancy;  // discounted visitation sum_t gamma^t Pr(s_t = s)
};

template <typename Scalar>
OccupancyReport<Scalar> occupancy_check(const Mdp<Scalar>& m, const std::type_identity_t<DualTensor<Scalar>>& lam, const std::type_identity_t<Table<Scalar>>& rho,
                                        Scalar tau) {
  const Index S = m.num_states(), A = m.num_actions();
  Scalar worst = dual_residual(m, lam, rho).cwiseAbs().maxCoeff();
  if (!(worst <= tau))
    throw PreconditionError("occupancy_check: dual residual " + std::to_string(static_cast<double>(worst)) +
                            " exceeds tolerance");
  OccupancyReport<Scalar> rep;
  rep.mass_error = std::abs((Scalar(1) - m.gamma()) * lam.sum() - Scalar(1));
  Vec<Scalar> marg = lam.rowwise().sum();  // lam(s,a)
  rep.state_mass = Vec<Scalar>::Zero(S);
  rep.induced.resize(S, A);
  for (Index s = 0; s < S; ++s) {
    for (Index a = 0; a < A; ++a) rep.state_mass(s) += marg(s * A + a);
    if (!(rep.state_mass(s) > Scalar(0))) throw DegenerateStateError("state with zero dual mass", s);
    for (Index a = 0; a < A; ++a) rep.induced(s, a) = marg(s * A + a) / rep.state_mass(s);
  }
  // x = rho_state + gamma P_pi^T x
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> M = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Identity(S, S);
  for (Index s = 0; s < S; ++s)
    for (Index a = 0; a < A; ++a)
      for (const auto& e : m.successors(s, a)) M(e.next, s) -= m.gamma() * rep.induced(s, a) * e.p;
  rep.occupancy = M.partialPivLu().solve(state_marginal(rho));
  rep.occupancy_deviation = (rep.state_mass - rep.occupancy).cwiseAbs().maxCoeff();
  return rep;
}

}  // namespace lbmdp
