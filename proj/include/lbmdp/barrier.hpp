#pragma once

#include <cmath>
#include <sstream>

#include "lbmdp/mdp.hpp"

namespace lbmdp {

// eta, w(s,a,a') (DualTensor layout), rho(s,a)
template <typename Scalar>
struct BarrierParams {
  Scalar eta;
  Table<Scalar> weights;
  Table<Scalar> rho;

  void check(Index S, Index A) const {
    if (!(eta > Scalar(0))) throw std::invalid_argument("eta must be positive");
    check_weights(weights, S * A, A);
    check_rho(rho, S, A);
  }
  static BarrierParams standard(Scalar eta, Index S, Index A) {
    return {eta, unit_weights<Scalar>(S, A), uniform_rho<Scalar>(S, A)};
  }
};

// policy-evaluation variant: weights are (s,a)-indexed, shape S x A
template <typename Scalar>
struct PolicyBarrierParams {
  Scalar eta;
  Table<Scalar> weights;
  Table<Scalar> rho;

  void check(Index S, Index A) const {
    if (!(eta > Scalar(0))) throw std::invalid_argument("eta must be positive");
    check_weights(weights, S, A);
    check_rho(rho, S, A);
  }
  static PolicyBarrierParams standard(Scalar eta, Index S, Index A) {
    return {eta, Table<Scalar>::Ones(S, A), uniform_rho<Scalar>(S, A)};
  }
};

struct PracticalLossParams {
  double epsilon = 1e-6;
  double nu = 1e3;
  void check() const {
    if (!(epsilon > 0) || !(nu > 0)) throw std::invalid_argument("epsilon and nu must be positive");
  }
};

template <typename Scalar>
struct DomainCheck {
  bool inside;
  Scalar min_slack;
};

// Q(s,a) - (FQ)(s,a,a'), DualTensor layout
template <typename Scalar>
void slack_into(const Mdp<Scalar>& m, const QTable<Scalar>& q, DualTensor<Scalar>& out) {
  successor_mix(m, q, out);
  const Index A = m.num_actions();
  const Scalar* R = m.expected_reward().data();
  const Scalar g = m.gamma();
  for (Index i = 0; i < m.num_pairs(); ++i) {
    Scalar* o = out.data() + i * A;
    const Scalar base = q.data()[i] - R[i];
    for (Index j = 0; j < A; ++j) o[j] = base - g * o[j];
  }
}

template <typename Scalar>
DualTensor<Scalar> slack_tensor(const Mdp<Scalar>& m, const std::type_identity_t<QTable<Scalar>>& q) {
  DualTensor<Scalar> out;
  slack_into(m, q, out);
  return out;
}

// Q(s,a) - (T^pi Q)(s,a), one column
template <typename Scalar>
DualTensor<Scalar> slack_pi(const Mdp<Scalar>& m, const PolicyStoch<Scalar>& pi, const std::type_identity_t<QTable<Scalar>>& q) {
  QTable<Scalar> d = q - bellman_T_pi(m, pi, q);
  return Eigen::Map<const DualTensor<Scalar>>(d.data(), d.size(), 1);
}

template <typename Scalar>
DomainCheck<Scalar> in_domain(const Mdp<Scalar>& m, const std::type_identity_t<QTable<Scalar>>& q) {
  Scalar ms = slack_tensor(m, q).minCoeff();
  return {ms > Scalar(0), ms};
}

namespace detail {

// first non-positive slack in lexicographic order -> DomainError
template <typename Scalar>
void require_interior(const DualTensor<Scalar>& slack, Index A) {
  for (Index i = 0; i < slack.rows(); ++i)
    for (Index j = 0; j < slack.cols(); ++j)
      if (!(slack(i, j) > Scalar(0))) {
        Index s = i / A, a = i % A, a2 = slack.cols() == 1 ? -1 : j;
        std::ostringstream os;
        os << "outside domain at (" << s << "," << a;
        if (a2 >= 0) os << "," << a2;
        os << "): slack " << static_cast<double>(slack(i, j));
        throw DomainError(os.str(), s, a, a2, static_cast<double>(slack(i, j)));
      }
}

// rho^T Q + eta sum w (-ln slack)
template <typename Scalar>
Scalar barrier_value(const QTable<Scalar>& q, const DualTensor<Scalar>& slack, Scalar eta, const Table<Scalar>& w,
                     const Table<Scalar>& rho) {
  using std::log;
  Scalar lin(0);
  for (Index s = 0; s < q.rows(); ++s)
    for (Index a = 0; a < q.cols(); ++a) lin += rho(s, a) * q(s, a);
  Scalar bar(0);
  for (Index i = 0; i < slack.rows(); ++i)
    for (Index j = 0; j < slack.cols(); ++j) bar -= w(i, j) * log(slack(i, j));
  return lin + eta * bar;
}

template <int N, typename Scalar>
void scatter_grad(const Mdp<Scalar>& m, const Scalar* l, Scalar* gp) {
  const Index A = N > 0 ? N : m.num_actions();
  Index i = 0;
  for (Index s = 0; s < m.num_states(); ++s)
    for (Index a = 0; a < A; ++a, ++i, l += A) {
      Scalar tot(0);
      for (Index j = 0; j < A; ++j) tot += l[j];
      gp[i] -= tot;
      for (const auto& e : m.successors(s, a)) {
        Scalar* row = gp + e.next * A;
        const Scalar c = m.gamma() * e.p;
        for (Index j = 0; j < A; ++j) row[j] += c * l[j];
      }
    }
}

// grad = rho - sum_{s,a,a'} lam(s,a,a') v_{s,a,a'},  v = e_{s,a} - gamma sum_s' P e_{s',a'}
template <typename Scalar>
void grad_into(const Mdp<Scalar>& m, const DualTensor<Scalar>& lam, const Table<Scalar>& rho, QTable<Scalar>& g) {
  g = rho;
  switch (m.num_actions()) {
    case 1: return scatter_grad<1>(m, lam.data(), g.data());
    case 2: return scatter_grad<2>(m, lam.data(), g.data());
    case 3: return scatter_grad<3>(m, lam.data(), g.data());
    case 4: return scatter_grad<4>(m, lam.data(), g.data());
    default: return scatter_grad<0>(m, lam.data(), g.data());
  }
}

template <typename Scalar>
QTable<Scalar> grad_from_lambda(const Mdp<Scalar>& m, const DualTensor<Scalar>& lam, const Table<Scalar>& rho) {
  QTable<Scalar> g;
  grad_into(m, lam, rho, g);
  return g;
}

template <typename Scalar>
QTable<Scalar> grad_pi_from_lambda(const Mdp<Scalar>& m, const PolicyStoch<Scalar>& pi, const DualTensor<Scalar>& lam,
                                   const Table<Scalar>& rho) {
  const Index A = m.num_actions();
  QTable<Scalar> g = rho;
  for (Index s = 0; s < m.num_states(); ++s)
    for (Index a = 0; a < A; ++a) {
      Scalar l = lam(s * A + a, 0);
      g(s, a) -= l;
      for (const auto& e : m.successors(s, a)) g.row(e.next) += (m.gamma() * e.p * l) * pi.row(e.next);
    }
  return g;
}

}  // namespace detail

template <typename Scalar>
Scalar f_eta(const Mdp<Scalar>& m, const std::type_identity_t<QTable<Scalar>>& q, const BarrierParams<Scalar>& p) {
  p.check(m.num_states(), m.num_actions());
  DualTensor<Scalar> sl = slack_tensor(m, q);
  detail::require_interior(sl, m.num_actions());
  return detail::barrier_value(q, sl, p.eta, p.weights, p.rho);
}

template <typename Scalar>
DualTensor<Scalar> lambda_eta(const Mdp<Scalar>& m, const std::type_identity_t<QTable<Scalar>>& q, const BarrierParams<Scalar>& p) {
  p.check(m.num_states(), m.num_actions());
  DualTensor<Scalar> sl = slack_tensor(m, q);
  detail::require_interior(sl, m.num_actions());
  return (p.eta * p.weights.array() / sl.array()).matrix();
}

template <typename Scalar>
QTable<Scalar> grad_f_eta(const Mdp<Scalar>& m, const std::type_identity_t<QTable<Scalar>>& q, const BarrierParams<Scalar>& p) {
  return detail::grad_from_lambda(m, lambda_eta(m, q, p), p.rho);
}

// eta sum w/slack^2 v v^T over flattened (s,a)
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> hessian_f_eta(const Mdp<Scalar>& m, const std::type_identity_t<QTable<Scalar>>& q,
                                                                    const BarrierParams<Scalar>& p) {
  p.check(m.num_states(), m.num_actions());
  const Index A = m.num_actions(), n = m.num_pairs();
  DualTensor<Scalar> sl = slack_tensor(m, q);
  detail::require_interior(sl, A);
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> H = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  Vec<Scalar> v(n);
  for (Index s = 0; s < m.num_states(); ++s)
    for (Index a = 0; a < A; ++a)
      for (Index a2 = 0; a2 < A; ++a2) {
        v.setZero();
        v(s * A + a) += Scalar(1);
        for (const auto& e : m.successors(s, a)) v(e.next * A + a2) -= m.gamma() * e.p;
        Scalar c = p.eta * p.weights(s * A + a, a2) / (sl(s * A + a, a2) * sl(s * A + a, a2));
        H.noalias() += c * v * v.transpose();
      }
  return H;
}

template <typename Scalar>
Scalar f_eta_pi(const Mdp<Scalar>& m, const PolicyStoch<Scalar>& pi, const std::type_identity_t<QTable<Scalar>>& q,
                const PolicyBarrierParams<Scalar>& p) {
  p.check(m.num_states(), m.num_actions());
  DualTensor<Scalar> sl = slack_pi(m, pi, q);
  detail::require_interior(sl, m.num_actions());
  Table<Scalar> w = Eigen::Map<const Table<Scalar>>(p.weights.data(), m.num_pairs(), 1);
  return detail::barrier_value(q, sl, p.eta, w, p.rho);
}

// lam(s,a) = eta w(s,a) / (Q - T^pi Q)(s,a), one column
template <typename Scalar>
DualTensor<Scalar> lambda_eta_pi(const Mdp<Scalar>& m, const PolicyStoch<Scalar>& pi, const std::type_identity_t<QTable<Scalar>>& q,
                                 const PolicyBarrierParams<Scalar>& p) {
  p.check(m.num_states(), m.num_actions());
  DualTensor<Scalar> sl = slack_pi(m, pi, q);
  detail::require_interior(sl, m.num_actions());
  Table<Scalar> w = Eigen::Map<const Table<Scalar>>(p.weights.data(), m.num_pairs(), 1);
  return (p.eta * w.array() / sl.array()).matrix();
}

template <typename Scalar>
QTable<Scalar> grad_f_eta_pi(const Mdp<Scalar>& m, const PolicyStoch<Scalar>& pi, const std::type_identity_t<QTable<Scalar>>& q,
                             const PolicyBarrierParams<Scalar>& p) {
  return detail::grad_pi_from_lambda(m, pi, lambda_eta_pi(m, pi, q, p), p.rho);
}

// Jensen upper surrogate: barrier moved inside the transition expectation
template <typename Scalar>
Scalar surrogate_g_eta(const Mdp<Scalar>& m, const std::type_identity_t<QTable<Scalar>>& q, const BarrierParams<Scalar>& p) {
  using std::log;
  p.check(m.num_states(), m.num_actions());
  const Index A = m.num_actions();
  Scalar lin(0);
  for (Index s = 0; s < m.num_states(); ++s)
    for (Index a = 0; a < A; ++a) lin += p.rho(s, a) * q(s, a);
  Scalar bar(0);
  for (Index s = 0; s < m.num_states(); ++s)
    for (Index a = 0; a < A; ++a)
      for (const auto& e : m.successors(s, a))
        for (Index a2 = 0; a2 < A; ++a2) {
          Scalar x = q(s, a) - e.r - m.gamma() * q(e.next, a2);
          if (!(x > Scalar(0))) {
            std::ostringstream os;
            os << "surrogate outside domain at (" << s << "," << a << ") -> (" << e.next << "," << a2
               << "): gap " << static_cast<double>(x);
            throw DomainError(os.str(), s, a, a2, static_cast<double>(x));
          }
          bar -= e.p * p.weights(s * A + a, a2) * log(x);
        }
  return lin + p.eta * bar;
}

// h(x) = -ln(eps - x) for x < 0, nu x otherwise.  Jumps at 0.
template <typename Scalar>
Scalar practical_h(Scalar x, const PracticalLossParams& p) {
  using std::log;
  if (x < Scalar(0)) return -log(Scalar(p.epsilon) - x);
  return Scalar(p.nu) * x;
}

// Tabular analogue of the deep loss: rho^T Q + eta sum P w h(r + gamma Q(s',a') - Q(s,a)).
// Not used by the solver.
template <typename Scalar>
Scalar practical_loss(const Mdp<Scalar>& m, const std::type_identity_t<QTable<Scalar>>& q, const BarrierParams<Scalar>& p,
                      const PracticalLossParams& hp) {
  p.check(m.num_states(), m.num_actions());
  hp.check();
  const Index A = m.num_actions();
  Scalar lin(0);
  for (Index s = 0; s < m.num_states(); ++s)
    for (Index a = 0; a < A; ++a) lin += p.rho(s, a) * q(s, a);
  Scalar bar(0);
  for (Index s = 0; s < m.num_states(); ++s)
    for (Index a = 0; a < A; ++a)
      for (const auto& e : m.successors(s, a))
        for (Index a2 = 0; a2 < A; ++a2)
          bar += e.p * p.weights(s * A + a, a2) * practical_h(e.r + m.gamma() * q(e.next, a2) - q(s, a), hp);
  return lin + p.eta * bar;
}

}  // namespace lbmdp
