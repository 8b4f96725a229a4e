#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "lbmdp/errors.hpp"

namespace lbmdp {

using Index = Eigen::Index;

// Row-major dense table; every tabular object in the library is one of these.
template <typename Scalar>
using Table = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// |S| x |A|
template <typename Scalar>
using QTable = Table<Scalar>;

// (s,a,a') lives at row s*|A|+a, column a'.  The policy-evaluation dual uses one column.
template <typename Scalar>
using DualTensor = Table<Scalar>;

template <typename Scalar>
using PolicyStoch = Table<Scalar>;

using PolicyDet = std::vector<Index>;

template <typename Scalar>
class Mdp {
 public:
  struct Successor {
    Index next;
    Scalar p;
    Scalar r;
  };

  // transition and reward are (S*A) x S, row s*A+a holds P(.|s,a) and r(s,a,.)
  Mdp(Index num_states, Index num_actions, Scalar gamma, Table<Scalar> transition, Table<Scalar> reward)
      : S_(num_states), A_(num_actions), gamma_(gamma), P_(std::move(transition)), r_(std::move(reward)) {
    if (S_ <= 0 || A_ <= 0) throw std::invalid_argument("Mdp: num_states and num_actions must be positive");
    if (P_.rows() != S_ * A_ || P_.cols() != S_)
      throw std::invalid_argument("Mdp: transition must have shape (S*A) x S");
    if (r_.rows() != S_ * A_ || r_.cols() != S_)
      throw std::invalid_argument("Mdp: reward must have shape (S*A) x S");
    build();
  }

  Index num_states() const { return S_; }
  Index num_actions() const { return A_; }
  Index num_pairs() const { return S_ * A_; }
  Scalar gamma() const { return gamma_; }
  const Table<Scalar>& transition() const { return P_; }
  const Table<Scalar>& reward() const { return r_; }

  Scalar P(Index s, Index a, Index s2) const { return P_(s * A_ + a, s2); }
  Scalar r(Index s, Index a, Index s2) const { return r_(s * A_ + a, s2); }

  // nonzero-probability successors of (s,a), ascending s'.  Skipping exact zeros
  // leaves every canonical-order sum bit-identical to the dense loop.
  std::span<const Successor> successors(Index s, Index a) const {
    Index row = s * A_ + a;
    return {succ_.data() + offset_[row], succ_.data() + offset_[row + 1]};
  }

  // R(s,a) = sum_s' P r
  const QTable<Scalar>& expected_reward() const { return R_; }

  Scalar r_max() const { return r_.cwiseAbs().maxCoeff(); }

 private:
  void build() {
    offset_.assign(S_ * A_ + 1, 0);
    succ_.clear();
    R_.setZero(S_, A_);
    for (Index s = 0; s < S_; ++s)
      for (Index a = 0; a < A_; ++a) {
        Index row = s * A_ + a;
        Scalar acc(0);
        for (Index s2 = 0; s2 < S_; ++s2) {
          Scalar p = P_(row, s2);
          if (p == Scalar(0)) continue;
          succ_.push_back({s2, p, r_(row, s2)});
          acc += p * r_(row, s2);
        }
        R_(s, a) = acc;
        offset_[row + 1] = static_cast<Index>(succ_.size());
      }
  }

  Index S_, A_;
  Scalar gamma_;
  Table<Scalar> P_, r_;
  QTable<Scalar> R_;
  std::vector<Index> offset_;
  std::vector<Successor> succ_;
};

template <typename Scalar>
std::vector<std::string> validate(const Mdp<Scalar>& m) {
  using std::abs;
  using std::isfinite;
  std::vector<std::string> out;
  const Scalar tol = Scalar(1e-12);
  for (Index s = 0; s < m.num_states(); ++s)
    for (Index a = 0; a < m.num_actions(); ++a) {
      Scalar sum(0);
      for (Index s2 = 0; s2 < m.num_states(); ++s2) {
        Scalar p = m.P(s, a, s2);
        if (!isfinite(p) || p < Scalar(0)) {
          std::ostringstream os;
          os << "invalid probability " << static_cast<double>(p) << " at (" << s << "," << a << "," << s2 << ")";
          out.push_back(os.str());
        }
        if (!isfinite(m.r(s, a, s2))) {
          std::ostringstream os;
          os << "non-finite reward at (" << s << "," << a << "," << s2 << ")";
          out.push_back(os.str());
        }
        sum += p;
      }
      if (!(abs(sum - Scalar(1)) <= tol)) {
        std::ostringstream os;
        os << "row sum != 1 at (" << s << "," << a << "): " << static_cast<double>(sum);
        out.push_back(os.str());
      }
    }
  if (!(m.gamma() < Scalar(1))) out.push_back("gamma must be < 1");
  if (!(m.gamma() >= Scalar(0))) out.push_back("gamma must be >= 0");
  return out;
}

template <typename Scalar>
void require_valid(const Mdp<Scalar>& m) {
  auto v = validate(m);
  if (!v.empty()) throw PreconditionError("invalid mdp: " + v.front());
}

template <typename Scalar>
QTable<Scalar> expected_reward(const Mdp<Scalar>& m) {
  return m.expected_reward();
}

// sum_s' P(s'|s,a) v(s')
template <typename Scalar, typename Derived>
Scalar expect_next(const Mdp<Scalar>& m, Index s, Index a, const Eigen::MatrixBase<Derived>& v) {
  Scalar acc(0);
  for (const auto& e : m.successors(s, a)) acc += e.p * v(e.next);
  return acc;
}

template <typename Scalar>
Vec<Scalar> state_max(const QTable<Scalar>& q) {
  return q.rowwise().maxCoeff();
}

template <typename Scalar>
QTable<Scalar> bellman_T(const Mdp<Scalar>& m, const std::type_identity_t<QTable<Scalar>>& q) {
  Vec<Scalar> v = state_max(q);
  QTable<Scalar> out(m.num_states(), m.num_actions());
  const auto& R = m.expected_reward();
  for (Index s = 0; s < m.num_states(); ++s)
    for (Index a = 0; a < m.num_actions(); ++a) out(s, a) = R(s, a) + m.gamma() * expect_next(m, s, a, v);
  return out;
}

namespace detail {

// N > 0: action count known at compile time, accumulators stay in registers
template <int N, typename Scalar>
void mix_rows(const Mdp<Scalar>& m, const Scalar* xp, Scalar* o) {
  const Index A = N > 0 ? N : m.num_actions();
  Scalar acc[N > 0 ? N : 1];
  for (Index s = 0; s < m.num_states(); ++s)
    for (Index a = 0; a < A; ++a, o += A) {
      const auto succ = m.successors(s, a);
      if constexpr (N > 0) {
        for (int j = 0; j < N; ++j) acc[j] = Scalar(0);
        for (const auto& e : succ) {
          const Scalar* row = xp + e.next * N;
          for (int j = 0; j < N; ++j) acc[j] += e.p * row[j];
        }
        for (int j = 0; j < N; ++j) o[j] = acc[j];
      } else {
        for (Index j = 0; j < A; ++j) {
          Scalar t(0);
          for (const auto& e : succ) t += e.p * xp[e.next * A + j];
          o[j] = t;
        }
      }
    }
}

}  // namespace detail

// out row s*A+a = sum_s' P(s'|s,a) x.row(s'); the solver's inner kernel
template <typename Scalar>
void successor_mix(const Mdp<Scalar>& m, const QTable<Scalar>& x, DualTensor<Scalar>& out) {
  out.resize(m.num_pairs(), m.num_actions());
  switch (m.num_actions()) {
    case 1: return detail::mix_rows<1>(m, x.data(), out.data());
    case 2: return detail::mix_rows<2>(m, x.data(), out.data());
    case 3: return detail::mix_rows<3>(m, x.data(), out.data());
    case 4: return detail::mix_rows<4>(m, x.data(), out.data());
    default: return detail::mix_rows<0>(m, x.data(), out.data());
  }
}

// (FQ)(s,a,a') at row s*A+a, column a'
template <typename Scalar>
DualTensor<Scalar> bellman_F(const Mdp<Scalar>& m, const std::type_identity_t<QTable<Scalar>>& q) {
  const Index A = m.num_actions();
  DualTensor<Scalar> out;
  successor_mix(m, q, out);
  const auto& R = m.expected_reward();
  for (Index i = 0; i < m.num_pairs(); ++i)
    for (Index j = 0; j < A; ++j) out(i, j) = R.data()[i] + m.gamma() * out(i, j);
  return out;
}

template <typename Scalar>
void check_policy(const PolicyStoch<Scalar>& pi, Index S, Index A) {
  using std::abs;
  if (pi.rows() != S || pi.cols() != A) throw std::invalid_argument("policy has wrong shape");
  for (Index s = 0; s < S; ++s) {
    Scalar sum(0);
    for (Index a = 0; a < A; ++a) {
      if (!(pi(s, a) >= Scalar(0))) throw std::invalid_argument("policy entry negative at state " + std::to_string(s));
      sum += pi(s, a);
    }
    if (!(abs(sum - Scalar(1)) <= Scalar(1e-12)))
      throw std::invalid_argument("policy row " + std::to_string(s) + " does not sum to 1");
  }
}

template <typename Scalar>
QTable<Scalar> bellman_T_pi(const Mdp<Scalar>& m, const PolicyStoch<Scalar>& pi, const std::type_identity_t<QTable<Scalar>>& q) {
  check_policy(pi, m.num_states(), m.num_actions());
  Vec<Scalar> v = pi.cwiseProduct(q).rowwise().sum();
  QTable<Scalar> out(m.num_states(), m.num_actions());
  const auto& R = m.expected_reward();
  for (Index s = 0; s < m.num_states(); ++s)
    for (Index a = 0; a < m.num_actions(); ++a) out(s, a) = R(s, a) + m.gamma() * expect_next(m, s, a, v);
  return out;
}

// argmax per row, lowest index wins ties
template <typename Scalar>
PolicyDet greedy_policy(const QTable<Scalar>& q) {
  PolicyDet out(q.rows());
  for (Index s = 0; s < q.rows(); ++s) {
    Index best = 0;
    for (Index a = 1; a < q.cols(); ++a)
      if (q(s, a) > q(s, best)) best = a;
    out[s] = best;
  }
  return out;
}

template <typename Scalar = double>
PolicyStoch<Scalar> one_hot(const PolicyDet& pi, Index A) {
  PolicyStoch<Scalar> out = PolicyStoch<Scalar>::Zero(static_cast<Index>(pi.size()), A);
  for (Index s = 0; s < out.rows(); ++s) {
    if (pi[s] < 0 || pi[s] >= A) throw std::invalid_argument("action index out of range at state " + std::to_string(s));
    out(s, pi[s]) = Scalar(1);
  }
  return out;
}

template <typename Scalar = double>
PolicyStoch<Scalar> uniform_policy(Index S, Index A) {
  return PolicyStoch<Scalar>::Constant(S, A, Scalar(1) / Scalar(A));
}

template <typename Scalar = double>
Table<Scalar> uniform_rho(Index S, Index A) {
  return Table<Scalar>::Constant(S, A, Scalar(1) / Scalar(S * A));
}

// w(s,a,a') laid out like DualTensor
template <typename Scalar = double>
Table<Scalar> unit_weights(Index S, Index A) {
  return Table<Scalar>::Ones(S * A, A);
}

template <typename Scalar>
void check_rho(const Table<Scalar>& rho, Index S, Index A) {
  using std::abs;
  if (rho.rows() != S || rho.cols() != A) throw std::invalid_argument("rho has wrong shape");
  if (!(rho.minCoeff() > Scalar(0))) throw std::invalid_argument("rho must be strictly positive");
  if (!(abs(rho.sum() - Scalar(1)) <= Scalar(1e-12))) throw std::invalid_argument("rho must sum to 1");
}

template <typename Scalar>
void check_weights(const Table<Scalar>& w, Index rows, Index cols) {
  if (w.rows() != rows || w.cols() != cols) throw std::invalid_argument("weights have wrong shape");
  if (!(w.minCoeff() > Scalar(0))) throw std::invalid_argument("weights must be strictly positive");
  if (!w.allFinite()) throw std::invalid_argument("weights must be finite");
}

template <typename Scalar>
Vec<Scalar> state_marginal(const Table<Scalar>& rho) {
  return rho.rowwise().sum();
}

}  // namespace lbmdp
