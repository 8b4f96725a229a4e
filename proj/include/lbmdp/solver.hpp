#pragma once

#include <cmath>
#include <functional>
#include <type_traits>
#include <limits>
#include <variant>
#include <vector>

#include "lbmdp/barrier.hpp"

namespace lbmdp {

struct ConstantStep {
  double alpha = 0.01;
};

struct Backtracking {
  double alpha0 = 1.0;
  double shrink = 0.5;
  double armijo = 1e-4;
};

using StepMode = std::variant<Backtracking, ConstantStep>;

struct SolverOptions {
  double init_margin = 1.0;
  StepMode step = Backtracking{};
  double grad_tol = 1e-8;
  long max_iters = 200'000;
  bool record_history = false;
  long history_stride = 100;  // used when record_history is off

  void check() const {
    if (!(init_margin > 0)) throw std::invalid_argument("init_margin must be positive");
    if (!(grad_tol > 0)) throw std::invalid_argument("grad_tol must be positive");
    if (max_iters <= 0) throw std::invalid_argument("max_iters must be positive");
    if (history_stride <= 0) throw std::invalid_argument("history_stride must be positive");
    if (auto* c = std::get_if<ConstantStep>(&step)) {
      if (!(c->alpha > 0)) throw std::invalid_argument("constant step must be positive");
    } else {
      const auto& b = std::get<Backtracking>(step);
      if (!(b.alpha0 > 0)) throw std::invalid_argument("alpha0 must be positive");
      if (!(b.shrink > 0 && b.shrink < 1)) throw std::invalid_argument("shrink must lie in (0,1)");
      if (!(b.armijo > 0 && b.armijo < 1)) throw std::invalid_argument("armijo must lie in (0,1)");
    }
  }
};

enum class Termination { grad_tol_met, max_iters, line_search_stalled };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::grad_tol_met: return "grad_tol_met";
    case Termination::max_iters: return "max_iters";
    case Termination::line_search_stalled: return "line_search_stalled";
  }
  return "?";
}

template <typename Scalar>
struct HistoryRecord {
  long iteration;
  Scalar f_value;
  Scalar grad_inf_norm;
  Scalar min_slack;
  Scalar step;  // length of the step that produced this iterate (0 at k = 0)
};

template <typename Scalar>
struct SolverReport {
  QTable<Scalar> q_tilde;
  DualTensor<Scalar> lambda_tilde;
  long iterations = 0;
  Termination termination = Termination::max_iters;
  Scalar final_grad_norm = 0;
  std::vector<HistoryRecord<Scalar>> history;

  // run diagnostics
  Scalar f_initial = 0;
  Scalar f_final = 0;
  Scalar max_decrement = 0;   // largest f(Q_{k+1}) - f(Q_k) over accepted steps; <= 0 means monotone
  Scalar min_slack_seen = 0;  // over every accepted iterate
  long rejected_trials = 0;

  bool converged() const { return termination == Termination::grad_tol_met; }
};

template <typename Scalar>
using Observer = std::function<void(const HistoryRecord<Scalar>&, const QTable<Scalar>&)>;

template <typename Scalar>
QTable<Scalar> feasible_init(const Mdp<Scalar>& m, Scalar margin) {
  if (!(margin > Scalar(0))) throw std::invalid_argument("margin must be positive");
  return QTable<Scalar>::Constant(m.num_states(), m.num_actions(), (m.r_max() + margin) / (Scalar(1) - m.gamma()));
}

namespace detail {

template <typename Scalar>
struct FullProblem {
  const Mdp<Scalar>& m;
  const BarrierParams<Scalar>& p;

  void slack(const QTable<Scalar>& q, DualTensor<Scalar>& out) const { slack_into(m, q, out); }

  // linear part of the slack map applied to a displacement
  void slack_delta(const QTable<Scalar>& d, DualTensor<Scalar>& out) const {
    successor_mix(m, d, out);
    const Index A = m.num_actions();
    const Scalar g = m.gamma();
    for (Index i = 0; i < m.num_pairs(); ++i) {
      Scalar* o = out.data() + i * A;
      for (Index j = 0; j < A; ++j) o[j] = d.data()[i] - g * o[j];
    }
  }
  const Table<Scalar>& weights() const { return p.weights; }
  Scalar eta() const { return p.eta; }
  const Table<Scalar>& rho() const { return p.rho; }
  void grad(const DualTensor<Scalar>& lam, QTable<Scalar>& g) const { grad_into(m, lam, p.rho, g); }
};

template <typename Scalar>
struct PolicyProblem {
  const Mdp<Scalar>& m;
  const PolicyStoch<Scalar>& pi;
  const PolicyBarrierParams<Scalar>& p;
  Table<Scalar> w;

  PolicyProblem(const Mdp<Scalar>& m, const PolicyStoch<Scalar>& pi, const PolicyBarrierParams<Scalar>& p)
      : m(m), pi(pi), p(p), w(Eigen::Map<const Table<Scalar>>(p.weights.data(), m.num_pairs(), 1)) {}

  void slack(const QTable<Scalar>& q, DualTensor<Scalar>& out) const { out = slack_pi(m, pi, q); }

  void slack_delta(const QTable<Scalar>& d, DualTensor<Scalar>& out) const {
    const Index A = m.num_actions();
    out.resize(m.num_pairs(), 1);
    Vec<Scalar> v = pi.cwiseProduct(d).rowwise().sum();
    for (Index s = 0; s < m.num_states(); ++s)
      for (Index a = 0; a < A; ++a) out(s * A + a, 0) = d(s, a) - m.gamma() * expect_next(m, s, a, v);
  }
  const Table<Scalar>& weights() const { return w; }
  Scalar eta() const { return p.eta; }
  const Table<Scalar>& rho() const { return p.rho; }
  void grad(const DualTensor<Scalar>& lam, QTable<Scalar>& g) const { g = grad_pi_from_lambda(m, pi, lam, p.rho); }
};

// log(1+x); the truncated series is exact to rounding for |x| < 1e-3 (next term |x|^7/7)
template <typename Scalar>
inline Scalar log1p_small(Scalar x) {
  using std::abs;
  using std::log1p;
  if (abs(x) >= Scalar(1e-3)) return log1p(x);
  return x * (Scalar(1) - x * (Scalar(1) / 2 - x * (Scalar(1) / 3 - x * (Scalar(1) / 4 - x * (Scalar(1) / 5 - x / 6)))));
}

// f(Q + D) - f(Q) evaluated from the displacement, so it stays accurate when the
// change is far below the rounding noise of f itself.  False if Q + D leaves the domain.
template <typename Scalar, typename Problem>
bool decrement(const Problem& pb, const QTable<Scalar>& d, const DualTensor<Scalar>& slack,
               const DualTensor<Scalar>& ds, Scalar& df) {
  const Scalar *wp = pb.weights().data(), *sp = slack.data(), *dp = ds.data();
  Scalar bar(0);
  for (Index i = 0; i < slack.size(); ++i) {
    if (!(sp[i] + dp[i] > Scalar(0))) return false;
    bar += wp[i] * log1p_small(dp[i] / sp[i]);
  }
  const Scalar* rp = pb.rho().data();
  Scalar lin(0);
  for (Index i = 0; i < d.size(); ++i) lin += rp[i] * d.data()[i];
  df = lin - pb.eta() * bar;
  return true;
}

template <typename Scalar, typename Problem>
SolverReport<Scalar> descend(const Problem& pb, QTable<Scalar> q, const SolverOptions& opts,
                             const Observer<Scalar>& observer) {
  opts.check();
  const Index A = q.cols();
  SolverReport<Scalar> rep;

  DualTensor<Scalar> slack;
  pb.slack(q, slack);
  require_interior(slack, A);
  rep.f_initial = barrier_value(q, slack, pb.eta(), pb.weights(), pb.rho());
  rep.max_decrement = -std::numeric_limits<Scalar>::infinity();
  rep.min_slack_seen = slack.minCoeff();

  const bool constant = std::holds_alternative<ConstantStep>(opts.step);
  Scalar t0, shrink, armijo;
  if (constant) {
    t0 = Scalar(std::get<ConstantStep>(opts.step).alpha);
    shrink = Scalar(0.5);
    armijo = Scalar(0);
  } else {
    const auto& b = std::get<Backtracking>(opts.step);
    t0 = Scalar(b.alpha0);
    shrink = Scalar(b.shrink);
    armijo = Scalar(b.armijo);
  }

  DualTensor<Scalar> lam, ds, trial_slack;
  QTable<Scalar> g, d, trial;
  Scalar last_step(0);

  auto record = [&](long k, Scalar gn) {
    HistoryRecord<Scalar> h{k, barrier_value(q, slack, pb.eta(), pb.weights(), pb.rho()), gn, slack.minCoeff(),
                            last_step};
    if (observer) observer(h, q);
    rep.history.push_back(h);
  };

  long k = 0;
  for (;; ++k) {
    lam = (pb.eta() * pb.weights().array() / slack.array()).matrix();
    pb.grad(lam, g);
    Scalar gn = g.cwiseAbs().maxCoeff();
    rep.final_grad_norm = gn;
    if (gn <= Scalar(opts.grad_tol)) {
      rep.termination = Termination::grad_tol_met;
      break;
    }
    if (k >= opts.max_iters) {
      rep.termination = Termination::max_iters;
      break;
    }
    if (opts.record_history || k % opts.history_stride == 0) record(k, gn);

    const Scalar gg = g.squaredNorm();
    Scalar t = t0;
    bool accepted = false;
    while (t >= Scalar(1e-18)) {
      d = -t * g;
      pb.slack_delta(d, ds);
      Scalar df;
      if (decrement(pb, d, slack, ds, df)) {
        if (df <= -armijo * t * gg) {
          trial = q + d;
          pb.slack(trial, trial_slack);
          const Scalar ms = trial_slack.minCoeff();
          if (ms > Scalar(0)) {
            q.swap(trial);
            slack.swap(trial_slack);
            rep.max_decrement = std::max(rep.max_decrement, df);
            rep.min_slack_seen = std::min(rep.min_slack_seen, ms);
            last_step = t;
            accepted = true;
            break;
          }
        }
      }
      ++rep.rejected_trials;
      t *= shrink;
    }
    if (!accepted) {
      rep.termination = Termination::line_search_stalled;
      break;
    }
  }
  rep.iterations = k;
  record(k, rep.final_grad_norm);
  rep.q_tilde = q;
  rep.lambda_tilde = lam;
  rep.f_final = rep.history.back().f_value;
  if (rep.max_decrement == -std::numeric_limits<Scalar>::infinity()) rep.max_decrement = 0;
  return rep;
}

}  // namespace detail

template <typename Scalar>
SolverReport<Scalar> solve_from(const Mdp<Scalar>& m, const BarrierParams<Scalar>& p, const SolverOptions& opts,
                                const std::type_identity_t<QTable<Scalar>>& q0, const std::type_identity_t<Observer<Scalar>>& observer = {}) {
  require_valid(m);
  p.check(m.num_states(), m.num_actions());
  if (q0.rows() != m.num_states() || q0.cols() != m.num_actions())
    throw std::invalid_argument("initial point has wrong shape");
  return detail::descend(detail::FullProblem<Scalar>{m, p}, q0, opts, observer);
}

template <typename Scalar>
SolverReport<Scalar> solve(const Mdp<Scalar>& m, const BarrierParams<Scalar>& p, const SolverOptions& opts = {},
                           const std::type_identity_t<Observer<Scalar>>& observer = {}) {
  opts.check();
  return solve_from(m, p, opts, feasible_init(m, Scalar(opts.init_margin)), observer);
}

template <typename Scalar>
SolverReport<Scalar> solve_policy_eval(const Mdp<Scalar>& m, const PolicyStoch<Scalar>& pi,
                                       const PolicyBarrierParams<Scalar>& p, const SolverOptions& opts = {},
                                       const std::type_identity_t<Observer<Scalar>>& observer = {}) {
  require_valid(m);
  check_policy(pi, m.num_states(), m.num_actions());
  p.check(m.num_states(), m.num_actions());
  opts.check();
  detail::PolicyProblem<Scalar> pb(m, pi, p);
  return detail::descend(pb, feasible_init(m, Scalar(opts.init_margin)), opts, observer);
}

// Warm-started barrier path. base supplies weights and rho; its eta is ignored.
template <typename Scalar>
std::vector<SolverReport<Scalar>> eta_continuation(const Mdp<Scalar>& m, const std::vector<Scalar>& etas,
                                                   const BarrierParams<Scalar>& base, const SolverOptions& opts = {},
                                                   const std::type_identity_t<std::function<Observer<Scalar>(Scalar)>>& observers = {}) {
  if (etas.empty()) throw std::invalid_argument("etas must be non-empty");
  for (size_t i = 0; i < etas.size(); ++i) {
    if (!(etas[i] > Scalar(0))) throw std::invalid_argument("etas must be positive");
    if (i > 0 && !(etas[i] < etas[i - 1])) throw std::invalid_argument("etas must be strictly decreasing");
  }
  opts.check();
  std::vector<SolverReport<Scalar>> out;
  QTable<Scalar> q = feasible_init(m, Scalar(opts.init_margin));
  for (Scalar eta : etas) {
    BarrierParams<Scalar> p{eta, base.weights, base.rho};
    out.push_back(solve_from(m, p, opts, q, observers ? observers(eta) : Observer<Scalar>{}));
    q = out.back().q_tilde;
  }
  return out;
}

}  // namespace lbmdp
