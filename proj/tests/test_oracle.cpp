#include <cmath>

#include "doctest.h"
#include "lbmdp/oracle.hpp"
#include "lbmdp/solver.hpp"
#include "oracles.hpp"

using namespace lbmdp;

namespace {

// s0 -> s1 with reward 0, s1 absorbing paying 1 per step
Mdp<double> two_state_chain() {
  Table<double> P(2, 2), R(2, 2);
  P << 0, 1, 0, 1;
  R << 0, 0, 0, 1;
  return Mdp<double>(2, 1, 0.5, P, R);
}

// discounted return of a deterministic rollout, truncated after `horizon` steps
double rollout(const Mdp<double>& m, Index s, int horizon) {
  double ret = 0, disc = 1;
  for (int t = 0; t < horizon; ++t) {
    Index nxt = 0;
    while (m.P(s, 0, nxt) == 0) ++nxt;
    ret += disc * m.r(s, 0, nxt);
    disc *= m.gamma();
    s = nxt;
  }
  return ret;
}

Index sample(const double* probs, Index n, double u) {
  double c = 0;
  for (Index i = 0; i < n; ++i) {
    c += probs[i];
    if (u < c) return i;
  }
  return n - 1;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("value iteration closed forms") {
  CHECK(value_iteration(ref::one_cell(1.0, 0.5))(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(value_iteration(ref::one_cell(1.0, 0.9))(0, 0) == doctest::Approx(10.0).epsilon(1e-12));
  auto c = two_state_chain();
  auto q = value_iteration(c);
  CHECK(q(1, 0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(q(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rollout(c, 0, 80) == doctest::Approx(q(0, 0)).epsilon(1e-12));
  CHECK(rollout(c, 1, 80) == doctest::Approx(q(1, 0)).epsilon(1e-12));
}

TEST_CASE("value iteration on the frozen stochastic instance") {
  auto q = value_iteration(ref::handcrafted());
  CHECK(q(0, 0) == doctest::Approx(4.8804878048780487805).epsilon(1e-11));
  CHECK(q(0, 1) == doctest::Approx(5.4634146341463414634).epsilon(1e-11));
  CHECK(q(1, 0) == doctest::Approx(3.8036585365853658537).epsilon(1e-11));
  CHECK(q(1, 1) == doctest::Approx(4.6707317073170731707).epsilon(1e-11));
}

TEST_CASE("value iteration residual and budget") {
  auto m = ref::random(17, 6, 3);
  OracleTolerances tol{1e-12, 100000};
  auto q = value_iteration(m, tol);
  CHECK((q - bellman_T(m, q)).cwiseAbs().maxCoeff() <= 1e-12);
  try {
    value_iteration(m, OracleTolerances{1e-12, 3});
    FAIL("expected non-convergence");
  } catch (const NonConvergenceError& e) {
    CHECK(e.residual > 1e-12);
    CHECK(e.iterations == 3);
  }
  CHECK_THROWS_AS(value_iteration(m, OracleTolerances{0.0, 10}), std::invalid_argument);
}

TEST_CASE("policy_q") {
  CHECK(policy_q(ref::one_cell(1.0, 0.5), uniform_policy(1, 1))(0, 0) == doctest::Approx(2.0).epsilon(1e-14));
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto m = ref::random(seed, 5, 3);
    auto qs = value_iteration(m);
    auto qp = policy_q(m, one_hot(greedy_policy(qs), 3));
    double g = m.gamma();
    CHECK((qp - qs).cwiseAbs().maxCoeff() <= 1e-12 * (1 + g) / (1 - g));
  }
  auto m = ref::random(8, 3, 2);
  auto uni = uniform_policy(3, 2);
  CHECK((policy_q(m, uni) - ref::policy_fixed_point(m, uni)).cwiseAbs().maxCoeff() <= 1e-11);
}

TEST_CASE("exact J") {
  CHECK(exact_j(ref::one_cell(1.0, 0.5), uniform_policy(1, 1), Vec<double>::Ones(1)) ==
        doctest::Approx(2.0).epsilon(1e-14));

  auto m = ref::random(31, 4, 3);
  auto qs = value_iteration(m);
  Vec<double> rs = Vec<double>::Constant(4, 0.25);
  double j = exact_j(m, greedy_policy(qs), rs);
  CHECK(j == doctest::Approx(rs.dot(qs.rowwise().maxCoeff())).epsilon(1e-11));
}

TEST_CASE("exact J against Monte Carlo rollouts") {
  auto m = ref::random(41, 3, 2);
  auto pi = uniform_policy(3, 2);
  Vec<double> rs(3);
  rs << 0.5, 0.3, 0.2;
  double j = exact_j(m, pi, rs);

  const double tol = 1e-6;
  const int horizon = static_cast<int>(std::ceil(std::log(tol * (1 - m.gamma()) / m.r_max()) / std::log(m.gamma())));
  Uniform01 u(2024);
  const int n = 100000;
  double sum = 0, sumsq = 0;
  for (int ep = 0; ep < n; ++ep) {
    Index s = sample(rs.data(), 3, u());
    double ret = 0, disc = 1;
    for (int t = 0; t < horizon; ++t) {
      Index a = sample(pi.row(s).data(), 2, u());
      Index s2 = sample(m.transition().row(s * 2 + a).data(), 3, u());
      ret += disc * m.r(s, a, s2);
      disc *= m.gamma();
      s = s2;
    }
    sum += ret;
    sumsq += ret * ret;
  }
  double mean = sum / n, se = std::sqrt((sumsq / n - mean * mean) / n);
  CHECK(std::abs(mean - j) <= 3 * se + tol);
}

TEST_CASE("dual residual") {
  auto m = ref::one_cell(1.0, 0.5);
  CHECK(dual_residual(m, DualTensor<double>::Constant(1, 1, 2.0), Table<double>::Ones(1, 1))(0, 0) == 0.0);

  auto r = ref::random(51, 4, 3);
  Table<double> rho = uniform_rho(4, 3);
  CHECK((dual_residual(r, DualTensor<double>::Zero(12, 3), rho) + rho).cwiseAbs().maxCoeff() == 0.0);

  Uniform01 u(3);
  for (int k = 0; k < 20; ++k) {
    DualTensor<double> l1(12, 3), l2(12, 3);
    for (Index i = 0; i < l1.size(); ++i) {
      l1.data()[i] = 5 * u();
      l2.data()[i] = 5 * u();
    }
    double al = u();
    auto lhs = dual_residual(r, DualTensor<double>(al * l1 + (1 - al) * l2), rho);
    auto rhs = (al * dual_residual(r, l1, rho) + (1 - al) * dual_residual(r, l2, rho)).eval();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

// T-feasible points (TQ <= Q) dominate Q*.  Value iteration started above Q* stays T-feasible.
TEST_CASE("T-feasible points dominate Q*") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto m = ref::random(60 + seed, 5, 3);
    auto qs = value_iteration(m);
    QTable<double> q = feasible_init(m, 1.0);
    for (int k = 0; k < 200; ++k) {
      auto tq = bellman_T(m, q);
      REQUIRE(((tq - q).array() <= 1e-12).all());
      CHECK(((q - qs).array() >= -1e-10).all());
      q = tq;
    }
  }
}

TEST_CASE("occupancy check") {
  auto one = ref::one_cell(1.0, 0.5);
  auto rep1 = occupancy_check(one, DualTensor<double>::Constant(1, 1, 2.0), Table<double>::Ones(1, 1), 1e-12);
  CHECK(rep1.mass_error == 0.0);

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto m = ref::random(70 + seed, 4, 3);
    Uniform01 u(seed);
    PolicyStoch<double> pi(4, 3);
    for (Index i = 0; i < pi.size(); ++i) pi.data()[i] = 0.1 + u();
    for (Index s = 0; s < 4; ++s) pi.row(s) /= pi.row(s).sum();
    Table<double> rho = uniform_rho(4, 3);
    auto lam = ref::feasible_dual(m, pi, rho);
    CHECK((lam.array() >= 0).all());
    CHECK(dual_residual(m, lam, rho).cwiseAbs().maxCoeff() <= 1e-12);
    auto rep = occupancy_check(m, lam, rho, 1e-9);
    CHECK(rep.mass_error <= 1e-9);
    CHECK(rep.occupancy_deviation <= 1e-9);
  }

  auto m = ref::random(80, 3, 2);
  CHECK_THROWS_AS(occupancy_check(m, DualTensor<double>::Zero(6, 2), uniform_rho(3, 2), 1e-6), PreconditionError);
}

TEST_CASE("occupancy at a converged solve") {
  auto m = ref::random(90, 4, 2);
  auto p = BarrierParams<double>::standard(0.01, 4, 2);
  auto rep = solve(m, p);
  REQUIRE(rep.converged());
  auto occ = occupancy_check(m, rep.lambda_tilde, p.rho, 1e-8);
  CHECK(occ.mass_error <= 8 * 1e-8);
}

}
