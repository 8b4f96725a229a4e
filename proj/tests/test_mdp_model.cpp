#include "doctest.h"
#include "oracles.hpp"

using namespace lbmdp;

TEST_SUITE("mdp_model") {

TEST_CASE("validate") {
  auto ok = ref::one_cell(1.0, 0.5);
  CHECK(validate(ok).empty());

  Mdp<double> short_row(1, 1, 0.5, Table<double>::Constant(1, 1, 0.9), Table<double>::Constant(1, 1, 1.0));
  auto v = validate(short_row);
  REQUIRE(v.size() == 1);
  CHECK(v[0].find("row sum") != std::string::npos);
  CHECK(v[0].find("(0,0)") != std::string::npos);

  Mdp<double> undiscounted(1, 1, 1.0, Table<double>::Constant(1, 1, 1.0), Table<double>::Constant(1, 1, 1.0));
  v = validate(undiscounted);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == "gamma must be < 1");

  CHECK_THROWS_AS(Mdp<double>(2, 1, 0.5, Table<double>::Ones(1, 2), Table<double>::Ones(2, 2)), std::invalid_argument);
}

TEST_CASE("expected reward") {
  CHECK(expected_reward(ref::one_cell(1.0, 0.5))(0, 0) == 1.0);
  auto two = ref::two_successor();
  CHECK(expected_reward(two)(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  auto m = ref::random(11, 3, 2);
  CHECK((expected_reward(m) - ref::R(m)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("bellman T") {
  auto m = ref::one_cell(1.0, 0.5);
  CHECK(bellman_T(m, QTable<double>::Zero(1, 1))(0, 0) == 1.0);
  CHECK(bellman_T(m, QTable<double>::Constant(1, 1, 2.0))(0, 0) == 2.0);
  auto r = ref::random(3, 4, 3);
  CHECK((bellman_T(r, QTable<double>::Zero(4, 3)) - ref::R(r)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bellman F") {
  auto m = ref::one_cell(1.0, 0.5);
  CHECK(bellman_F(m, QTable<double>::Constant(1, 1, 2.0))(0, 0) == 2.0);
  auto r = ref::random(5, 3, 2);
  Uniform01 u(99);
  QTable<double> q = ref::interior_point(r, u);
  CHECK((bellman_F(r, q) - ref::F(r, q)).cwiseAbs().maxCoeff() <= 1e-12);
}

// The max over a' of F equals T only when all successors share a next action:
// deterministic rows or a single action.  On stochastic rows max F <= T.
TEST_CASE("max over a' of F against T") {
  Uniform01 u(7);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RandomMdpSpec sp{4, 3, seed, 1.0, 0.0, 0.9};
    auto det = random_deterministic_mdp(sp);
    auto sto = random_mdp(sp);
    QTable<double> q = ref::interior_point(sto, u);
    auto fd = bellman_F(det, q);
    auto td = bellman_T(det, q);
    auto fs = bellman_F(sto, q);
    auto ts = bellman_T(sto, q);
    for (Index s = 0; s < 4; ++s)
      for (Index a = 0; a < 3; ++a) {
        CHECK(fd.row(s * 3 + a).maxCoeff() == doctest::Approx(td(s, a)).epsilon(1e-14));
        CHECK(fs.row(s * 3 + a).maxCoeff() <= ts(s, a) + 1e-12);
      }
  }
  auto single = ref::random(4, 5, 1);
  QTable<double> q = QTable<double>::Constant(5, 1, 3.0);
  CHECK((bellman_F(single, q) - bellman_T(single, q)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bellman T pi") {
  auto m = ref::one_cell(1.0, 0.5);
  QTable<double> q = QTable<double>::Constant(1, 1, 3.0);
  CHECK(bellman_T_pi(m, one_hot(PolicyDet{0}, 1), q)(0, 0) == bellman_T(m, q)(0, 0));

  auto r = ref::random(21, 4, 3);
  Uniform01 u(5);
  QTable<double> x = ref::interior_point(r, u);
  auto greedy = one_hot(greedy_policy(x), 3);
  CHECK((bellman_T_pi(r, greedy, x) - bellman_T(r, x)).cwiseAbs().maxCoeff() <= 1e-12);
  auto uni = uniform_policy(4, 3);
  CHECK((bellman_T_pi(r, uni, x) - ref::Tpi(r, uni, x)).cwiseAbs().maxCoeff() <= 1e-12);

  PolicyStoch<double> bad = uni;
  bad(0, 0) = 0.5;
  CHECK_THROWS_AS(bellman_T_pi(r, bad, x), std::invalid_argument);
}

TEST_CASE("contraction and monotonicity") {
  Uniform01 u(1234);
  for (int k = 0; k < 120; ++k) {
    auto m = ref::random(1000 + k, 1 + k % 6, 1 + k % 4, 0.3 + 0.6 * u());
    const Index S = m.num_states(), A = m.num_actions();
    QTable<double> a(S, A), b(S, A);
    for (Index i = 0; i < a.size(); ++i) {
      a.data()[i] = 20 * u() - 10;
      b.data()[i] = 20 * u() - 10;
    }
    double d = (a - b).cwiseAbs().maxCoeff();
    CHECK((bellman_T(m, a) - bellman_T(m, b)).cwiseAbs().maxCoeff() <= m.gamma() * d + 1e-12);
    auto pi = uniform_policy(S, A);
    CHECK((bellman_T_pi(m, pi, a) - bellman_T_pi(m, pi, b)).cwiseAbs().maxCoeff() <= m.gamma() * d + 1e-12);

    QTable<double> hi = a.cwiseMax(b);
    CHECK(((bellman_T(m, hi) - bellman_T(m, a)).array() >= -1e-12).all());
  }
}

TEST_CASE("policies and distributions") {
  QTable<double> q(2, 2);
  q << 1.0, 2.0, 2.0, 2.0;
  CHECK(greedy_policy(q) == PolicyDet{1, 0});
  CHECK_THROWS_AS(one_hot(PolicyDet{2}, 2), std::invalid_argument);
  CHECK_NOTHROW(check_rho(uniform_rho(3, 2), 3, 2));
  Table<double> bad = uniform_rho(3, 2);
  bad(0, 0) = 0;
  CHECK_THROWS_AS(check_rho(bad, 3, 2), std::invalid_argument);
  CHECK_THROWS_AS(check_weights(Table<double>(Table<double>::Zero(6, 2)), 6, 2), std::invalid_argument);
}

TEST_CASE("long double instantiation") {
  using L = long double;
  Mdp<L> m(1, 1, 0.5L, Table<L>::Constant(1, 1, 1.0L), Table<L>::Constant(1, 1, 1.0L));
  CHECK(validate(m).empty());
  CHECK(bellman_T(m, QTable<L>::Constant(1, 1, 2.0L))(0, 0) == 2.0L);
}

}
