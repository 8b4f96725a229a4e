#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "lbmdp/barrier.hpp"
#include "lbmdp/environments.hpp"
#include "lbmdp/io.hpp"
#include "lbmdp/oracle.hpp"
#include "lbmdp/solver.hpp"
#include "oracles.hpp"

using namespace lbmdp;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("lbmdp_test_" + name)).string();
}

}  // namespace

TEST_SUITE("environments") {

TEST_CASE("frozen lake") {
  GridSpec one;
  one.size = 1;
  one.holes = {};
  one.goal = 0;
  auto m1 = frozen_lake(one);
  CHECK(validate(m1).empty());
  CHECK(value_iteration(m1).cwiseAbs().maxCoeff() == 0.0);

  GridSpec two;
  two.size = 2;
  two.holes = {};
  two.goal = 3;
  two.slip = 0;
  two.gamma = 0.5;
  auto m2 = frozen_lake(two);
  auto q = value_iteration(m2);
  CHECK(q(1, 2) == doctest::Approx(1.0).epsilon(1e-12));  // state 1, down
  CHECK(q(2, 1) == doctest::Approx(1.0).epsilon(1e-12));  // state 2, right
  CHECK(q(0, 1) == doctest::Approx(0.5).epsilon(1e-12));

  auto m6 = frozen_lake(frozen_lake6_spec());
  CHECK(m6.num_states() == 36);
  CHECK(m6.num_actions() == 4);
  CHECK(validate(m6).empty());
  // intended move 1/3, perpendicular 1/3 each: from cell 8 going right
  CHECK(m6.P(8, 1, 9) == doctest::Approx(1.0 / 3));
  CHECK(m6.P(8, 1, 2) == doctest::Approx(1.0 / 3));
  CHECK(m6.P(8, 1, 14) == doctest::Approx(1.0 / 3));
  // corner bounce: up and left from 0 stay in place
  CHECK(m6.P(0, 3, 0) == doctest::Approx(2.0 / 3));
  // absorbing goal and holes
  CHECK(m6.P(35, 0, 35) == 1.0);
  CHECK(m6.r(35, 0, 35) == 0.0);
  CHECK(m6.P(7, 2, 7) == 1.0);
  // entering the goal pays
  CHECK(m6.r(34, 1, 35) == 1.0);

  GridSpec bad = frozen_lake6_spec();
  bad.holes.push_back(bad.goal);
  CHECK_THROWS_AS(frozen_lake(bad), std::invalid_argument);
  bad = frozen_lake6_spec();
  bad.slip = 1.5;
  CHECK_THROWS_AS(frozen_lake(bad), std::invalid_argument);
}

TEST_CASE("deterministic lake is one-hot and the surrogate is tight") {
  GridSpec g = frozen_lake6_spec();
  g.slip = 0;
  auto m = frozen_lake(g);
  CHECK(validate(m).empty());
  for (Index i = 0; i < m.transition().rows(); ++i) CHECK(m.transition().row(i).maxCoeff() == 1.0);
  auto p = BarrierParams<double>::standard(0.1, 36, 4);
  auto q = feasible_init(m, 1.0);
  CHECK(std::abs(surrogate_g_eta(m, q, p) - f_eta(m, q, p)) <= 1e-12);
}

TEST_CASE("chain") {
  auto c2 = chain(2, 0.5);
  CHECK(validate(c2).empty());
  auto q2 = value_iteration(c2);
  CHECK(q2(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(q2(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  auto q3 = value_iteration(chain(3, 0.9));
  CHECK(q3(0, 1) == doctest::Approx(0.9).epsilon(1e-12));
  for (int n = 2; n < 10; ++n) CHECK(validate(chain(n, 0.95)).empty());
  CHECK_THROWS_AS(chain(1, 0.5), std::invalid_argument);
}

TEST_CASE("random generator") {
  RandomMdpSpec sp{5, 3, 12345, 1.0, 0.0, 0.9};
  auto a = random_mdp(sp), b = random_mdp(sp);
  CHECK(dump_instance(MdpInstance(a)) == dump_instance(MdpInstance(b)));
  CHECK((a.transition().array() > 0).all());
  CHECK(validate(a).empty());
  CHECK_NOTHROW(value_iteration(a));
  CHECK(a.reward().cwiseAbs().maxCoeff() <= 1.0);

  sp.seed = 12346;
  CHECK(dump_instance(MdpInstance(random_mdp(sp))) != dump_instance(MdpInstance(a)));

  // pinned draws: the first uniform of seed 0 and the first transition entry it produces
  Uniform01 u0(0);
  double first = u0();
  CHECK(first == doctest::Approx(static_cast<double>(std::mt19937_64(0)() >> 11) * 0x1.0p-53));

  RandomMdpSpec sparse{8, 2, 9, 2.0, 0.9, 0.8};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    sparse.seed = seed;
    auto m = random_mdp(sparse);
    CHECK(validate(m).empty());
    for (Index i = 0; i < m.transition().rows(); ++i) CHECK(m.transition().row(i).maxCoeff() > 0);
  }
  RandomMdpSpec bad = sp;
  bad.sparsity = 1.0;
  CHECK_THROWS_AS(random_mdp(bad), std::invalid_argument);
  CHECK(validate(random_deterministic_mdp(sp)).empty());
}

TEST_CASE("model files") {
  auto m = ref::random(77, 5, 3);
  Uniform01 u(4);
  Table<double> rho(5, 3), w(15, 3);
  for (Index i = 0; i < rho.size(); ++i) rho.data()[i] = u() + 0.1;
  rho /= rho.sum();
  for (Index i = 0; i < w.size(); ++i) w.data()[i] = u() + 0.5;
  MdpInstance inst(m, rho, w);
  std::string path = tmp_path("roundtrip.mdp.json");
  save(inst, path);
  auto back = load(path);
  CHECK((back.mdp.transition().array() == m.transition().array()).all());
  CHECK((back.mdp.reward().array() == m.reward().array()).all());
  CHECK(back.mdp.gamma() == m.gamma());
  CHECK((back.rho.array() == rho.array()).all());
  CHECK((back.weights.array() == w.array()).all());
  std::remove(path.c_str());

  auto minimal = parse_instance(
      R"({"num_states":1,"num_actions":1,"gamma":0.5,"transition":[[[1.0]]],"reward":[[[1.0]]]})");
  CHECK(minimal.rho(0, 0) == 1.0);
  CHECK(minimal.weights(0, 0) == 1.0);

  auto twostate = parse_instance(
      R"({"num_states":2,"num_actions":1,"gamma":0.5,"transition":[[[0.5,0.5]],[[0,1]]],"reward":[[[0,0]],[[0,0]]]})");
  CHECK(twostate.rho(0, 0) == 0.5);

  auto shortrow = parse_instance(
      R"({"num_states":1,"num_actions":1,"gamma":0.5,"transition":[[[0.9]]],"reward":[[[1.0]]]})");
  CHECK(validate(shortrow.mdp).size() == 1);

  auto message = [](const std::string& text) {
    try {
      parse_instance(text);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message(R"({"num_states":1,"num_actions":1,"transition":[[[1.0]]],"reward":[[[1.0]]]})").find("gamma") !=
        std::string::npos);
  CHECK(message(R"({"num_states":1,"num_actions":1,"gamma":0.5,"transition":[[[1.0, 0.0]]],"reward":[[[1.0]]]})")
            .find("transition[0][0]") != std::string::npos);
  CHECK(message(R"({"num_states":1,"num_actions":1,"gamma":0.5,"transition":[[["x"]]],"reward":[[[1.0]]]})")
            .find("transition[0][0][0]") != std::string::npos);
  CHECK(message("{not json").find("malformed") != std::string::npos);
  CHECK_THROWS_AS(load(tmp_path("does_not_exist.json")), ParseError);

  CHECK(parse_policy("[[0.5,0.5],[1,0]]", 2, 2)(1, 0) == 1.0);
  CHECK_THROWS_AS(parse_policy("[[0.5,0.6],[1,0]]", 2, 2), ParseError);
  CHECK_THROWS_AS(parse_policy("[[1,0]]", 2, 2), ParseError);
}

}
