#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lbmdp/mdp.hpp"

namespace lbmdp {

struct GridSpec {
  int size = 6;
  std::vector<int> holes{7, 11, 15, 18, 28, 33};
  int goal = 35;
  double slip = 2.0 / 3.0;  // split evenly over the two perpendicular moves
  double step_reward = 0.0, hole_reward = 0.0, goal_reward = 1.0;
  double gamma = 0.9;

  void check() const;
};

// 6x6 layout used by the benchmark
inline GridSpec frozen_lake6_spec() { return GridSpec{}; }

// actions: 0 up, 1 right, 2 down, 3 left
Mdp<double> frozen_lake(const GridSpec& spec);

// action 0 stays, action 1 advances; entering n-1 pays 1; n-1 absorbing
Mdp<double> chain(int n, double gamma);

struct RandomMdpSpec {
  int num_states = 5, num_actions = 3;
  std::uint64_t seed = 0;
  double reward_scale = 1.0;
  double sparsity = 0.0;
  double gamma = 0.9;

  void check() const;
};

// Draws come from std::mt19937_64 (fixed by the standard) mapped to [0,1) as (x >> 11) * 2^-53.
// Order: for s, a, s': weight uniform then mask uniform; afterwards for s, a, s': reward uniform.
Mdp<double> random_mdp(const RandomMdpSpec& spec);

// every row one-hot on a uniformly drawn successor; same reward draw as random_mdp
Mdp<double> random_deterministic_mdp(const RandomMdpSpec& spec);

class Uniform01 {
 public:
  explicit Uniform01(std::uint64_t seed) : eng_(seed) {}
  double operator()() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace lbmdp
