#include "lbmdp/environments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lbmdp {

void GridSpec::check() const {
  if (size <= 0) throw std::invalid_argument("grid size must be positive");
  const int n = size * size;
  if (goal < 0 || goal >= n) throw std::invalid_argument("goal cell out of range");
  for (int h : holes) {
    if (h < 0 || h >= n) throw std::invalid_argument("hole cell out of range");
    if (h == goal) throw std::invalid_argument("goal cannot be a hole");
  }
  if (!(slip >= 0 && slip <= 1)) throw std::invalid_argument("slip must lie in [0,1]");
  if (!(gamma >= 0 && gamma < 1)) throw std::invalid_argument("gamma must lie in [0,1)");
}

Mdp<double> frozen_lake(const GridSpec& spec) {
  spec.check();
  const int n = spec.size, S = n * n, A = 4;
  std::vector<char> hole(S, 0);
  for (int h : spec.holes) hole[h] = 1;
  auto terminal = [&](int c) { return hole[c] || c == spec.goal; };
  auto move = [&](int c, int a) {
    int r = c / n, col = c % n;
    switch (a) {
      case 0: r -= 1; break;
      case 1: col += 1; break;
      case 2: r += 1; break;
      default: col -= 1; break;
    }
    if (r < 0 || r >= n || col < 0 || col >= n) return c;  // bounce
    return r * n + col;
  };
  auto entry_reward = [&](int c) {
    if (c == spec.goal) return spec.goal_reward;
    if (hole[c]) return spec.hole_reward;
    return spec.step_reward;
  };

  Table<double> P = Table<double>::Zero(S * A, S), R = Table<double>::Zero(S * A, S);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a) {
      const int row = s * A + a;
      if (terminal(s)) {
        P(row, s) = 1.0;
        continue;
      }
      const int dirs[3] = {a, (a + 1) % 4, (a + 3) % 4};
      const double probs[3] = {1.0 - spec.slip, spec.slip / 2, spec.slip / 2};
      for (int k = 0; k < 3; ++k) {
        if (probs[k] == 0.0) continue;
        int s2 = move(s, dirs[k]);
        P(row, s2) += probs[k];
        R(row, s2) = entry_reward(s2);
      }
    }
  return Mdp<double>(S, A, spec.gamma, std::move(P), std::move(R));
}

Mdp<double> chain(int n, double gamma) {
  if (n < 2) throw std::invalid_argument("chain needs n >= 2");
  if (!(gamma >= 0 && gamma < 1)) throw std::invalid_argument("gamma must lie in [0,1)");
  const int A = 2;
  Table<double> P = Table<double>::Zero(n * A, n), R = Table<double>::Zero(n * A, n);
  for (int s = 0; s < n; ++s) {
    P(s * A + 0, s) = 1.0;
    if (s == n - 1) {
      P(s * A + 1, s) = 1.0;
    } else {
      P(s * A + 1, s + 1) = 1.0;
      if (s + 1 == n - 1) R(s * A + 1, s + 1) = 1.0;
    }
  }
  return Mdp<double>(n, A, gamma, std::move(P), std::move(R));
}

void RandomMdpSpec::check() const {
  if (num_states <= 0 || num_actions <= 0) throw std::invalid_argument("random mdp needs positive sizes");
  if (!(reward_scale > 0)) throw std::invalid_argument("reward_scale must be positive");
  if (!(sparsity >= 0 && sparsity < 1)) throw std::invalid_argument("sparsity must lie in [0,1)");
  if (!(gamma >= 0 && gamma < 1)) throw std::invalid_argument("gamma must lie in [0,1)");
}

namespace {

Table<double> draw_rewards(const RandomMdpSpec& spec, Uniform01& u) {
  const int S = spec.num_states, A = spec.num_actions;
  Table<double> R(S * A, S);
  for (int row = 0; row < S * A; ++row)
    for (int s2 = 0; s2 < S; ++s2) R(row, s2) = spec.reward_scale * (2.0 * u() - 1.0);
  return R;
}

}  // namespace

Mdp<double> random_mdp(const RandomMdpSpec& spec) {
  spec.check();
  const int S = spec.num_states, A = spec.num_actions;
  Uniform01 u(spec.seed);
  Table<double> P(S * A, S);
  std::vector<double> wt(S);
  std::vector<char> keep(S);
  for (int row = 0; row < S * A; ++row) {
    bool any = false;
    for (int s2 = 0; s2 < S; ++s2) {
      wt[s2] = std::exp(u());
      keep[s2] = u() >= spec.sparsity;
      any = any || keep[s2];
    }
    if (!any) keep[std::max_element(wt.begin(), wt.end()) - wt.begin()] = 1;
    double tot = 0;
    for (int s2 = 0; s2 < S; ++s2)
      if (keep[s2]) tot += wt[s2];
    for (int s2 = 0; s2 < S; ++s2) P(row, s2) = keep[s2] ? wt[s2] / tot : 0.0;
  }
  Table<double> R = draw_rewards(spec, u);
  return Mdp<double>(S, A, spec.gamma, std::move(P), std::move(R));
}

Mdp<double> random_deterministic_mdp(const RandomMdpSpec& spec) {
  spec.check();
  const int S = spec.num_states, A = spec.num_actions;
  Uniform01 u(spec.seed);
  Table<double> P = Table<double>::Zero(S * A, S);
  for (int row = 0; row < S * A; ++row) {
    int s2 = std::min(S - 1, static_cast<int>(u() * S));
    P(row, s2) = 1.0;
  }
  Table<double> R = draw_rewards(spec, u);
  return Mdp<double>(S, A, spec.gamma, std::move(P), std::move(R));
}

}  // namespace lbmdp
