#pragma once

#include <string>

#include "lbmdp/mdp.hpp"

namespace lbmdp {

// model plus the barrier data that travels with it in the file format
struct MdpInstance {
  Mdp<double> mdp;
  Table<double> rho;      // S x A
  Table<double> weights;  // (S*A) x A

  explicit MdpInstance(Mdp<double> m)
      : mdp(std::move(m)),
        rho(uniform_rho<double>(mdp.num_states(), mdp.num_actions())),
        weights(unit_weights<double>(mdp.num_states(), mdp.num_actions())) {}
  MdpInstance(Mdp<double> m, Table<double> rho, Table<double> w)
      : mdp(std::move(m)), rho(std::move(rho)), weights(std::move(w)) {}
};

std::string dump_instance(const MdpInstance& inst);
MdpInstance parse_instance(const std::string& text);

void save(const MdpInstance& inst, const std::string& path);
MdpInstance load(const std::string& path);

// row-stochastic matrix as nested arrays; shape and stochasticity are checked
PolicyStoch<double> parse_policy(const std::string& text, Index S, Index A);
PolicyStoch<double> load_policy(const std::string& path, Index S, Index A);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace lbmdp
