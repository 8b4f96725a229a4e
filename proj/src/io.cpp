#include "lbmdp/io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace lbmdp {

using nlohmann::json;

namespace {

// table with `outer` groups of `inner` rows -> [outer][inner][cols]
json nest3(const Table<double>& t, Index outer, Index inner) {
  json out = json::array();
  for (Index i = 0; i < outer; ++i) {
    json mid = json::array();
    for (Index j = 0; j < inner; ++j) {
      json row = json::array();
      for (Index k = 0; k < t.cols(); ++k) row.push_back(t(i * inner + j, k));
      mid.push_back(std::move(row));
    }
    out.push_back(std::move(mid));
  }
  return out;
}

json nest2(const Table<double>& t) {
  json out = json::array();
  for (Index i = 0; i < t.rows(); ++i) {
    json row = json::array();
    for (Index k = 0; k < t.cols(); ++k) row.push_back(t(i, k));
    out.push_back(std::move(row));
  }
  return out;
}

const json& array_of(const json& j, size_t n, const std::string& where) {
  if (!j.is_array() || j.size() != n)
    throw ParseError(where + ": expected array of length " + std::to_string(n));
  return j;
}

double number_at(const json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where + ": expected number");
  return j.get<double>();
}

Table<double> read3(const json& j, Index d0, Index d1, Index d2, const std::string& key) {
  Table<double> t(d0 * d1, d2);
  array_of(j, d0, key);
  for (Index i = 0; i < d0; ++i) {
    std::string wi = key + "[" + std::to_string(i) + "]";
    array_of(j[i], d1, wi);
    for (Index k = 0; k < d1; ++k) {
      std::string wk = wi + "[" + std::to_string(k) + "]";
      array_of(j[i][k], d2, wk);
      for (Index l = 0; l < d2; ++l) t(i * d1 + k, l) = number_at(j[i][k][l], wk + "[" + std::to_string(l) + "]");
    }
  }
  return t;
}

Table<double> read2(const json& j, Index d0, Index d1, const std::string& key) {
  Table<double> t(d0, d1);
  array_of(j, d0, key);
  for (Index i = 0; i < d0; ++i) {
    std::string wi = key + "[" + std::to_string(i) + "]";
    array_of(j[i], d1, wi);
    for (Index k = 0; k < d1; ++k) t(i, k) = number_at(j[i][k], wi + "[" + std::to_string(k) + "]");
  }
  return t;
}

const json& key_of(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing key '") + key + "'");
  return *it;
}

}  // namespace

std::string dump_instance(const MdpInstance& inst) {
  const auto& m = inst.mdp;
  const Index S = m.num_states(), A = m.num_actions();
  json j;
  j["num_states"] = S;
  j["num_actions"] = A;
  j["gamma"] = m.gamma();
  j["transition"] = nest3(m.transition(), S, A);
  j["reward"] = nest3(m.reward(), S, A);
  j["rho"] = nest2(inst.rho);
  j["weights"] = nest3(inst.weights, S, A);
  return j.dump() + "\n";
}

MdpInstance parse_instance(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("top level must be an object");
  const json& js = key_of(j, "num_states");
  const json& ja = key_of(j, "num_actions");
  if (!js.is_number_integer() || js.get<long long>() <= 0) throw ParseError("num_states: expected positive integer");
  if (!ja.is_number_integer() || ja.get<long long>() <= 0) throw ParseError("num_actions: expected positive integer");
  const Index S = js.get<Index>(), A = ja.get<Index>();
  double gamma = number_at(key_of(j, "gamma"), "gamma");
  Table<double> P = read3(key_of(j, "transition"), S, A, S, "transition");
  Table<double> R = read3(key_of(j, "reward"), S, A, S, "reward");
  Mdp<double> m(S, A, gamma, std::move(P), std::move(R));
  Table<double> rho = j.contains("rho") ? read2(j["rho"], S, A, "rho") : uniform_rho<double>(S, A);
  Table<double> w = j.contains("weights") ? read3(j["weights"], S, A, A, "weights") : unit_weights<double>(S, A);
  return MdpInstance(std::move(m), std::move(rho), std::move(w));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void save(const MdpInstance& inst, const std::string& path) { write_file(path, dump_instance(inst)); }

MdpInstance load(const std::string& path) { return parse_instance(read_file(path)); }

PolicyStoch<double> parse_policy(const std::string& text, Index S, Index A) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  PolicyStoch<double> pi = read2(j, S, A, "policy");
  try {
    check_policy(pi, S, A);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  return pi;
}

PolicyStoch<double> load_policy(const std::string& path, Index S, Index A) {
  return parse_policy(read_file(path), S, A);
}

}  // namespace lbmdp
