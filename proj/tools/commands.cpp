#include "commands.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "lbmdp/bounds.hpp"
#include "lbmdp/oracle.hpp"

namespace cli {

using nlohmann::json;
using namespace lbmdp;

Level log_level() {
  const char* v = std::getenv("BARRIER_MDP_LOG");
  if (!v) return Level::info;
  std::string s(v);
  if (s == "quiet") return Level::quiet;
  if (s == "trace") return Level::trace;
  return Level::info;
}

void log(Level at, const std::string& msg) {
  static const Level current = log_level();
  if (static_cast<int>(at) <= static_cast<int>(current)) std::cerr << msg << "\n";
}

std::string shortest(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

int exit_for(Termination t) {
  switch (t) {
    case Termination::grad_tol_met: return ok;
    case Termination::max_iters: return not_converged;
    case Termination::line_search_stalled: return stalled;
  }
  return input_error;
}

namespace {

double to_double(const std::string& s, const std::string& what) {
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("bad number in " + what + ": '" + s + "'");
  return v;
}

long to_long(const std::string& s, const std::string& what) {
  long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("bad integer in " + what + ": '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

void emit(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    write_file(path, text);
  }
}

json table(const Table<double>& t) {
  json out = json::array();
  for (Index i = 0; i < t.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < t.cols(); ++j) row.push_back(t(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

// full dual as [s][a][a'], policy-evaluation dual as [s][a]
json dual(const DualTensor<double>& lam, Index A) {
  const Index S = lam.rows() / A;
  json out = json::array();
  for (Index s = 0; s < S; ++s) {
    json mid = json::array();
    for (Index a = 0; a < A; ++a) {
      if (lam.cols() == 1) {
        mid.push_back(lam(s * A + a, 0));
        continue;
      }
      json row = json::array();
      for (Index k = 0; k < lam.cols(); ++k) row.push_back(lam(s * A + a, k));
      mid.push_back(std::move(row));
    }
    out.push_back(std::move(mid));
  }
  return out;
}

json report_json(const SolverReport<double>& rep, double eta, Index A) {
  json j;
  j["eta"] = eta;
  j["termination"] = to_string(rep.termination);
  j["iterations"] = rep.iterations;
  j["final_grad_norm"] = rep.final_grad_norm;
  j["f_initial"] = rep.f_initial;
  j["f_final"] = rep.f_final;
  j["max_decrement"] = rep.max_decrement;
  j["min_slack_seen"] = rep.min_slack_seen;
  j["q_tilde"] = table(rep.q_tilde);
  j["lambda_tilde"] = dual(rep.lambda_tilde, A);
  json h = json::array();
  for (const auto& r : rep.history)
    h.push_back({{"iteration", r.iteration},
                 {"f_value", r.f_value},
                 {"grad_inf_norm", r.grad_inf_norm},
                 {"min_slack", r.min_slack},
                 {"step", r.step}});
  j["history"] = std::move(h);
  return j;
}

json cert_json(const BoundCertificate& c) {
  return {{"name", c.name},       {"lower", c.lower},       {"value", c.value},
          {"upper", c.upper},     {"lower_ok", c.lower_ok}, {"upper_ok", c.upper_ok},
          {"slack_tolerance", c.slack_tolerance},          {"note", c.note}};
}

MdpInstance load_valid(const std::string& path) {
  MdpInstance inst = load(path);
  auto v = validate(inst.mdp);
  if (!v.empty()) throw std::invalid_argument("invalid model '" + path + "': " + v.front());
  check_rho(inst.rho, inst.mdp.num_states(), inst.mdp.num_actions());
  check_weights(inst.weights, inst.mdp.num_pairs(), inst.mdp.num_actions());
  return inst;
}

SolverOptions options(double tol, long max_iters, const std::string& step, double margin, bool history) {
  SolverOptions o;
  o.grad_tol = tol;
  o.max_iters = max_iters;
  o.step = parse_step(step);
  o.init_margin = margin;
  o.record_history = history;
  o.check();
  return o;
}

// (s,a)-indexed weights for the policy-evaluation problem: sum of the file's w(s,a,.)
Table<double> pair_weights(const MdpInstance& inst) {
  Table<double> w = inst.weights.rowwise().sum();
  return Eigen::Map<const Table<double>>(w.data(), inst.mdp.num_states(), inst.mdp.num_actions());
}

template <typename F>
int guarded(F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    log(Level::quiet, std::string("error: ") + e.what());
    return input_error;
  }
}

}  // namespace

StepMode parse_step(const std::string& text) {
  if (text == "backtracking") return Backtracking{};
  const std::string pre = "constant:";
  if (text.rfind(pre, 0) == 0) {
    double a = to_double(text.substr(pre.size()), "--step");
    if (!(a > 0)) throw std::invalid_argument("--step constant needs a positive step");
    return ConstantStep{a};
  }
  throw std::invalid_argument("--step must be 'backtracking' or 'constant:<alpha>'");
}

std::vector<double> parse_etas(const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split(text, ',')) out.push_back(to_double(s, "--etas"));
  if (out.empty()) throw std::invalid_argument("--etas is empty");
  for (double e : out)
    if (!(e > 0)) throw std::invalid_argument("--etas must be positive");
  return out;
}

Mdp<double> make_env(const std::string& spec, double gamma) {
  if (spec == "frozenlake6") {
    GridSpec g = frozen_lake6_spec();
    if (gamma >= 0) g.gamma = gamma;
    return frozen_lake(g);
  }
  if (spec.rfind("chain:", 0) == 0) {
    long n = to_long(spec.substr(6), "chain");
    return chain(static_cast<int>(n), gamma >= 0 ? gamma : 0.9);
  }
  if (spec.rfind("random:", 0) == 0) {
    auto parts = split(spec.substr(7), ',');
    if (parts.size() != 3) throw std::invalid_argument("random env is random:<seed>,<S>,<A>");
    RandomMdpSpec r;
    r.seed = static_cast<std::uint64_t>(to_long(parts[0], "seed"));
    r.num_states = static_cast<int>(to_long(parts[1], "S"));
    r.num_actions = static_cast<int>(to_long(parts[2], "A"));
    if (gamma >= 0) r.gamma = gamma;
    return random_mdp(r);
  }
  throw std::invalid_argument("unknown env '" + spec + "' (frozenlake6 | chain:<n> | random:<seed>,<S>,<A>)");
}

int cmd_solve(const SolveArgs& a) {
  SolverReport<double> rep;
  Index A = 0;
  int rc = guarded([&] {
    auto inst = load_valid(a.mdp);
    auto o = options(a.tol, a.max_iters, a.step, a.margin, a.history);
    BarrierParams<double> p{a.eta, inst.weights, inst.rho};
    p.check(inst.mdp.num_states(), inst.mdp.num_actions());
    A = inst.mdp.num_actions();
    log(Level::info, "solving |S|=" + std::to_string(inst.mdp.num_states()) + " |A|=" + std::to_string(A) +
                         " eta=" + shortest(a.eta));
    rep = solve(inst.mdp, p, o, [&](const HistoryRecord<double>& h, const QTable<double>&) {
      log(Level::trace, "iter " + std::to_string(h.iteration) + " f " + shortest(h.f_value) + " grad " +
                            shortest(h.grad_inf_norm));
    });
    emit(a.out, report_json(rep, a.eta, A).dump(1) + "\n");
    return 0;
  });
  if (rc != 0) return rc;
  log(Level::info, std::string("termination ") + to_string(rep.termination) + " after " +
                       std::to_string(rep.iterations) + " iterations, grad " + shortest(rep.final_grad_norm));
  return exit_for(rep.termination);
}

int cmd_oracle(const OracleArgs& a) {
  return guarded([&] {
    if (a.qstar == !a.policy.empty()) throw std::invalid_argument("give exactly one of --qstar or --policy");
    auto inst = load_valid(a.mdp);
    json j;
    if (a.qstar) {
      auto q = value_iteration(inst.mdp, OracleTolerances{a.tol});
      j["kind"] = "q_star";
      j["vi_tol"] = a.tol;
      j["q"] = table(q);
    } else {
      auto pi = load_policy(a.policy, inst.mdp.num_states(), inst.mdp.num_actions());
      j["kind"] = "q_pi";
      j["q"] = table(policy_q(inst.mdp, pi));
    }
    emit(a.out, j.dump(1) + "\n");
    return 0;
  });
}

int cmd_certify(const SolveArgs& a) {
  return guarded([&] {
    auto inst = load_valid(a.mdp);
    const auto& m = inst.mdp;
    auto o = options(a.tol, a.max_iters, a.step, a.margin, a.history);
    CertifyContext ctx{a.vi_tol, a.tol};
    json certs = json::array();
    SolverReport<double> rep;
    if (a.policy.empty()) {
      BarrierParams<double> p{a.eta, inst.weights, inst.rho};
      rep = solve(m, p, o);
      if (!rep.converged()) {
        emit(a.out, json{{"report", report_json(rep, a.eta, m.num_actions())}, {"certificates", nullptr}}.dump(1) + "\n");
        log(Level::quiet, std::string("solve did not converge: ") + to_string(rep.termination));
        return static_cast<int>(not_converged);
      }
      auto qs = value_iteration(m, OracleTolerances{a.vi_tol});
      for (const auto& c : certify_theorem1(rep, qs, m, p, ctx)) certs.push_back(cert_json(c));
      for (const auto& c : certify_theorem2(rep, m, p, state_marginal(inst.rho), ctx)) certs.push_back(cert_json(c));
    } else {
      auto pi = load_policy(a.policy, m.num_states(), m.num_actions());
      PolicyBarrierParams<double> p{a.eta, pair_weights(inst), inst.rho};
      rep = solve_policy_eval(m, pi, p, o);
      if (!rep.converged()) {
        emit(a.out, json{{"report", report_json(rep, a.eta, m.num_actions())}, {"certificates", nullptr}}.dump(1) + "\n");
        log(Level::quiet, std::string("solve did not converge: ") + to_string(rep.termination));
        return static_cast<int>(not_converged);
      }
      for (const auto& c : certify_policy_eval(rep, policy_q(m, pi), m, pi, p, ctx)) certs.push_back(cert_json(c));
    }
    bool all = true;
    for (const auto& c : certs) {
      bool pass = c["lower_ok"].get<bool>() && c["upper_ok"].get<bool>();
      all = all && pass;
      log(Level::info, (pass ? "PASS " : "FAIL ") + c["name"].get<std::string>() + "  " +
                           shortest(c["lower"].get<double>()) + " <= " + shortest(c["value"].get<double>()) +
                           " <= " + shortest(c["upper"].get<double>()));
    }
    emit(a.out, certs.dump(1) + "\n");
    return static_cast<int>(all ? ok : bound_failed);
  });
}

int cmd_bench(const BenchArgs& a) {
  return guarded([&] {
    auto m = make_env(a.env, -1);
    auto etas = parse_etas(a.etas);
    auto o = options(a.tol, a.max_iters, a.step, a.margin, false);
    o.history_stride = a.stride;
    if (a.stride <= 0) throw std::invalid_argument("--stride must be positive");
    const Index S = m.num_states(), A = m.num_actions();
    auto qs = value_iteration(m);
    BarrierParams<double> base = BarrierParams<double>::standard(1.0, S, A);

    using Rows = std::vector<std::string>;
    auto observer_into = [&](Rows& rows, double eta) {
      return Observer<double>([&rows, &qs, eta](const HistoryRecord<double>& h, const QTable<double>& q) {
        rows.push_back(shortest(eta) + "," + std::to_string(h.iteration) + "," + shortest(h.f_value) + "," +
                       shortest(h.grad_inf_norm) + "," + shortest((q - qs).cwiseAbs().maxCoeff()));
      });
    };

    std::vector<Rows> rows(etas.size());
    std::vector<SolverReport<double>> reps;
    if (a.warm) {
      for (size_t i = 1; i < etas.size(); ++i)
        if (!(etas[i] < etas[i - 1])) throw std::invalid_argument("--warm needs strictly decreasing --etas");
      size_t idx = 0;
      reps = eta_continuation(m, etas, base, o, [&](double eta) { return observer_into(rows[idx++], eta); });
    } else {
      // independent solves; merged back in eta order
      std::vector<std::future<SolverReport<double>>> jobs;
      for (size_t i = 0; i < etas.size(); ++i)
        jobs.push_back(std::async(std::launch::async, [&, i] {
          return solve(m, BarrierParams<double>{etas[i], base.weights, base.rho}, o, observer_into(rows[i], etas[i]));
        }));
      for (auto& j : jobs) reps.push_back(j.get());
    }

    std::string csv = "eta,iteration,f_value,grad_inf_norm,sup_error\n";
    for (const auto& group : rows)
      for (const auto& r : group) csv += r + "\n";
    emit(a.csv, csv);

    int rc = ok;
    for (size_t i = 0; i < reps.size(); ++i) {
      log(Level::info, "eta " + shortest(etas[i]) + ": " + to_string(reps[i].termination) + " after " +
                           std::to_string(reps[i].iterations) + " iterations, sup error " +
                           shortest((reps[i].q_tilde - qs).cwiseAbs().maxCoeff()));
      rc = std::max(rc, exit_for(reps[i].termination));
    }
    return rc;
  });
}

int cmd_gen(const GenArgs& a) {
  return guarded([&] {
    emit(a.out, dump_instance(MdpInstance(make_env(a.env, a.gamma))));
    return 0;
  });
}

}  // namespace cli
