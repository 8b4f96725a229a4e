#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace lbmdp {

// Thrown when a barrier quantity is evaluated outside the strictly feasible set.
// a2 is the next action of the violating triple, or -1 for (s,a)-indexed constraints.
class DomainError : public std::domain_error {
 public:
  DomainError(const std::string& what, Eigen::Index s, Eigen::Index a, Eigen::Index a2, double slack)
      : std::domain_error(what), s(s), a(a), a2(a2), slack(slack) {}
  Eigen::Index s, a, a2;
  double slack;
};

class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, double residual, long iterations)
      : std::runtime_error(what), residual(residual), iterations(iterations) {}
  double residual;
  long iterations;
};

// schema problems while reading model / policy files
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DegenerateStateError : public std::runtime_error {
 public:
  DegenerateStateError(const std::string& what, Eigen::Index state)
      : std::runtime_error(what), state(state) {}
  Eigen::Index state;
};

// caller handed us something a routine refuses to work with
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace lbmdp
