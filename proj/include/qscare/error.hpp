#pragma once

#include <stdexcept>
#include <string>

namespace qscare {

// Bad shapes, violated preconditions, malformed configs.
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// An iteration ran out of budget or broke down.
class ConvergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw InputError(msg);
}

}  // namespace qscare
