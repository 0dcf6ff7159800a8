#pragma once

#include <stdexcept>
#include <string>

namespace lqg {

// Exit-code contract: 0 success, 1 numeric/convergence failure,
// 2 usage, 3 precondition violation.
class Error : public std::runtime_error {
 public:
  Error(int exit_code, const std::string& what)
      : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const { return exit_code_; }

 private:
  int exit_code_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(1, what) {}
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(2, what) {}
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what) : Error(3, what) {}
};

}  // namespace lqg
