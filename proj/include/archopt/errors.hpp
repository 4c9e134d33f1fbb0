#pragma once

#include <stdexcept>
#include <string>

namespace archopt {

// Status codes shared by the C API and the CLI exit codes.
enum class Status : int {
  ok = 0,
  internal = 1,
  parse = 2,
  validation = 3,
  infeasible = 4,
  non_convergence = 5,
};

class Error : public std::runtime_error {
public:
  Error(Status status, const std::string& what) : std::runtime_error(what), status_(status) {}
  Status status() const noexcept { return status_; }

private:
  Status status_;
};

class ParseError : public Error {
public:
  explicit ParseError(const std::string& what) : Error(Status::parse, what) {}
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& what) : Error(Status::validation, what) {}
};

class InfeasibleError : public Error {
public:
  explicit InfeasibleError(const std::string& what) : Error(Status::infeasible, what) {}
};

class ConvergenceError : public Error {
public:
  explicit ConvergenceError(const std::string& what) : Error(Status::non_convergence, what) {}
};

}  // namespace archopt
