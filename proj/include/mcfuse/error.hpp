#pragma once

#include <stdexcept>
#include <string>

namespace mcfuse {

// Coarse classification used by the command-line tool to pick an exit code.
enum class ErrorKind { usage, numerical, io };

class Error : public std::runtime_error {
 public:
  Error(std::string code, ErrorKind kind, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)), kind_(kind) {}

  const std::string& code() const noexcept { return code_; }
  ErrorKind kind() const noexcept { return kind_; }

 private:
  std::string code_;
  ErrorKind kind_;
};

#define MCFUSE_DEFINE_ERROR(Name, Kind)                   \
  class Name : public Error {                             \
   public:                                                \
    explicit Name(const std::string& message)             \
        : Error(#Name, ErrorKind::Kind, message) {}       \
  };

// Input validation.
MCFUSE_DEFINE_ERROR(ShapeError, usage)
MCFUSE_DEFINE_ERROR(RowSumError, usage)
MCFUSE_DEFINE_ERROR(PositivityError, usage)
MCFUSE_DEFINE_ERROR(MismatchError, usage)
MCFUSE_DEFINE_ERROR(TooShortError, usage)
MCFUSE_DEFINE_ERROR(ParseError, usage)

// Numerical failures.
MCFUSE_DEFINE_ERROR(DomainError, numerical)
MCFUSE_DEFINE_ERROR(ZeroRowError, numerical)
MCFUSE_DEFINE_ERROR(ConvergenceError, numerical)
MCFUSE_DEFINE_ERROR(InfeasibleError, numerical)
MCFUSE_DEFINE_ERROR(DegenerateError, numerical)

MCFUSE_DEFINE_ERROR(IoError, io)

#undef MCFUSE_DEFINE_ERROR

}  // namespace mcfuse
