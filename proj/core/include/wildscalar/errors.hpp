#pragma once

#include <stdexcept>
#include <string>

namespace wildscalar {

enum class ErrorKind {
  InvalidArgument,
  NyquistViolation,
  DeformationExceeded,
  LiftingInfeasible,
  NegativeRadicand,
  ScheduleInfeasible,
  ClosureFailure,
  NoFrame,
  UnderResolved,
  OutOfWindow,
  WindowTooShort,
  NonZeroMean,
  ConfigError,
  IoError,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace wildscalar
