#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spl {

enum class ErrorKind {
  InvalidInput,
  NonConvergence,
  NotSymmetric,
  NotDoublyStochastic,
  ShapeMismatch,
  DegenerateCovariance,
  StepSizeUnderflow,
  InnerSolveFailure,
  UnknownScenario,
  IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Library-wide exception. `kind()` is the machine-readable category the CLI
/// reports on stderr.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::NotSymmetric: return "NotSymmetric";
    case ErrorKind::NotDoublyStochastic: return "NotDoublyStochastic";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::DegenerateCovariance: return "DegenerateCovariance";
    case ErrorKind::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorKind::InnerSolveFailure: return "InnerSolveFailure";
    case ErrorKind::UnknownScenario: return "UnknownScenario";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace spl
