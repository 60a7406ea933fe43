#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace stiefel {

enum class ErrorKind {
  ShapeMismatch,
  NotSquare,
  NonFinite,
  InvalidArgument,
  NotOrthonormal,
  NotTangent,
  BasePointMismatch,
  SingularPencil,
  ReductionUnavailable,
  Nonconvergence,
  SizeGuard,
  NotUnit,
  Io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NotSquare: return "NotSquare";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NotOrthonormal: return "NotOrthonormal";
    case ErrorKind::NotTangent: return "NotTangent";
    case ErrorKind::BasePointMismatch: return "BasePointMismatch";
    case ErrorKind::SingularPencil: return "SingularPencil";
    case ErrorKind::ReductionUnavailable: return "ReductionUnavailable";
    case ErrorKind::Nonconvergence: return "Nonconvergence";
    case ErrorKind::SizeGuard: return "SizeGuard";
    case ErrorKind::NotUnit: return "NotUnit";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Single exception type for the library; `kind()` tells callers what went wrong.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace stiefel
