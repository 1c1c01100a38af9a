#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace finsheaf {

enum class ErrorKind {
  GeneratorsDoNotCover,
  UnknownPoint,
  NotAnOpen,
  MixedCategories,
  MalformedDiagram,
  NotFiltered,
  IncompatibleCone,
  ValueMismatch,
  IncompatibleFamily,
  WrongCategory,
  NotASection,
  NotContinuous,
  NotASheaf,
  NotInverseImagePair,
  NotIrreducible,
  CocycleViolation,
  NotAGluing,
  CapExceeded,
  ParseError,
  CrossReferenceError,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// The single exception type thrown by the library; `kind()` identifies the
/// contract that was violated.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace finsheaf
