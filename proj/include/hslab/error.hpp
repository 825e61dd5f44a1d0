#pragma once

#include <stdexcept>
#include <string>

namespace hslab {

enum class Errc {
  InvalidArgument,
  Divergent,
  ToleranceNotMet,
  NonFinite,
  NonPositiveScale,
  NonPositiveEps,
  OutOfRangeBeta,
  EmptySiteList,
  MixedExponents,
  EpsTooLarge,
  DegenerateDenominator,
  ShapeMismatch,
  NonpositivePart,
  NonpositiveLambda,
  PositiveLambda,
  Config,
  Io,
};

const char* errc_name(Errc code) noexcept;

/// Every failure in the library is reported through this type; `code()`
/// identifies the failure class, `what()` carries the details.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace hslab
