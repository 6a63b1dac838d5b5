#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace infinimix {

enum class ErrorCode {
  InvalidArgument,
  SingularOrbit,
  BoundaryPoint,
  NotMeasurePreserving,
  DepthExceeded,
  QuadratureBudget,
  NotMeanZero,
  ZeroMean,
  MethodMismatch,
  IntervalBlowup,
  Parse,
  UnresolvedId,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every library failure is reported through this type; `code()` lets callers
/// tell a recoverable numerical event (a singular orbit, say) from a bad input.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);
  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace infinimix
