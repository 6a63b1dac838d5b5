#include "infinimix/errors.hpp"

namespace infinimix {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SingularOrbit: return "SingularOrbit";
    case ErrorCode::BoundaryPoint: return "BoundaryPoint";
    case ErrorCode::NotMeasurePreserving: return "NotMeasurePreserving";
    case ErrorCode::DepthExceeded: return "DepthExceeded";
    case ErrorCode::QuadratureBudget: return "QuadratureBudget";
    case ErrorCode::NotMeanZero: return "NotMeanZero";
    case ErrorCode::ZeroMean: return "ZeroMean";
    case ErrorCode::MethodMismatch: return "MethodMismatch";
    case ErrorCode::IntervalBlowup: return "IntervalBlowup";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::UnresolvedId: return "UnresolvedId";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace infinimix
