#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cablequad {

enum class ErrorCode {
  kNotSkewSymmetric,
  kDegenerateVector,
  kInvalidParams,
  kSingularSystem,
  kSingularMass,
  kNotHurwitz,
  kCertificateFailed,
  kDegenerateForce,
  kParallelAxes,
  kInvalidScenario,
  kEmptyLog,
  kIoError,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotSkewSymmetric: return "NotSkewSymmetric";
    case ErrorCode::kDegenerateVector: return "DegenerateVector";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kSingularSystem: return "SingularSystem";
    case ErrorCode::kSingularMass: return "SingularMass";
    case ErrorCode::kNotHurwitz: return "NotHurwitz";
    case ErrorCode::kCertificateFailed: return "CertificateFailed";
    case ErrorCode::kDegenerateForce: return "DegenerateForce";
    case ErrorCode::kParallelAxes: return "ParallelAxes";
    case ErrorCode::kInvalidScenario: return "InvalidScenario";
    case ErrorCode::kEmptyLog: return "EmptyLog";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

/// Exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cablequad
