#pragma once

#include <stdexcept>
#include <string>

namespace nongauss {

enum class ErrorCode {
  InvalidArgument,
  InvalidVariance,
  NoDensity,
  GridTooNarrow,
  GridMismatch,
  ZeroMass,
  DegenerateDensity,
  TailUnderflow,
  RateUndefined,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidVariance: return "InvalidVariance";
    case ErrorCode::NoDensity: return "NoDensity";
    case ErrorCode::GridTooNarrow: return "GridTooNarrow";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::ZeroMass: return "ZeroMass";
    case ErrorCode::DegenerateDensity: return "DegenerateDensity";
    case ErrorCode::TailUnderflow: return "TailUnderflow";
    case ErrorCode::RateUndefined: return "RateUndefined";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace nongauss
