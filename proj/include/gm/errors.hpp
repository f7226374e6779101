#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gm {

enum class ErrorCode {
  ZeroBuyProbability,
  ZeroSellProbability,
  NoConvergence,
  NotDifferentiable,
  ConditionFailed,
  ConfigError,
  GridMismatch,
  InsufficientData,
  DomainError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ZeroBuyProbability: return "ZeroBuyProbability";
    case ErrorCode::ZeroSellProbability: return "ZeroSellProbability";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotDifferentiable: return "NotDifferentiable";
    case ErrorCode::ConditionFailed: return "ConditionFailed";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::DomainError: return "DomainError";
  }
  return "Unknown";
}

}  // namespace gm
