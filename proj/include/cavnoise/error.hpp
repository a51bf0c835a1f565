#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cavnoise {

enum class ErrorCode {
  // validation
  NonPositiveInputCoupling,
  NegativeRate,
  NonFiniteValue,
  InvalidEfficiency,
  InvalidSpectrum,
  UncertaintyViolation,
  OutOfRange,
  InvalidGrid,
  InvalidFilter,
  InvalidMechanics,
  ZeroOutputCoupling,
  GridMismatch,
  InvalidSqueezeFactor,
  InvalidResidual,
  InvalidConfig,
  UnknownParameter,
  MissingFilter,
  MissingSection,
  UnsupportedModel,
  // numerical
  DegenerateDenominator,
  NumericalRootFailure,
  UnstableLoop,
  DivergenceDetected,
  InsufficientData,
  NoBandOverlap,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveInputCoupling: return "NonPositiveInputCoupling";
    case ErrorCode::NegativeRate: return "NegativeRate";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::InvalidEfficiency: return "InvalidEfficiency";
    case ErrorCode::InvalidSpectrum: return "InvalidSpectrum";
    case ErrorCode::UncertaintyViolation: return "UncertaintyViolation";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::InvalidFilter: return "InvalidFilter";
    case ErrorCode::InvalidMechanics: return "InvalidMechanics";
    case ErrorCode::ZeroOutputCoupling: return "ZeroOutputCoupling";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::InvalidSqueezeFactor: return "InvalidSqueezeFactor";
    case ErrorCode::InvalidResidual: return "InvalidResidual";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::UnknownParameter: return "UnknownParameter";
    case ErrorCode::MissingFilter: return "MissingFilter";
    case ErrorCode::MissingSection: return "MissingSection";
    case ErrorCode::UnsupportedModel: return "UnsupportedModel";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::NumericalRootFailure: return "NumericalRootFailure";
    case ErrorCode::UnstableLoop: return "UnstableLoop";
    case ErrorCode::DivergenceDetected: return "DivergenceDetected";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NoBandOverlap: return "NoBandOverlap";
  }
  return "Unknown";
}

/// True for failures of the numerics (as opposed to bad input).
constexpr bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateDenominator:
    case ErrorCode::NumericalRootFailure:
    case ErrorCode::UnstableLoop:
    case ErrorCode::DivergenceDetected:
    case ErrorCode::InsufficientData:
    case ErrorCode::NoBandOverlap:
      return true;
    default:
      return false;
  }
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cavnoise
