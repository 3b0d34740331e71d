#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ltstress {

enum class ErrorCode {
  // ingest
  Io,
  Parse,
  MissingChannel,
  UnknownChannel,
  NonFiniteSample,
  RaggedChannels,
  BadSampleRate,
  TooShort,
  DuplicateSubject,
  PssOutOfRange,
  PssWrongArity,
  // spectral / features
  BadOverlap,
  BandOutOfRange,
  DivisionByZero,
  DegenerateDenominator,
  UnknownFeature,
  // labeling / selection
  InsufficientCohort,
  InsufficientGroup,
  EmptyClass,
  // classify
  InvalidHyperparameter,
  SingleClassTraining,
  NonFiniteFeature,
  NoConvergence,
  ArityMismatch,
  // evaluate
  TooFewSubjects,
  TooFewPerClass,
  LengthMismatch,
  // synth
  InvalidSpec,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "Io";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::MissingChannel: return "MissingChannel";
    case ErrorCode::UnknownChannel: return "UnknownChannel";
    case ErrorCode::NonFiniteSample: return "NonFiniteSample";
    case ErrorCode::RaggedChannels: return "RaggedChannels";
    case ErrorCode::BadSampleRate: return "BadSampleRate";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::DuplicateSubject: return "DuplicateSubject";
    case ErrorCode::PssOutOfRange: return "PssOutOfRange";
    case ErrorCode::PssWrongArity: return "PssWrongArity";
    case ErrorCode::BadOverlap: return "BadOverlap";
    case ErrorCode::BandOutOfRange: return "BandOutOfRange";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::UnknownFeature: return "UnknownFeature";
    case ErrorCode::InsufficientCohort: return "InsufficientCohort";
    case ErrorCode::InsufficientGroup: return "InsufficientGroup";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::InvalidHyperparameter: return "InvalidHyperparameter";
    case ErrorCode::SingleClassTraining: return "SingleClassTraining";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::TooFewSubjects: return "TooFewSubjects";
    case ErrorCode::TooFewPerClass: return "TooFewPerClass";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
  }
  return "Unknown";
}

// Numerical failures map to CLI exit code 3, everything else to 2.
constexpr bool is_numerical(ErrorCode code) {
  switch (code) {
    case ErrorCode::DivisionByZero:
    case ErrorCode::DegenerateDenominator:
    case ErrorCode::NonFiniteFeature:
    case ErrorCode::NoConvergence:
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

}  // namespace ltstress
