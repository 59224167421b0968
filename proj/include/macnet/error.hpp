#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace macnet {

enum class Errc {
  // numeric kernel
  LengthMismatch,
  ZeroVariance,
  NotSymmetric,
  NoConvergence,
  ComplexSpectrum,
  NotPositiveDefinite,
  Singular,
  IllConditioned,
  InternalNumericalError,
  // similarity / inference
  OutOfDomain,
  DegenerateR,
  EmptyInput,
  DegenerateCorrelation,
  InsufficientSamples,
  RootOutOfRange,
  NonFiniteInput,
  InvalidP,
  InvalidGamma,
  InvalidDf,
  SingularCovariance,
  // network / classify / enrichment
  NodeSetMismatch,
  InvalidThreshold,
  UnnormalizedContrib,
  InvalidCounts,
  EmptyClass,
  IdentifierMismatch,
  // ingestion
  SchemaMismatch,
  DuplicateNodeId,
  NonNumericCell,
  Usage,
};

inline const char* errc_name(Errc c) noexcept {
  switch (c) {
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::NotSymmetric: return "NotSymmetric";
    case Errc::NoConvergence: return "NoConvergence";
    case Errc::ComplexSpectrum: return "ComplexSpectrum";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::Singular: return "Singular";
    case Errc::IllConditioned: return "IllConditioned";
    case Errc::InternalNumericalError: return "InternalNumericalError";
    case Errc::OutOfDomain: return "OutOfDomain";
    case Errc::DegenerateR: return "DegenerateR";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::DegenerateCorrelation: return "DegenerateCorrelation";
    case Errc::InsufficientSamples: return "InsufficientSamples";
    case Errc::RootOutOfRange: return "RootOutOfRange";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::InvalidP: return "InvalidP";
    case Errc::InvalidGamma: return "InvalidGamma";
    case Errc::InvalidDf: return "InvalidDf";
    case Errc::SingularCovariance: return "SingularCovariance";
    case Errc::NodeSetMismatch: return "NodeSetMismatch";
    case Errc::InvalidThreshold: return "InvalidThreshold";
    case Errc::UnnormalizedContrib: return "UnnormalizedContrib";
    case Errc::InvalidCounts: return "InvalidCounts";
    case Errc::EmptyClass: return "EmptyClass";
    case Errc::IdentifierMismatch: return "IdentifierMismatch";
    case Errc::SchemaMismatch: return "SchemaMismatch";
    case Errc::DuplicateNodeId: return "DuplicateNodeId";
    case Errc::NonNumericCell: return "NonNumericCell";
    case Errc::Usage: return "Usage";
  }
  return "Unknown";
}

/// Coarse grouping used by the CLI to pick an exit code.
enum class ErrorCategory { Usage = 1, Data = 2, Numerical = 3 };

inline ErrorCategory category_of(Errc c) noexcept {
  switch (c) {
    case Errc::Usage:
    case Errc::InvalidGamma:
    case Errc::InvalidThreshold:
    case Errc::InvalidDf:
      return ErrorCategory::Usage;
    case Errc::LengthMismatch:
    case Errc::ZeroVariance:
    case Errc::InsufficientSamples:
    case Errc::NodeSetMismatch:
    case Errc::InvalidCounts:
    case Errc::EmptyClass:
    case Errc::IdentifierMismatch:
    case Errc::SchemaMismatch:
    case Errc::DuplicateNodeId:
    case Errc::NonNumericCell:
    case Errc::InvalidP:
    case Errc::EmptyInput:
    case Errc::UnnormalizedContrib:
    case Errc::NonFiniteInput:
      return ErrorCategory::Data;
    default:
      return ErrorCategory::Numerical;
  }
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  Errc code_;
};

/// An error tied to one position: the failing Cholesky pivot, or the
/// constant column of a sample block.
class IndexedError : public Error {
 public:
  IndexedError(Errc code, const std::string& what, std::size_t index)
      : Error(code, what), index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace macnet
