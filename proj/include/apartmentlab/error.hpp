#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace apartmentlab {

enum class ErrorCode {
  Malformed,
  LengthMismatch,
  ZeroEigenvalue,
  DuplicateEigenvalue,
  MultiplicityBelowOne,
  RankExceedsDim,
  DimBelowThree,
  KernelSmallerThanRange,
  HalfDimRankBelowFour,
  InvalidPartition,
  InvalidPermutation,
  DimensionMismatch,
  NotHermitian,
  NotUnitary,
  NotOrthonormal,
  NotInApartment,
  EigenvalueMismatch,
  CapExceeded,
  EmptySubset,
  EqualPairs,
  SpecMismatch,
  PreconditionViolated,
  NotApartmentPreserving,
  IllDefinedMap,
  NotCommutativityPreserving,
  NotBijective,
  DomainIncomplete,
  OutOfForm,
  ClosureDisagreement,
};

/// Stable machine-readable name, used in JSON rejections.
std::string_view code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace apartmentlab
