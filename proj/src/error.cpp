#include "apartmentlab/error.hpp"

namespace apartmentlab {

std::string_view code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Malformed: return "malformed";
    case ErrorCode::LengthMismatch: return "length_mismatch";
    case ErrorCode::ZeroEigenvalue: return "zero_eigenvalue";
    case ErrorCode::DuplicateEigenvalue: return "duplicate_eigenvalue";
    case ErrorCode::MultiplicityBelowOne: return "multiplicity_below_one";
    case ErrorCode::RankExceedsDim: return "rank_exceeds_dim";
    case ErrorCode::DimBelowThree: return "dim_below_three";
    case ErrorCode::KernelSmallerThanRange: return "kernel_smaller_than_range";
    case ErrorCode::HalfDimRankBelowFour: return "half_dim_rank_below_four";
    case ErrorCode::InvalidPartition: return "invalid_partition";
    case ErrorCode::InvalidPermutation: return "invalid_permutation";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::NotHermitian: return "not_hermitian";
    case ErrorCode::NotUnitary: return "not_unitary";
    case ErrorCode::NotOrthonormal: return "not_orthonormal";
    case ErrorCode::NotInApartment: return "not_in_apartment";
    case ErrorCode::EigenvalueMismatch: return "eigenvalue_mismatch";
    case ErrorCode::CapExceeded: return "cap_exceeded";
    case ErrorCode::EmptySubset: return "empty_subset";
    case ErrorCode::EqualPairs: return "equal_pairs";
    case ErrorCode::SpecMismatch: return "spec_mismatch";
    case ErrorCode::PreconditionViolated: return "precondition_violated";
    case ErrorCode::NotApartmentPreserving: return "not_apartment_preserving";
    case ErrorCode::IllDefinedMap: return "ill_defined_map";
    case ErrorCode::NotCommutativityPreserving: return "not_commutativity_preserving";
    case ErrorCode::NotBijective: return "not_bijective";
    case ErrorCode::DomainIncomplete: return "domain_incomplete";
    case ErrorCode::OutOfForm: return "out_of_form";
    case ErrorCode::ClosureDisagreement: return "closure_disagreement";
  }
  return "unknown";
}

}  // namespace apartmentlab
