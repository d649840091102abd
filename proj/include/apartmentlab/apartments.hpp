#pragma once

// Combinatorics of one orthogonal apartment: enumeration, the maximal
// orthogonally inexact subsets A_ij, their complements C_ij (represented by
// the index pair only), pair families and their special subfamilies.

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "apartmentlab/matrixlab.hpp"
#include "apartmentlab/spectra.hpp"

namespace apartmentlab {

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

/// Unordered pair of distinct basis indices, stored with i < j.
struct PairIndex {
  int i = 0;
  int j = 1;

  /// Throws Error(EqualPairs) when a == b.
  static PairIndex make(int a, int b);

  bool contains(int x) const noexcept { return i == x || j == x; }
  auto operator<=>(const PairIndex&) const = default;
};

/// All n(n-1)/2 pairs in lexicographic order.
std::vector<PairIndex> all_pairs(int n);

/// Visits every operator of the apartment once, in lexicographic order of
/// slot_of. Throws CapExceeded before visiting anything if the apartment is
/// larger than cap.
void for_each_partition(const ClassSpec& spec, const std::function<void(const LabeledPartition&)>& visit,
                        std::uint64_t cap = kDefaultEnumerationCap);

std::vector<LabeledPartition> enumerate_apartment(const ClassSpec& spec,
                                                  std::uint64_t cap = kDefaultEnumerationCap);

/// P is in A_ij: e_i and e_j share an eigenspace (kernel included).
bool in_a_ij(const LabeledPartition& p, PairIndex pair);

/// Pairs fused by every member of X. X is orthogonally inexact iff the result
/// is non-empty. Throws EmptySubset on empty input.
std::vector<PairIndex> fused_pairs(std::span<const LabeledPartition> subset);

/// Members of A_ij within a given apartment listing.
std::vector<LabeledPartition> a_ij_members(std::span<const LabeledPartition> apartment, PairIndex pair);

struct InexactSubsetInfo {
  PairIndex pair;
  std::uint64_t size = 0;   // |A_ij|
  bool maximal = false;     // adding any outside operator kills every fused pair
};

struct MaximalInexactReport {
  /// Pairs with A_ij non-empty, each with its maximality verdict.
  std::vector<InexactSubsetInfo> subsets;
  /// Pairs whose A_ij is empty (only possible for overridden specs).
  std::vector<PairIndex> empty_pairs;
};

MaximalInexactReport maximal_inexact_subsets(const ClassSpec& spec,
                                             std::uint64_t cap = kDefaultEnumerationCap);

/// Index sets share exactly one element. Throws EqualPairs when a == b.
bool adjacent(PairIndex a, PairIndex b);

/// The family of orthocomplementary subsets C_ij containing both operators.
struct PairFamily {
  LabeledPartition first;
  LabeledPartition second;
  std::vector<PairIndex> pairs;  // sorted

  bool contains(PairIndex p) const;
  int size() const noexcept { return static_cast<int>(pairs.size()); }
};

/// {(i,j) : i, j in different slots of P and in different slots of Q}.
PairFamily pair_family(const ClassSpec& spec, const LabeledPartition& p, const LabeledPartition& q);

enum class SubfamilyKind { Star, Triangle };

struct SpecialSubfamily {
  std::vector<PairIndex> pairs;  // sorted
  SubfamilyKind kind = SubfamilyKind::Star;
  int center = -1;  // common index for stars

  int size() const noexcept { return static_cast<int>(pairs.size()); }
  auto operator<=>(const SpecialSubfamily&) const = default;
};

/// Maximal cliques of the adjacency graph on F. Every clique of pairwise
/// adjacent pairs is a sub-star or a sub-triangle, so the maximal ones are
/// found among full stars and triangles of F. Sorted by pair list.
std::vector<SpecialSubfamily> special_subfamilies(const PairFamily& family);

/// Number of pairs common to two subfamilies.
int intersection_size(const SpecialSubfamily& a, const SpecialSubfamily& b);

enum class PairCase { Orthogonal, Case2, Case3 };

const char* case_name(PairCase c) noexcept;

/// Orthogonal iff supports are disjoint, case3 iff supports are equal.
/// Throws EqualPairs when P == Q, SpecMismatch when lengths differ.
PairCase classify_pair(const LabeledPartition& p, const LabeledPartition& q);

/// Numeric witness that A_ij is orthogonally inexact: the apartment of the
/// rotated frame meets the apartment of `basis` in exactly A_ij. Returns the
/// first operator for which membership disagrees, or nullopt on success.
std::optional<LabeledPartition> check_rotated_frame_witness(const ClassSpec& spec, const Basis& basis,
                                                            std::span<const LabeledPartition> apartment,
                                                            PairIndex pair, double theta = 0.6283185307179586);

/// Numeric check that every member of `subset` also lies in the rotated
/// apartment for `pair`.
bool subset_fits_rotated_frame(const ClassSpec& spec, const Basis& basis,
                               std::span<const LabeledPartition> subset, PairIndex pair,
                               double theta = 0.6283185307179586);

/// Lexicographic rank of a partition within its apartment.
std::uint64_t partition_rank(const ClassSpec& spec, const LabeledPartition& p);

}  // namespace apartmentlab
