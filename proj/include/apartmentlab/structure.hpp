#pragma once

// Decision procedures read off the pair-family combinatorics: a structural
// orthogonality detector, the large-subfamily counting discriminator for
// dim H = 2k, representative selection, range chains, and the
// range-alternative classifier for apartment self-maps.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "apartmentlab/apartments.hpp"
#include "apartmentlab/spectra.hpp"

namespace apartmentlab {

struct Witness {
  std::string kind;
  std::vector<PairIndex> pairs;
  std::vector<LabeledPartition> operators;
  std::vector<SpecialSubfamily> subfamilies;
  std::string note;
};

struct StructuralReport {
  bool verdict = false;
  std::string tag;
  std::vector<Witness> witnesses;
  std::map<std::string, std::int64_t> counts;
  std::optional<std::uint64_t> seed;
};

/// Decides orthogonality of P, Q from their pair family alone:
///  (a) every two distinct non-adjacent members of F have exactly two common
///      neighbours in F, and these two are not adjacent;
///  (b) any two distinct special subfamilies share at most one member.
/// Verdict is (a) && (b). Requires distinct operators of a class satisfying
/// the standing assumptions that is not lambda * P_1.
StructuralReport detect_orthogonality_structural(const ClassSpec& spec, const LabeledPartition& p,
                                                 const LabeledPartition& q);

/// Special subfamilies of F with at least `threshold` members.
int count_large_special_subfamilies(const PairFamily& family, int threshold);

/// For dim H = 2k and supports meeting in k - 1 indices: operators with the
/// same supports as P, Q that share a multi-dimensional nonzero eigenspace
/// (first hit of a lexicographic scan over relabelings). Returns (P, Q)
/// unchanged when every nonzero eigenspace is one-dimensional.
std::pair<LabeledPartition, LabeledPartition> choose_representatives_for_charad(const ClassSpec& spec,
                                                                                const LabeledPartition& p,
                                                                                const LabeledPartition& q);

/// All relabelings of `p` that keep its support (the operators A' with
/// R(A') = R(A)), lexicographic.
std::vector<LabeledPartition> same_support_relabelings(const ClassSpec& spec, const LabeledPartition& p);

/// Sequence P = A_0, ..., A_m = Q in the apartment with consecutive supports
/// meeting in exactly rank - 1 indices.
std::vector<LabeledPartition> range_chain(const ClassSpec& spec, const LabeledPartition& p,
                                          const LabeledPartition& q);

using PartitionMap = std::map<LabeledPartition, LabeledPartition>;

/// Classifies an apartment self-map (dim H = 2k) as "identity-type",
/// "complement-type" or "mixed". A mixed verdict carries a witness pair with
/// (k-1)-dimensional support intersection whose branches differ, together
/// with the large-subfamily counts before and after the map.
StructuralReport range_alternative_check(const ClassSpec& spec, const PartitionMap& map);

/// Support complement with labels carried over in index order: the r-th
/// smallest kernel index of P receives the slot of the r-th smallest support
/// index. For lambda * P_k this is P -> Id - P. Requires dim H = 2k.
LabeledPartition complement_partition(const ClassSpec& spec, const LabeledPartition& p);

PartitionMap identity_partition_map(const ClassSpec& spec);
PartitionMap complement_partition_map(const ClassSpec& spec);

}  // namespace apartmentlab
