#pragma once

// Conjugacy-class specifications, the multiplicity-preserving slot
// permutation group, and its action on basis-labelled operators.
//
// Slots are numbered 0..m: slot 0 is the kernel (eigenvalue 0), slot s >= 1
// carries the s-th eigenvalue in the order given at construction.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace apartmentlab {

/// Unvalidated class description as it arrives from a config file.
struct RawSpec {
  std::vector<double> eigenvalues;
  std::vector<int> multiplicities;
  int dim = 0;
  bool allow_assumption_violation = false;
};

/// A conjugacy class of self-adjoint operators on C^dim, determined by its
/// distinct nonzero eigenvalues and their multiplicities.
class ClassSpec {
 public:
  int dim() const noexcept { return dim_; }
  int kernel_dim() const noexcept { return kernel_dim_; }
  int rank() const noexcept { return dim_ - kernel_dim_; }
  /// Number of nonzero eigenvalues (m); there are m + 1 slots.
  int num_eigenvalues() const noexcept {
    return static_cast<int>(eigenvalues_.size());
  }
  int num_slots() const noexcept { return num_eigenvalues() + 1; }

  const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
  const std::vector<int>& multiplicities() const noexcept { return multiplicities_; }

  /// Eigenvalue carried by a slot; 0 for the kernel slot.
  double slot_value(int slot) const;
  /// Dimension of a slot's eigenspace; kernel_dim() for slot 0.
  int slot_size(int slot) const;

  /// Kernel at least as large as the range, and k >= 4 when dim == 2k.
  bool assumptions_hold() const noexcept { return assumptions_hold_; }
  bool assumption_override() const noexcept { return override_; }

  /// lambda * P_k: a single nonzero eigenvalue.
  bool is_scaled_projection_class() const noexcept { return num_eigenvalues() == 1; }
  /// lambda * P_1, the class handled by Uhlhorn's theorem rather than apartments.
  bool is_rank_one_projection_class() const noexcept {
    return is_scaled_projection_class() && multiplicities_[0] == 1;
  }
  bool all_slot_sizes_distinct() const;

  /// Non-fatal notes collected during validation (e.g. eigenvalues too close
  /// for reliable numeric recovery).
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

  /// Slot order sorted by descending eigenvalue (kernel first); used for
  /// canonical comparison of specs given in different orders.
  std::vector<int> canonical_slot_order() const;

  bool operator==(const ClassSpec& other) const;

 private:
  friend ClassSpec validate_spec(const RawSpec& raw);

  std::vector<double> eigenvalues_;
  std::vector<int> multiplicities_;
  int dim_ = 0;
  int kernel_dim_ = 0;
  bool assumptions_hold_ = false;
  bool override_ = false;
  std::vector<std::string> warnings_;
};

/// Validates raw class data. Throws Error with a code naming the first
/// violated invariant. Standing-assumption violations are accepted only when
/// raw.allow_assumption_violation is set.
ClassSpec validate_spec(const RawSpec& raw);

/// Permutation of slot indices {0..m}; mapping[i] is the image of slot i.
struct SymmetryPerm {
  std::vector<int> mapping;

  static SymmetryPerm identity(int num_slots);
  static SymmetryPerm transposition(int num_slots, int a, int b);

  int size() const noexcept { return static_cast<int>(mapping.size()); }
  int operator()(int slot) const { return mapping.at(static_cast<std::size_t>(slot)); }
  bool is_identity() const noexcept;
  SymmetryPerm inverse() const;

  auto operator<=>(const SymmetryPerm&) const = default;
};

/// Product chosen so that the action is a homomorphism:
/// apply_symmetry(compose(d, g), P) == apply_symmetry(d, apply_symmetry(g, P)).
/// As index maps, compose(d, g)(i) = g(d(i)).
SymmetryPerm compose(const SymmetryPerm& delta, const SymmetryPerm& gamma);

/// True iff perm is a permutation of the spec's slots with n_{perm(i)} = n_i.
bool preserves_multiplicities(const ClassSpec& spec, const SymmetryPerm& perm);

/// The group S(C), sorted lexicographically (identity first).
std::vector<SymmetryPerm> symmetry_group(const ClassSpec& spec);

/// An operator of an apartment, given by the slot of every basis index.
struct LabeledPartition {
  std::vector<int> slot_of;

  int dim() const noexcept { return static_cast<int>(slot_of.size()); }
  /// Basis indices assigned to a slot, ascending.
  std::vector<int> block(int slot) const;
  /// Indices outside the kernel (the range of the operator).
  std::vector<int> support() const;
  std::vector<int> kernel() const { return block(0); }

  auto operator<=>(const LabeledPartition&) const = default;
};

/// Throws Error(InvalidPartition) unless every slot block has the spec's size.
void validate_partition(const ClassSpec& spec, const LabeledPartition& p);

/// delta(A): the eigenspace for slot i becomes the old eigenspace of slot
/// delta(i). Throws if delta is not in S(C) or p is not valid for spec.
LabeledPartition apply_symmetry(const ClassSpec& spec, const SymmetryPerm& delta,
                                const LabeledPartition& p);

/// n! / (n_0! * prod n_i!) — the number of operators in one apartment.
std::uint64_t apartment_size(const ClassSpec& spec);

}  // namespace apartmentlab
