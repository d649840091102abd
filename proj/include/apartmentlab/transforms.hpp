#pragma once

// Maps of the form f(A) = U delta_A(A) U^*, commutativity-preservation
// checks, the support-level map they induce, and the constructive
// decomposer that recovers (U, antiunitary flag, delta_A) from a numeric map.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "apartmentlab/apartments.hpp"
#include "apartmentlab/error.hpp"
#include "apartmentlab/matrixlab.hpp"
#include "apartmentlab/spectra.hpp"
#include "apartmentlab/structure.hpp"

namespace apartmentlab {

/// How delta_A is chosen for each operator of a model map.
class DeltaRule {
 public:
  enum class Kind { Identity, Constant, Random };

  static DeltaRule identity() { return DeltaRule(Kind::Identity, {}, 0); }
  static DeltaRule constant(SymmetryPerm perm) { return DeltaRule(Kind::Constant, std::move(perm), 0); }
  static DeltaRule random(std::uint64_t seed) { return DeltaRule(Kind::Random, {}, seed); }

  /// "identity", "constant:<p0,p1,...>" or "random:<seed>".
  static DeltaRule parse(const std::string& text);
  std::string to_string() const;

  Kind kind() const noexcept { return kind_; }

  /// delta for operator `p` of apartment `apartment`. Random rules shuffle
  /// every S(C)-orbit of the apartment (seeded by the rule seed, the
  /// apartment and the orbit) and send p to its image under that shuffle,
  /// which keeps A -> delta_A(A) bijective.
  SymmetryPerm at(const ClassSpec& spec, int apartment, const LabeledPartition& p) const;

 private:
  DeltaRule(Kind kind, SymmetryPerm perm, std::uint64_t seed)
      : kind_(kind), perm_(std::move(perm)), seed_(seed) {}

  Kind kind_;
  SymmetryPerm perm_;
  std::uint64_t seed_;
};

/// Lexicographically smallest gamma in S(C) with gamma(P) = delta(P); the
/// representative reported when the stabilizer of P is non-trivial.
SymmetryPerm canonical_delta(const ClassSpec& spec, const SymmetryPerm& delta, const LabeledPartition& p);

/// f(A) = U delta_A(A) U^* (U antiunitary: U conj(delta_A(A)) U^*) on a
/// domain made of whole apartments, one realizing basis each.
class ModelMap {
 public:
  const ClassSpec& spec() const noexcept { return spec_; }
  const Basis& unitary() const noexcept { return unitary_; }
  bool antiunitary() const noexcept { return antiunitary_; }
  const DeltaRule& rule() const noexcept { return rule_; }
  const std::vector<Basis>& domain() const noexcept { return domain_; }

  /// Canonical delta_A for the operator (see canonical_delta).
  SymmetryPerm delta(int apartment, const LabeledPartition& p) const;
  HermitianOperator input(int apartment, const LabeledPartition& p) const;
  HermitianOperator apply(int apartment, const LabeledPartition& p) const;

 private:
  friend ModelMap make_model_map(const ClassSpec&, Basis, bool, DeltaRule, std::vector<Basis>);
  ModelMap(ClassSpec spec, Basis unitary, bool antiunitary, DeltaRule rule, std::vector<Basis> domain)
      : spec_(std::move(spec)), unitary_(std::move(unitary)), antiunitary_(antiunitary),
        rule_(std::move(rule)), domain_(std::move(domain)) {}

  ClassSpec spec_;
  Basis unitary_;
  bool antiunitary_;
  DeltaRule rule_;
  std::vector<Basis> domain_;
};

/// Throws InvalidPermutation if a constant rule lies outside S(C).
ModelMap make_model_map(const ClassSpec& spec, Basis unitary, bool antiunitary, DeltaRule rule,
                        std::vector<Basis> domain);

/// max over delta in S(C) of || U delta(A) U^* - delta(U A U^*) ||_max.
double equivariance_defect(const ClassSpec& spec, const Basis& u, bool antiunitary, const HermitianOperator& a);

struct OperatorPair {
  HermitianOperator input;
  HermitianOperator output;
};
using OperatorMap = std::vector<OperatorPair>;

/// Tabulates a model map over its whole domain, apartment by apartment in
/// enumeration order.
OperatorMap realize(const ModelMap& map);

/// Ground-truth delta for every entry of realize(map), same order.
std::vector<SymmetryPerm> realized_deltas(const ModelMap& map);

using IndexPair = std::pair<std::size_t, std::size_t>;

std::vector<IndexPair> all_index_pairs(std::size_t count);
/// Distinct unordered pairs drawn with a seeded generator.
std::vector<IndexPair> sample_index_pairs(std::size_t count, std::size_t samples, std::uint64_t seed);

struct CommutativityViolation {
  std::size_t first = 0;
  std::size_t second = 0;
  double input_norm = 0.0;
  double output_norm = 0.0;
};

struct CommutativityReport {
  std::uint64_t checked = 0;
  std::vector<CommutativityViolation> violations;
  bool ok() const noexcept { return violations.empty(); }
};

/// For each sampled pair: [A,B] = 0 iff [f(A),f(B)] = 0, both at `tolerance`.
CommutativityReport check_commutativity_preserving(const OperatorMap& map, std::span<const IndexPair> pairs,
                                                   double tolerance = tol::predicate);

/// Raised when an input map breaks a hypothesis of the classification
/// (bijectivity or commutativity preservation); carries a witness pair.
class MapHypothesisError : public Error {
 public:
  MapHypothesisError(ErrorCode code, const std::string& what, CommutativityViolation witness)
      : Error(code, what), witness_(witness) {}
  const CommutativityViolation& witness() const noexcept { return witness_; }

 private:
  CommutativityViolation witness_;
};

/// A^{perp perp} inside `family`, computed as the double orthocomplement and
/// as {B : supp B = supp A}; throws ClosureDisagreement if the two differ.
std::vector<LabeledPartition> biorthogonal_closure(const LabeledPartition& a,
                                                   std::span<const LabeledPartition> family);

/// Range of f(A) for every support class of a single realized apartment.
struct SupportImage {
  std::vector<int> support;
  Subspace image_range;
};

/// Groups the inputs (members of the apartment of `basis`) by support and
/// checks that each group's outputs share one range. Throws IllDefinedMap
/// otherwise.
std::vector<SupportImage> induced_grassmann_map(const ClassSpec& spec, const Basis& basis,
                                                const OperatorMap& map, double tolerance = tol::predicate);

/// Combinatorial version on an apartment self-map.
std::map<std::vector<int>, std::vector<int>> induced_grassmann_map(const PartitionMap& map);

/// Indices b with w_b inside `space` when `space` is spanned by basis
/// columns; nullopt if it is not aligned with the basis.
std::optional<std::vector<int>> aligned_indices(const Subspace& space, const Basis& basis,
                                                double tolerance = tol::predicate);

struct OperatorDecomposition {
  int apartment = 0;
  LabeledPartition partition;
  SymmetryPerm delta;
  double residual = 0.0;
  /// More than one delta reproduces this operator within tolerance; the
  /// lexicographically smallest is reported.
  bool ambiguous = false;
};

struct Decomposition {
  Basis unitary = Basis::standard(1);
  bool antiunitary = false;
  /// Both flags reproduce the map (e.g. a single apartment, or real data).
  bool flag_ambiguous = false;
  /// False when U is fixed only up to one phase per eigenline (single
  /// apartment domains).
  bool phases_fixed = false;
  std::vector<Basis> apartment_bases;
  std::vector<OperatorDecomposition> operators;
  double residual = 0.0;
};

struct DecomposeOptions {
  double predicate_tolerance = tol::predicate;
  double residual_tolerance = tol::decomposition;
  std::uint64_t seed = 0x5eed;
};

struct DecomposeOutcome {
  std::optional<Decomposition> decomposition;
  std::string failure;
  std::optional<std::size_t> first_unmatched;
  bool success() const noexcept { return decomposition.has_value(); }
};

/// Recovers f(A) = U delta_A(A) U^* from a tabulated map whose inputs are
/// whole apartments of `spec`. Throws MapHypothesisError for maps that are
/// not bijective or not commutativity preserving, Error(DomainIncomplete)
/// when the inputs do not cover whole apartments. Returns an out-of-form
/// outcome when no (U, flag) reproduces the map.
DecomposeOutcome decompose_map(const ClassSpec& spec, const OperatorMap& map, const DecomposeOptions& options = {});

struct ProjectionAnalysis {
  Decomposition decomposition;
  /// Per operator: f(P) = Id - U P U^* rather than U P U^*.
  std::vector<bool> complement;
};

/// For lambda * P_k with dim H = 2k, k >= 4: the branch taken by every
/// operator. Returns nullopt when the map is out of form.
std::optional<ProjectionAnalysis> analyze_projection_map(const ClassSpec& spec, const OperatorMap& map,
                                                         const DecomposeOptions& options = {});

/// ||a - e^{i theta} b||_max with theta = arg tr(b^* a), the best global
/// phase in Frobenius norm.
double phase_aligned_distance(const Matrix& a, const Matrix& b);

/// Largest line distance between the images of the eigenvectors of every
/// recovered apartment under (U, flag) and under a reference (U', flag').
/// Insensitive to per-line phases, so it also compares single-apartment
/// decompositions.
double eigenline_distance(const Decomposition& decomposition, const Basis& reference, bool reference_antiunitary);

}  // namespace apartmentlab
