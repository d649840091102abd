#include "apartmentlab/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

#include "apartmentlab/error.hpp"

namespace apartmentlab {

namespace {

// Eigenvalues closer than this cannot be told apart by recover_partition at
// the default eigenvalue tolerance (100 * 1e-9).
constexpr double kSeparationGuard = 1e-7;

}  // namespace

double ClassSpec::slot_value(int slot) const {
  if (slot == 0) return 0.0;
  return eigenvalues_.at(static_cast<std::size_t>(slot - 1));
}

int ClassSpec::slot_size(int slot) const {
  if (slot == 0) return kernel_dim_;
  return multiplicities_.at(static_cast<std::size_t>(slot - 1));
}

bool ClassSpec::all_slot_sizes_distinct() const {
  std::vector<int> sizes(multiplicities_);
  sizes.push_back(kernel_dim_);
  std::sort(sizes.begin(), sizes.end());
  return std::adjacent_find(sizes.begin(), sizes.end()) == sizes.end();
}

std::vector<int> ClassSpec::canonical_slot_order() const {
  std::vector<int> order(static_cast<std::size_t>(num_eigenvalues()));
  std::iota(order.begin(), order.end(), 1);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return slot_value(a) > slot_value(b); });
  order.insert(order.begin(), 0);
  return order;
}

bool ClassSpec::operator==(const ClassSpec& other) const {
  if (dim_ != other.dim_ || num_eigenvalues() != other.num_eigenvalues()) return false;
  const auto mine = canonical_slot_order();
  const auto theirs = other.canonical_slot_order();
  for (std::size_t i = 0; i < mine.size(); ++i) {
    if (slot_value(mine[i]) != other.slot_value(theirs[i]) ||
        slot_size(mine[i]) != other.slot_size(theirs[i]))
      return false;
  }
  return true;
}

ClassSpec validate_spec(const RawSpec& raw) {
  if (raw.eigenvalues.size() != raw.multiplicities.size())
    throw Error(ErrorCode::LengthMismatch,
                "eigenvalues and multiplicities differ in length");
  if (raw.eigenvalues.empty())
    throw Error(ErrorCode::Malformed, "at least one nonzero eigenvalue required");
  if (raw.dim < 3) throw Error(ErrorCode::DimBelowThree, "ambient dimension must be >= 3");

  for (std::size_t i = 0; i < raw.eigenvalues.size(); ++i) {
    const double a = raw.eigenvalues[i];
    if (!std::isfinite(a)) throw Error(ErrorCode::Malformed, "non-finite eigenvalue");
    if (a == 0.0) throw Error(ErrorCode::ZeroEigenvalue, "zero eigenvalue");
    for (std::size_t j = 0; j < i; ++j)
      if (raw.eigenvalues[j] == a)
        throw Error(ErrorCode::DuplicateEigenvalue, "duplicate eigenvalue");
    if (raw.multiplicities[i] < 1)
      throw Error(ErrorCode::MultiplicityBelowOne, "multiplicity below one");
  }

  const long rank = std::accumulate(raw.multiplicities.begin(), raw.multiplicities.end(), 0L);
  if (rank > raw.dim)
    throw Error(ErrorCode::RankExceedsDim, "sum of multiplicities exceeds dimension");

  ClassSpec spec;
  spec.eigenvalues_ = raw.eigenvalues;
  spec.multiplicities_ = raw.multiplicities;
  spec.dim_ = raw.dim;
  spec.kernel_dim_ = raw.dim - static_cast<int>(rank);
  spec.override_ = raw.allow_assumption_violation;

  const int k = static_cast<int>(rank);
  std::optional<Error> violation;
  if (spec.kernel_dim_ < k) {
    violation = Error(ErrorCode::KernelSmallerThanRange,
                      "kernel dimension smaller than rank");
  } else if (raw.dim == 2 * k && k < 4) {
    violation = Error(ErrorCode::HalfDimRankBelowFour,
                      "dim == 2k requires k >= 4");
  }
  spec.assumptions_hold_ = !violation.has_value();
  if (violation && !raw.allow_assumption_violation) throw *violation;
  if (violation) spec.warnings_.push_back(std::string("assumption override: ") + violation->what());

  std::vector<double> values(raw.eigenvalues);
  values.push_back(0.0);
  std::sort(values.begin(), values.end());
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] - values[i - 1] <= kSeparationGuard) {
      std::ostringstream note;
      note << "eigenvalues " << values[i - 1] << " and " << values[i]
           << " are closer than the recovery guard";
      spec.warnings_.push_back(note.str());
    }
  }
  return spec;
}

SymmetryPerm SymmetryPerm::identity(int num_slots) {
  SymmetryPerm p;
  p.mapping.resize(static_cast<std::size_t>(num_slots));
  std::iota(p.mapping.begin(), p.mapping.end(), 0);
  return p;
}

SymmetryPerm SymmetryPerm::transposition(int num_slots, int a, int b) {
  SymmetryPerm p = identity(num_slots);
  std::swap(p.mapping.at(static_cast<std::size_t>(a)), p.mapping.at(static_cast<std::size_t>(b)));
  return p;
}

bool SymmetryPerm::is_identity() const noexcept {
  for (std::size_t i = 0; i < mapping.size(); ++i)
    if (mapping[i] != static_cast<int>(i)) return false;
  return true;
}

SymmetryPerm SymmetryPerm::inverse() const {
  SymmetryPerm inv;
  inv.mapping.resize(mapping.size());
  for (std::size_t i = 0; i < mapping.size(); ++i)
    inv.mapping.at(static_cast<std::size_t>(mapping[i])) = static_cast<int>(i);
  return inv;
}

SymmetryPerm compose(const SymmetryPerm& delta, const SymmetryPerm& gamma) {
  if (delta.size() != gamma.size())
    throw Error(ErrorCode::InvalidPermutation, "composing permutations of different size");
  SymmetryPerm out;
  out.mapping.resize(delta.mapping.size());
  for (std::size_t i = 0; i < out.mapping.size(); ++i)
    out.mapping[i] = gamma(delta.mapping[i]);
  return out;
}

bool preserves_multiplicities(const ClassSpec& spec, const SymmetryPerm& perm) {
  if (perm.size() != spec.num_slots()) return false;
  std::vector<bool> seen(perm.mapping.size(), false);
  for (int i = 0; i < perm.size(); ++i) {
    const int image = perm(i);
    if (image < 0 || image >= perm.size() || seen[static_cast<std::size_t>(image)]) return false;
    seen[static_cast<std::size_t>(image)] = true;
    if (spec.slot_size(image) != spec.slot_size(i)) return false;
  }
  return true;
}

std::vector<SymmetryPerm> symmetry_group(const ClassSpec& spec) {
  // S(C) is the direct product of the symmetric groups on slots of equal size.
  std::map<int, std::vector<int>> classes;
  for (int s = 0; s < spec.num_slots(); ++s) classes[spec.slot_size(s)].push_back(s);

  std::vector<SymmetryPerm> group{SymmetryPerm::identity(spec.num_slots())};
  for (const auto& [size, slots] : classes) {
    if (slots.size() < 2) continue;
    std::vector<SymmetryPerm> next;
    std::vector<int> images(slots);
    do {
      for (const auto& g : group) {
        SymmetryPerm h = g;
        for (std::size_t t = 0; t < slots.size(); ++t)
          h.mapping[static_cast<std::size_t>(slots[t])] = images[t];
        next.push_back(std::move(h));
      }
    } while (std::next_permutation(images.begin(), images.end()));
    group = std::move(next);
  }
  std::sort(group.begin(), group.end());
  return group;
}

std::vector<int> LabeledPartition::block(int slot) const {
  std::vector<int> out;
  for (int b = 0; b < dim(); ++b)
    if (slot_of[static_cast<std::size_t>(b)] == slot) out.push_back(b);
  return out;
}

std::vector<int> LabeledPartition::support() const {
  std::vector<int> out;
  for (int b = 0; b < dim(); ++b)
    if (slot_of[static_cast<std::size_t>(b)] != 0) out.push_back(b);
  return out;
}

void validate_partition(const ClassSpec& spec, const LabeledPartition& p) {
  if (p.dim() != spec.dim())
    throw Error(ErrorCode::InvalidPartition, "partition length differs from dimension");
  std::vector<int> counts(static_cast<std::size_t>(spec.num_slots()), 0);
  for (int s : p.slot_of) {
    if (s < 0 || s >= spec.num_slots())
      throw Error(ErrorCode::InvalidPartition, "slot index out of range");
    ++counts[static_cast<std::size_t>(s)];
  }
  for (int s = 0; s < spec.num_slots(); ++s)
    if (counts[static_cast<std::size_t>(s)] != spec.slot_size(s))
      throw Error(ErrorCode::InvalidPartition, "block size does not match multiplicity");
}

LabeledPartition apply_symmetry(const ClassSpec& spec, const SymmetryPerm& delta,
                                const LabeledPartition& p) {
  if (!preserves_multiplicities(spec, delta))
    throw Error(ErrorCode::InvalidPermutation, "permutation does not preserve multiplicities");
  validate_partition(spec, p);
  const SymmetryPerm inv = delta.inverse();
  LabeledPartition q;
  q.slot_of.reserve(p.slot_of.size());
  for (int s : p.slot_of) q.slot_of.push_back(inv(s));
  return q;
}

std::uint64_t apartment_size(const ClassSpec& spec) {
  // Product of binomials C(remaining, n_s); each factor stays exact because
  // the running product r * (remaining - j) / (j + 1) is always integral.
  // Saturates at UINT64_MAX, which is enough for cap checks.
  using Wide = unsigned __int128;
  constexpr Wide kMax = std::numeric_limits<std::uint64_t>::max();
  Wide total = 1;
  int remaining = spec.dim();
  for (int s = 0; s < spec.num_slots(); ++s) {
    const int take = spec.slot_size(s);
    Wide binom = 1;
    for (int j = 0; j < take; ++j) {
      binom = binom * static_cast<Wide>(remaining - j) / static_cast<Wide>(j + 1);
      if (binom > kMax) return static_cast<std::uint64_t>(kMax);
    }
    total *= binom;
    if (total > kMax) return static_cast<std::uint64_t>(kMax);
    remaining -= take;
  }
  return static_cast<std::uint64_t>(total);
}

}  // namespace apartmentlab
