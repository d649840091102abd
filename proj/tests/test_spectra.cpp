#include <doctest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "apartmentlab/apartments.hpp"
#include "apartmentlab/error.hpp"
#include "apartmentlab/matrixlab.hpp"
#include "apartmentlab/spectra.hpp"
#include "test_support.hpp"

using namespace apartmentlab;
using testing_support::make_spec;
using testing_support::partition;
using testing_support::perm;

namespace {

ErrorCode rejection(const RawSpec& raw) {
  try {
    validate_spec(raw);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("spec was accepted");
  return ErrorCode::Malformed;
}

// All permutations of the slots, filtered by multiplicity.
std::vector<SymmetryPerm> brute_force_group(const ClassSpec& spec) {
  std::vector<int> m(static_cast<std::size_t>(spec.num_slots()));
  std::iota(m.begin(), m.end(), 0);
  std::vector<SymmetryPerm> out;
  do {
    bool ok = true;
    for (int i = 0; i < spec.num_slots(); ++i) ok = ok && spec.slot_size(m[static_cast<std::size_t>(i)]) == spec.slot_size(i);
    if (ok) out.push_back({m});
  } while (std::next_permutation(m.begin(), m.end()));
  return out;
}

std::vector<ClassSpec> reference_specs() {
  return {
      make_spec({1, 2}, {1, 1}, 5),
      make_spec({1, -1}, {2, 1}, 7),
      make_spec({1, 2, 3, 4}, {1, 1, 1, 1}, 8),
      make_spec({1, 2}, {2, 2}, 8),
      make_spec({1}, {4}, 8),
      make_spec({1, 2}, {1, 2}, 6, true),
      make_spec({1}, {1}, 3),
  };
}

LabeledPartition random_partition(const ClassSpec& spec, std::mt19937_64& rng) {
  LabeledPartition p;
  for (int s = 0; s < spec.num_slots(); ++s)
    for (int c = 0; c < spec.slot_size(s); ++c) p.slot_of.push_back(s);
  std::shuffle(p.slot_of.begin(), p.slot_of.end(), rng);
  return p;
}

}  // namespace

TEST_CASE("validate_spec derives the kernel and records the assumptions") {
  const auto a = make_spec({1, 2}, {1, 1}, 5);
  CHECK(a.kernel_dim() == 3);
  CHECK(a.rank() == 2);
  CHECK(a.assumptions_hold());
  CHECK(a.warnings().empty());

  const auto c = make_spec({1, 2, 3, 4}, {1, 1, 1, 1}, 8);
  CHECK(c.kernel_dim() == 4);
  CHECK(c.assumptions_hold());
}

TEST_CASE("validate_spec names the violated invariant") {
  CHECK(rejection({{1, 0}, {1, 1}, 5, false}) == ErrorCode::ZeroEigenvalue);
  CHECK(rejection({{1, 1}, {1, 1}, 5, false}) == ErrorCode::DuplicateEigenvalue);
  CHECK(rejection({{1, 2}, {1, 0}, 5, false}) == ErrorCode::MultiplicityBelowOne);
  CHECK(rejection({{1, 2}, {3, 3}, 5, false}) == ErrorCode::RankExceedsDim);
  CHECK(rejection({{1}, {1}, 2, false}) == ErrorCode::DimBelowThree);
  CHECK(rejection({{1, 2}, {1}, 5, false}) == ErrorCode::LengthMismatch);
  CHECK(rejection({{1, 2}, {2, 2}, 6, false}) == ErrorCode::KernelSmallerThanRange);
  CHECK(rejection({{1, 2}, {1, 2}, 6, false}) == ErrorCode::HalfDimRankBelowFour);
}

TEST_CASE("assumption violations need the override and are flagged") {
  const auto d = make_spec({1, 2}, {1, 2}, 6, true);
  CHECK_FALSE(d.assumptions_hold());
  CHECK(d.assumption_override());
  REQUIRE_FALSE(d.warnings().empty());
}

TEST_CASE("close eigenvalues produce a recovery warning") {
  const auto s = make_spec({1.0, 1.0 + 1e-9}, {1, 1}, 5);
  CHECK_FALSE(s.warnings().empty());
}

TEST_CASE("symmetry_group examples") {
  const auto g1 = symmetry_group(make_spec({1, 2}, {1, 1}, 5));
  REQUIRE(g1.size() == 2);
  CHECK(g1[0].is_identity());
  CHECK(g1[1] == SymmetryPerm::transposition(3, 1, 2));

  const auto g2 = symmetry_group(make_spec({1}, {2}, 5));
  REQUIRE(g2.size() == 1);
  CHECK(g2[0].is_identity());

  const auto g3 = symmetry_group(make_spec({1}, {4}, 8));
  REQUIRE(g3.size() == 2);
  CHECK(g3[1] == SymmetryPerm::transposition(2, 0, 1));
}

TEST_CASE("symmetry_group equals the brute-force filter and is a group") {
  for (const auto& spec : reference_specs()) {
    const auto group = symmetry_group(spec);
    CHECK(testing_support::same_set(group, brute_force_group(spec)));
    CHECK(std::is_sorted(group.begin(), group.end()));
    CHECK(group.front().is_identity());
    for (const auto& a : group) {
      CHECK(std::binary_search(group.begin(), group.end(), a.inverse()));
      CHECK(compose(a, a.inverse()).is_identity());
      for (const auto& b : group) CHECK(std::binary_search(group.begin(), group.end(), compose(a, b)));
    }
  }
}

TEST_CASE("apply_symmetry examples") {
  const auto spec = make_spec({1, 2}, {1, 1}, 5);
  const auto p = partition(5, {{0}, {1}});
  CHECK(apply_symmetry(spec, SymmetryPerm::identity(3), p) == p);
  CHECK(apply_symmetry(spec, SymmetryPerm::transposition(3, 1, 2), p) == partition(5, {{1}, {0}}));

  const auto proj = make_spec({1}, {4}, 8);
  const auto q = apply_symmetry(proj, SymmetryPerm::transposition(2, 0, 1), partition(8, {{0, 1, 2, 3}}));
  CHECK(q.support() == std::vector<int>{4, 5, 6, 7});
}

TEST_CASE("apply_symmetry rejects permutations outside S(C)") {
  const auto spec = make_spec({1}, {2}, 5);
  CHECK_THROWS_AS(apply_symmetry(spec, SymmetryPerm::transposition(2, 0, 1), partition(5, {{0, 1}})), Error);
  CHECK_FALSE(preserves_multiplicities(spec, perm({0, 0})));
}

TEST_CASE("apply_symmetry is an action and preserves block sizes") {
  std::mt19937_64 rng(11);
  for (const auto& spec : reference_specs()) {
    const auto group = symmetry_group(spec);
    for (int trial = 0; trial < 20; ++trial) {
      const auto p = random_partition(spec, rng);
      for (const auto& d : group) {
        const auto q = apply_symmetry(spec, d, p);
        CHECK_NOTHROW(validate_partition(spec, q));
        for (int b = 0; b < spec.dim(); ++b)
          CHECK(d(q.slot_of[static_cast<std::size_t>(b)]) == p.slot_of[static_cast<std::size_t>(b)]);
        for (const auto& g : group)
          CHECK(apply_symmetry(spec, compose(d, g), p) == apply_symmetry(spec, d, apply_symmetry(spec, g, p)));
      }
    }
  }
}

TEST_CASE("symmetric images of commuting operators commute") {
  std::mt19937_64 rng(5);
  for (const auto& spec : reference_specs()) {
    const Basis frame = Basis::random(spec.dim(), rng());
    const auto group = symmetry_group(spec);
    for (int trial = 0; trial < 10; ++trial) {
      const auto p = random_partition(spec, rng);
      const auto q = random_partition(spec, rng);
      for (const auto& d : group)
        for (const auto& g : group) {
          const auto a = build_operator(frame, apply_symmetry(spec, d, p), spec);
          const auto b = build_operator(frame, apply_symmetry(spec, g, q), spec);
          CHECK(commutator_norm(a, b) <= tol::predicate);
        }
    }
  }
}

TEST_CASE("apartment_size examples and enumeration length") {
  CHECK(apartment_size(make_spec({1, 2}, {1, 1}, 5)) == 20);
  CHECK(apartment_size(make_spec({1}, {1}, 3)) == 3);
  CHECK(apartment_size(make_spec({1, 2}, {2, 2}, 8)) == 420);
  CHECK(apartment_size(make_spec({1, 2, 3}, {2, 2, 2}, 30)) == 53'439'750);
  CHECK(apartment_size(make_spec({1, 2}, {50, 50}, 200)) == std::numeric_limits<std::uint64_t>::max());
  for (const auto& spec : reference_specs()) {
    if (apartment_size(spec) > 10000) continue;
    std::uint64_t count = 0;
    for_each_partition(spec, [&](const LabeledPartition&) { ++count; });
    CHECK(count == apartment_size(spec));
  }
}

TEST_CASE("canonical slot order sorts eigenvalues descending behind the kernel") {
  const auto spec = make_spec({1, 3, 2}, {1, 1, 1}, 7);
  CHECK(spec.canonical_slot_order() == std::vector<int>{0, 2, 3, 1});
  CHECK(spec == make_spec({3, 2, 1}, {1, 1, 1}, 7));
  CHECK_FALSE(spec == make_spec({3, 2, 1}, {1, 1, 2}, 9));
}
