#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "apartmentlab/error.hpp"
#include "apartmentlab/transforms.hpp"
#include "test_support.hpp"

using namespace apartmentlab;
using testing_support::make_spec;
using testing_support::partition;
using testing_support::perm;

namespace {

std::vector<Basis> domain_of(int n, std::initializer_list<std::uint64_t> seeds, bool standard_first = true) {
  std::vector<Basis> out;
  if (standard_first) out.push_back(Basis::standard(n));
  for (auto s : seeds) out.push_back(Basis::random(n, s));
  return out;
}

Matrix permutation_matrix(const std::vector<int>& sigma) {
  const auto n = static_cast<Eigen::Index>(sigma.size());
  Matrix m = Matrix::Zero(n, n);
  for (Eigen::Index b = 0; b < n; ++b) m(sigma[static_cast<std::size_t>(b)], b) = 1.0;
  return m;
}

void check_round_trip(const ModelMap& model) {
  const auto map = realize(model);
  const auto truth = realized_deltas(model);
  const auto outcome = decompose_map(model.spec(), map);
  REQUIRE(outcome.success());
  const auto& d = *outcome.decomposition;
  CHECK(d.antiunitary == model.antiunitary());
  CHECK_FALSE(d.flag_ambiguous);
  CHECK(d.residual <= tol::decomposition);
  CHECK(eigenline_distance(d, model.unitary(), model.antiunitary()) < 1e-6);
  REQUIRE(d.operators.size() == truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) CHECK(d.operators[i].delta == truth[i]);
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return ErrorCode::Malformed;
}

}  // namespace

TEST_CASE("DeltaRule text form") {
  CHECK(DeltaRule::parse("identity").kind() == DeltaRule::Kind::Identity);
  CHECK(DeltaRule::parse("random:42").to_string() == "random:42");
  CHECK(DeltaRule::parse("constant:0,2,1").to_string() == "constant:0,2,1");
  for (const char* bad : {"", "constant:", "constant:0,x", "random:-", "random:12z", "shuffle:1"})
    CHECK(code_of([&] { DeltaRule::parse(bad); }) == ErrorCode::Malformed);
}

TEST_CASE("make_model_map examples") {
  const auto spec = make_spec({1, 2}, {1, 1}, 5);
  const auto apartment = enumerate_apartment(spec);

  const auto id = make_model_map(spec, Basis::standard(5), false, DeltaRule::identity(), domain_of(5, {}));
  for (const auto& p : apartment) CHECK(max_norm(id.apply(0, p).matrix() - id.input(0, p).matrix()) == 0.0);

  const auto anti = make_model_map(spec, Basis::standard(5), true, DeltaRule::identity(), domain_of(5, {}));
  for (const auto& p : apartment) CHECK(max_norm(anti.apply(0, p).matrix() - anti.input(0, p).matrix()) == 0.0);

  const auto swap = make_model_map(spec, Basis::random(5, 3), false, DeltaRule::constant(SymmetryPerm::transposition(3, 1, 2)),
                                   domain_of(5, {9}));
  Eigen::VectorXd expected(5);
  expected << 0, 0, 0, 1, 2;
  for (int g = 0; g < 2; ++g)
    for (const auto& p : apartment) {
      CHECK((spectrum(swap.apply(g, p)) - expected).cwiseAbs().maxCoeff() <= tol::eigen);
      CHECK(swap.delta(g, p) == SymmetryPerm::transposition(3, 1, 2));
    }

  CHECK(code_of([&] {
          make_model_map(make_spec({1}, {2}, 5), Basis::standard(5), false,
                         DeltaRule::constant(SymmetryPerm::transposition(2, 0, 1)), domain_of(5, {}));
        }) == ErrorCode::InvalidPermutation);
  CHECK(code_of([&] { make_model_map(spec, Basis::standard(4), false, DeltaRule::identity(), domain_of(5, {})); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { make_model_map(spec, Basis::standard(5), false, DeltaRule::identity(), {}); }) ==
        ErrorCode::DomainIncomplete);
}

TEST_CASE("random delta rules are bijective and canonical") {
  for (const auto& spec : {make_spec({1, 2}, {2, 2}, 8), make_spec({1}, {4}, 8), make_spec({1, 2}, {1, 1}, 5)}) {
    const auto apartment = enumerate_apartment(spec);
    const auto rule = DeltaRule::random(17);
    std::vector<LabeledPartition> images;
    bool moved = false;
    for (const auto& p : apartment) {
      const auto d = canonical_delta(spec, rule.at(spec, 0, p), p);
      CHECK(preserves_multiplicities(spec, d));
      images.push_back(apply_symmetry(spec, d, p));
      moved |= !d.is_identity();
      for (const auto& g : symmetry_group(spec)) {
        if (g >= d) break;
        CHECK(apply_symmetry(spec, g, p) != images.back());
      }
    }
    std::sort(images.begin(), images.end());
    CHECK(images == apartment);
    CHECK(moved);
  }
}

TEST_CASE("conjugation equivariance") {
  std::mt19937_64 rng(10);
  for (const auto& spec : {make_spec({1, 2}, {1, 1}, 5), make_spec({1, 2}, {2, 2}, 8), make_spec({1}, {4}, 8),
                           make_spec({1, 2}, {1, 2}, 6, true)}) {
    const auto apartment = enumerate_apartment(spec);
    for (int trial = 0; trial < 10; ++trial) {
      const auto a = build_operator(Basis::random(spec.dim(), rng()), apartment[rng() % apartment.size()], spec);
      for (bool anti : {false, true}) CHECK(equivariance_defect(spec, Basis::random(spec.dim(), rng()), anti, a) <= 1e-9);
    }
  }
}

TEST_CASE("model maps preserve commutativity and orthogonality") {
  const auto spec = make_spec({1, 2}, {2, 2}, 8);
  const auto model = make_model_map(spec, Basis::random(8, 5), true, DeltaRule::random(3), domain_of(8, {6, 7}));
  const auto map = realize(model);
  const auto pairs = sample_index_pairs(map.size(), 500, 1);
  CHECK(pairs.size() == 500);
  const auto report = check_commutativity_preserving(map, pairs);
  CHECK(report.checked == 500);
  CHECK(report.ok());
  for (const auto& [x, y] : pairs)
    CHECK(is_orthogonal_numeric(map[x].input, map[y].input) == is_orthogonal_numeric(map[x].output, map[y].output));

  OperatorMap identity;
  for (const auto& e : map) identity.push_back({e.input, e.input});
  CHECK(check_commutativity_preserving(identity, pairs).ok());
}

TEST_CASE("a corrupted 5-dimensional map is caught") {
  const auto spec = make_spec({1, 2}, {1, 1}, 5);
  std::vector<Basis> domain{Basis::standard(5), rotated_frame(Basis::standard(5), 0, 3, M_PI / 4)};
  const auto model = make_model_map(spec, Basis::standard(5), false, DeltaRule::identity(), domain);
  auto map = realize(model);
  REQUIRE(map.size() == 40);
  std::size_t partner = 20;
  while (partner < map.size() && commutator_norm(map[0].input, map[partner].input) <= tol::predicate) ++partner;
  REQUIRE(partner < map.size());
  std::swap(map[0].output, map[partner].output);

  const auto report = check_commutativity_preserving(map, all_index_pairs(map.size()));
  REQUIRE_FALSE(report.ok());
  const auto& v = report.violations.front();
  const bool input_commutes = commutator_norm(map[v.first].input, map[v.second].input) <= tol::predicate;
  const bool output_commutes = commutator_norm(map[v.first].output, map[v.second].output) <= tol::predicate;
  CHECK(input_commutes != output_commutes);
  CHECK((v.input_norm <= tol::predicate) == input_commutes);
  CHECK((v.output_norm <= tol::predicate) == output_commutes);

  try {
    decompose_map(spec, map);
    FAIL("corrupted map decomposed");
  } catch (const MapHypothesisError& e) {
    CHECK(e.code() == ErrorCode::NotCommutativityPreserving);
    const bool in = commutator_norm(map[e.witness().first].input, map[e.witness().second].input) <= tol::predicate;
    const bool out = commutator_norm(map[e.witness().first].output, map[e.witness().second].output) <= tol::predicate;
    CHECK(in != out);
  }
}

TEST_CASE("decompose_map rejects non-bijective and incomplete maps") {
  const auto spec = make_spec({1, 2}, {1, 1}, 5);
  const auto model = make_model_map(spec, Basis::random(5, 1), false, DeltaRule::identity(), domain_of(5, {2}));
  auto map = realize(model);

  auto collapsed = map;
  collapsed[1].output = collapsed[0].output;
  CHECK(code_of([&] { decompose_map(spec, collapsed); }) == ErrorCode::NotBijective);

  auto partial = map;
  partial.erase(partial.begin() + 3);
  CHECK(code_of([&] { decompose_map(spec, partial); }) == ErrorCode::DomainIncomplete);

  CHECK(code_of([&] { decompose_map(spec, {}); }) == ErrorCode::DomainIncomplete);
}

TEST_CASE("biorthogonal_closure examples") {
  const auto rank1 = make_spec({1}, {1}, 3);
  const auto r1 = enumerate_apartment(rank1);
  for (const auto& a : r1) CHECK(biorthogonal_closure(a, r1) == std::vector<LabeledPartition>{a});

  const auto a5 = enumerate_apartment(make_spec({1, 2}, {1, 1}, 5));
  const auto closure = biorthogonal_closure(partition(5, {{0}, {1}}), a5);
  CHECK(closure.size() == 2);
  for (const auto& b : closure) CHECK(b.support() == std::vector<int>{0, 1});

  const auto c2 = enumerate_apartment(make_spec({1, 2}, {2, 2}, 8));
  const auto big = biorthogonal_closure(partition(8, {{0, 1}, {2, 3}}), c2);
  CHECK(big.size() == 6);
  for (const auto& p : c2) CHECK(biorthogonal_closure(p, c2).size() == 6);
}

TEST_CASE("induced Grassmannian map") {
  const auto spec = make_spec({1, 2}, {1, 1}, 5);
  const auto e = Basis::standard(5);

  const auto id = realize(make_model_map(spec, e, false, DeltaRule::identity(), {e}));
  for (const auto& img : induced_grassmann_map(spec, e, id))
    CHECK(aligned_indices(img.image_range, e) == img.support);

  const std::vector<int> sigma{3, 0, 4, 1, 2};
  const Basis shuffle(permutation_matrix(sigma));
  const auto shuffled = realize(make_model_map(spec, shuffle, false, DeltaRule::random(5), {e}));
  const auto images = induced_grassmann_map(spec, e, shuffled);
  CHECK(images.size() == 10);
  for (const auto& img : images) {
    std::vector<int> expected;
    for (int b : img.support) expected.push_back(sigma[static_cast<std::size_t>(b)]);
    std::sort(expected.begin(), expected.end());
    CHECK(aligned_indices(img.image_range, e) == expected);
  }

  auto broken = id;
  for (std::size_t i = 1; i < broken.size(); ++i)
    if (range_subspace(broken[i].input).projector().isApprox(range_subspace(broken[0].input).projector())) {
      broken[i].output = broken[(i + 5) % broken.size()].output;
      break;
    }
  CHECK(code_of([&] { induced_grassmann_map(spec, e, broken); }) == ErrorCode::IllDefinedMap);

  const auto proj = make_spec({1}, {4}, 8);
  for (const auto& [from, to] : induced_grassmann_map(complement_partition_map(proj))) {
    std::vector<int> complement;
    for (int b = 0; b < 8; ++b)
      if (!std::binary_search(from.begin(), from.end(), b)) complement.push_back(b);
    CHECK(to == complement);
  }
}

TEST_CASE("decompose_map: identity map") {
  const auto spec = make_spec({1, 2}, {1, 1}, 5);
  const auto model = make_model_map(spec, Basis::standard(5), false, DeltaRule::identity(), domain_of(5, {4}));
  const auto outcome = decompose_map(spec, realize(model));
  REQUIRE(outcome.success());
  const auto& d = *outcome.decomposition;
  CHECK_FALSE(d.antiunitary);
  CHECK(d.phases_fixed);
  CHECK(phase_aligned_distance(d.unitary.columns(), Matrix::Identity(5, 5)) < 1e-6);
  for (const auto& op : d.operators) CHECK(op.delta.is_identity());

  // Real data on one apartment: both flags fit.
  const auto single = make_model_map(spec, Basis::standard(5), false, DeltaRule::identity(), domain_of(5, {}));
  const auto one = decompose_map(spec, realize(single));
  REQUIRE(one.success());
  CHECK(one.decomposition->flag_ambiguous);
  CHECK_FALSE(one.decomposition->phases_fixed);
}

TEST_CASE("decompose_map round-trips model maps") {
  const auto c2 = make_spec({1, 2}, {2, 2}, 8);
  check_round_trip(make_model_map(c2, Basis::random(8, 101), true, DeltaRule::random(7), domain_of(8, {55})));
  check_round_trip(make_model_map(c2, Basis::random(8, 102), false,
                                  DeltaRule::constant(SymmetryPerm::transposition(3, 1, 2)), domain_of(8, {56})));
  const auto a = make_spec({1, 2}, {1, 1}, 5);
  for (std::uint64_t seed = 0; seed < 4; ++seed)
    check_round_trip(make_model_map(a, Basis::random(5, seed), seed % 2 == 1, DeltaRule::random(seed),
                                    domain_of(5, {seed + 100, seed + 200}, false)));
}

TEST_CASE("rigidity: distinct slot sizes force the identity delta") {
  const auto d = make_spec({1, 2}, {1, 2}, 6, true);
  CHECK(symmetry_group(d).size() == 1);
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto model = make_model_map(d, Basis::random(6, seed), seed == 1, DeltaRule::random(seed), domain_of(6, {seed + 9}));
    const auto outcome = decompose_map(d, realize(model));
    REQUIRE(outcome.success());
    for (const auto& op : outcome.decomposition->operators) CHECK(op.delta.is_identity());
  }
}

TEST_CASE("decompose_map reports out-of-form maps") {
  // A bijection of one apartment onto itself commutes trivially but is not
  // induced by any frame: send each operator to the next in enumeration order.
  const auto spec = make_spec({1, 2}, {1, 1}, 5);
  const auto e = Basis::standard(5);
  const auto apartment = enumerate_apartment(spec);
  const auto g = Basis::random(5, 8);
  OperatorMap map;
  for (std::size_t i = 0; i < apartment.size(); ++i)
    map.push_back({build_operator(e, apartment[i], spec), build_operator(g, apartment[(i + 1) % apartment.size()], spec)});
  const auto outcome = decompose_map(spec, map);
  CHECK_FALSE(outcome.success());
  CHECK_FALSE(outcome.failure.empty());
}

TEST_CASE("projection analyzer") {
  const auto proj = make_spec({1}, {4}, 8);

  const auto direct = make_model_map(proj, Basis::random(8, 1), false, DeltaRule::identity(), domain_of(8, {2}));
  auto analysis = analyze_projection_map(proj, realize(direct));
  REQUIRE(analysis.has_value());
  CHECK(std::none_of(analysis->complement.begin(), analysis->complement.end(), [](bool b) { return b; }));

  const auto global = make_model_map(proj, Basis::random(8, 3), true, DeltaRule::constant(SymmetryPerm::transposition(2, 0, 1)),
                                     domain_of(8, {4}));
  analysis = analyze_projection_map(proj, realize(global));
  REQUIRE(analysis.has_value());
  CHECK(std::all_of(analysis->complement.begin(), analysis->complement.end(), [](bool b) { return b; }));
  CHECK(analysis->decomposition.antiunitary);

  const auto mixed = make_model_map(proj, Basis::random(8, 5), false, DeltaRule::random(11), domain_of(8, {6}));
  const auto truth = realized_deltas(mixed);
  analysis = analyze_projection_map(proj, realize(mixed));
  REQUIRE(analysis.has_value());
  REQUIRE(analysis->complement.size() == truth.size());
  std::size_t flips = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    CHECK(analysis->complement[i] == !truth[i].is_identity());
    flips += analysis->complement[i];
  }
  CHECK(flips > 0);
  CHECK(flips < truth.size());

  CHECK_THROWS_AS(analyze_projection_map(make_spec({1, 2}, {2, 2}, 8), realize(direct)), Error);
}

TEST_CASE("phase_aligned_distance ignores a global phase") {
  const Matrix u = Basis::random(4, 2).columns();
  CHECK(phase_aligned_distance(std::polar(1.0, 0.7) * u, u) <= 1e-14);
  CHECK(phase_aligned_distance(u, Basis::random(4, 3).columns()) > 0.01);
}

TEST_CASE("sample_index_pairs is deterministic and distinct") {
  const auto a = sample_index_pairs(50, 300, 9);
  CHECK(a == sample_index_pairs(50, 300, 9));
  auto sorted = a;
  std::sort(sorted.begin(), sorted.end());
  CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
  for (const auto& [x, y] : a) CHECK(x < y);
  CHECK(all_index_pairs(5).size() == 10);
}
