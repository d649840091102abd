#include <doctest.h>

#include <cmath>
#include <random>

#include "apartmentlab/apartments.hpp"
#include "apartmentlab/error.hpp"
#include "apartmentlab/matrixlab.hpp"
#include "test_support.hpp"

using namespace apartmentlab;
using testing_support::make_spec;
using testing_support::partition;

namespace {

Matrix diag(std::initializer_list<double> values) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double v : values) d(i++) = v;
  return d.cast<Complex>().asDiagonal();
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

Eigen::VectorXd class_spectrum(const ClassSpec& spec) {
  std::vector<double> values;
  for (int s = 0; s < spec.num_slots(); ++s)
    for (int c = 0; c < spec.slot_size(s); ++c) values.push_back(spec.slot_value(s));
  std::sort(values.begin(), values.end());
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace

TEST_CASE("construction tolerances") {
  Matrix m = diag({1, 2, 3});
  m(0, 1) = Complex(0, 1e-6);
  CHECK(code_of([&] { HermitianOperator op(m); }) == ErrorCode::NotHermitian);
  CHECK(code_of([&] { Basis b(2.0 * Matrix::Identity(3, 3)); }) == ErrorCode::NotUnitary);
  CHECK(code_of([&] { Subspace s(Matrix::Ones(3, 1)); }) == ErrorCode::NotOrthonormal);

  const Basis u = Basis::random(6, 3);
  CHECK(max_norm(u.columns().adjoint() * u.columns() - Matrix::Identity(6, 6)) <= tol::unitary);
  CHECK(max_norm(Basis::random(6, 3).columns() - u.columns()) == 0.0);
}

TEST_CASE("build_operator examples") {
  const auto rank1 = make_spec({1}, {1}, 3);
  CHECK(max_norm(build_operator(Basis::standard(3), partition(3, {{0}}), rank1).matrix() - diag({1, 0, 0})) == 0.0);

  const auto spec = make_spec({1, 2}, {1, 1}, 5);
  const auto p = partition(5, {{0}, {1}});
  CHECK(max_norm(build_operator(Basis::standard(5), p, spec).matrix() - diag({1, 2, 0, 0, 0})) == 0.0);

  const Basis u = Basis::random(5, 17);
  const auto a = build_operator(u, p, spec);
  CHECK(max_norm(a.matrix() - u.columns() * diag({1, 2, 0, 0, 0}) * u.columns().adjoint()) <= 1e-12);
  CHECK((spectrum(a) - class_spectrum(spec)).cwiseAbs().maxCoeff() <= tol::eigen);

  CHECK(code_of([&] { build_operator(Basis::standard(4), p, spec); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("build_operator spectrum is basis independent") {
  for (const auto& spec : {make_spec({1, -1}, {2, 1}, 7), make_spec({1, 2}, {2, 2}, 8), make_spec({1}, {4}, 8)}) {
    const auto apartment = enumerate_apartment(spec);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Basis u = Basis::random(spec.dim(), seed);
      const auto& p = apartment[seed * 7 % apartment.size()];
      CHECK((spectrum(build_operator(u, p, spec)) - class_spectrum(spec)).cwiseAbs().maxCoeff() <= tol::eigen);
    }
  }
}

TEST_CASE("commutator_norm examples") {
  const HermitianOperator a(diag({1, 2, 0, 0, 0}));
  const HermitianOperator b(diag({2, 1, 0, 0, 0}));
  CHECK(commutator_norm(a, b) == 0.0);
  CHECK(commutator_norm(a, a) == 0.0);

  // Same operator in a frame that mixes e_0 (eigenvalue 1) with e_2 (kernel).
  const auto spec = make_spec({1, 2}, {1, 1}, 5);
  const auto p = partition(5, {{0}, {1}});
  const Basis rotated = rotated_frame(Basis::standard(5), 0, 2, M_PI / 4);
  const auto c = build_operator(rotated, p, spec);
  CHECK(commutator_norm(a, c) > 0.1);
  CHECK(commutator_norm(a, c) == doctest::Approx(commutator_norm(c, a)));
  CHECK(commutator_norm(a, c) == doctest::Approx(0.5));
}

TEST_CASE("is_orthogonal_numeric examples") {
  CHECK(is_orthogonal_numeric(HermitianOperator(diag({1, 0, 0})), HermitianOperator(diag({0, 1, 0}))));
  CHECK_FALSE(is_orthogonal_numeric(HermitianOperator(diag({1, 0, 0})), HermitianOperator(diag({1, 0, 0}))));

  const auto spec = make_spec({1, 2}, {1, 1}, 5);
  const Basis u = Basis::random(5, 99);
  const auto apartment = enumerate_apartment(spec);
  for (const auto& p : apartment)
    for (const auto& q : apartment) {
      if (p == q) continue;
      const auto a = build_operator(u, p, spec);
      const auto b = build_operator(u, q, spec);
      const bool oracle = classify_pair(p, q) == PairCase::Orthogonal;
      CHECK(is_orthogonal_numeric(a, b, 1e-8) == oracle);
      CHECK(is_orthogonal_numeric(b, a, 1e-8) == oracle);
      if (oracle) CHECK(commutator_norm(a, b) <= 2 * 1e-8);
    }
}

TEST_CASE("subspace_compatible examples") {
  const Basis e = Basis::standard(3);
  const std::vector<int> i0{0}, i1{1}, i01{0, 1};
  const Subspace x = Subspace::span_of(e, i0);
  CHECK(subspace_compatible(x, Subspace::span_of(e, i1)));
  Matrix diagonal = Matrix::Zero(3, 1);
  diagonal(0, 0) = diagonal(1, 0) = 1.0 / std::sqrt(2.0);
  const Subspace y(diagonal);
  CHECK_FALSE(subspace_compatible(x, y));
  CHECK(max_norm(x.projector() * y.projector() - y.projector() * x.projector()) == doctest::Approx(0.5));
  CHECK(subspace_compatible(x, Subspace::span_of(e, i01)));
}

TEST_CASE("recover_partition round-trips the whole apartment") {
  const auto spec = make_spec({1, 2}, {1, 1}, 5);
  const Basis u = Basis::random(5, 2024);
  for (const auto& p : enumerate_apartment(spec)) CHECK(recover_partition(build_operator(u, p, spec), u, spec) == p);

  CHECK(recover_partition(HermitianOperator(diag({1, 2, 0, 0, 0})), Basis::standard(5), spec) ==
        partition(5, {{0}, {1}}));

  const auto mixed = build_operator(rotated_frame(Basis::standard(5), 0, 1, M_PI / 4), partition(5, {{0}, {1}}), spec);
  CHECK(code_of([&] { recover_partition(mixed, Basis::standard(5), spec); }) == ErrorCode::NotInApartment);
  CHECK(code_of([&] { recover_partition(HermitianOperator(diag({1, 3, 0, 0, 0})), Basis::standard(5), spec); }) ==
        ErrorCode::EigenvalueMismatch);
}

TEST_CASE("conjugate examples") {
  const auto spec = make_spec({1, 2}, {1, 1}, 5);
  const auto a = build_operator(Basis::random(5, 8), partition(5, {{0}, {1}}), spec);
  CHECK(max_norm(conjugate(a, Basis::standard(5), false).matrix() - a.matrix()) <= 1e-15);

  const HermitianOperator d(diag({1, 2, 0}));
  CHECK(max_norm(conjugate(d, Basis::standard(3), true).matrix() - d.matrix()) == 0.0);

  for (bool anti : {false, true}) {
    const auto c = conjugate(a, Basis::random(5, 31), anti);
    CHECK((spectrum(c) - spectrum(a)).cwiseAbs().maxCoeff() <= tol::eigen);
  }
}

TEST_CASE("conjugation keeps the commutativity predicate") {
  const auto spec = make_spec({1, 2}, {2, 2}, 8);
  std::mt19937_64 rng(4);
  const auto apartment = enumerate_apartment(spec);
  for (int trial = 0; trial < 50; ++trial) {
    const auto& p = apartment[rng() % apartment.size()];
    const auto& q = apartment[rng() % apartment.size()];
    const auto a = build_operator(Basis::random(8, rng()), p, spec);
    const auto b = trial % 2 == 0 ? build_operator(Basis::standard(8), q, spec)
                                  : build_operator(Basis::random(8, rng()), q, spec);
    const Basis u = Basis::random(8, rng());
    for (bool anti : {false, true}) {
      const bool before = commutator_norm(a, b) <= tol::predicate;
      const bool after = commutator_norm(conjugate(a, u, anti), conjugate(b, u, anti)) <= tol::predicate;
      CHECK(before == after);
    }
  }
}

TEST_CASE("commutativity agrees with eigenspace compatibility") {
  std::mt19937_64 rng(77);
  for (const auto& spec : {make_spec({1, 2}, {1, 1}, 5), make_spec({1, 2}, {2, 2}, 8), make_spec({1}, {4}, 8)}) {
    const auto apartment = enumerate_apartment(spec);
    int commuting = 0;
    for (int trial = 0; trial < 60; ++trial) {
      const Basis base = Basis::random(spec.dim(), rng());
      const auto& p = apartment[rng() % apartment.size()];
      const auto& q = apartment[rng() % apartment.size()];
      const int i = static_cast<int>(rng() % static_cast<std::uint64_t>(spec.dim()));
      const int j = (i + 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(spec.dim() - 1))) % spec.dim();
      const Basis other = trial % 3 == 0 ? base : rotated_frame(base, i, j, 0.4);
      const auto a = build_operator(base, p, spec);
      const auto b = build_operator(other, q, spec);
      const bool commute = commutator_norm(a, b) <= tol::predicate;
      CHECK(commute == eigenspaces_compatible(a, b, spec));
      if (trial % 3 != 0) CHECK(commute == (in_a_ij(p, PairIndex::make(i, j)) || in_a_ij(q, PairIndex::make(i, j))));
      commuting += commute;
    }
    CHECK(commuting > 0);
    CHECK(commuting < 60);
  }
}

TEST_CASE("line_distance") {
  Vector u = Vector::Zero(3), v = Vector::Zero(3);
  u(0) = 1.0;
  v(0) = Complex(0, 2.0);
  CHECK(line_distance(u, v) == 0.0);
  v(0) = 1.0;
  v(1) = 1.0;
  CHECK(line_distance(u, v) == doctest::Approx(std::sqrt(0.5)));
  v(0) = 0.0;
  CHECK(line_distance(u, v) == doctest::Approx(1.0));
}

TEST_CASE("common_eigenbasis recovers the lines of an apartment") {
  const auto spec = make_spec({1, 2}, {1, 1}, 5);
  const Basis u = Basis::random(5, 123);
  std::vector<HermitianOperator> family;
  for (const auto& p : enumerate_apartment(spec)) family.push_back(build_operator(u, p, spec));
  const Basis w = common_eigenbasis(family, 1);
  for (int c = 0; c < 5; ++c) {
    double best = 1.0;
    for (int b = 0; b < 5; ++b) best = std::min(best, line_distance(w.column(c), u.column(b)));
    CHECK(best <= 1e-9);
  }
  for (const auto& op : family) CHECK_NOTHROW(recover_partition(op, w, spec));
}

TEST_CASE("rotated_frame only touches the chosen pair") {
  const Basis u = Basis::random(6, 9);
  const Basis r = rotated_frame(u, 1, 4, 0.3);
  for (int c : {0, 2, 3, 5}) CHECK(max_norm(r.columns().col(c) - u.columns().col(c)) == 0.0);
  CHECK(line_distance(r.column(1), u.column(1)) == doctest::Approx(std::sin(0.3)));
}

TEST_CASE("apply_symmetry_operator matches the combinatorial action") {
  const auto spec = make_spec({1, 2}, {2, 2}, 8);
  const Basis u = Basis::random(8, 12);
  const auto p = partition(8, {{0, 1}, {2, 3}});
  for (const auto& d : symmetry_group(spec)) {
    const auto numeric = apply_symmetry_operator(spec, d, build_operator(u, p, spec));
    CHECK(max_norm(numeric.matrix() - build_operator(u, apply_symmetry(spec, d, p), spec).matrix()) <= 1e-9);
  }
}
