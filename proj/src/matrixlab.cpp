#include "apartmentlab/matrixlab.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "apartmentlab/error.hpp"

namespace apartmentlab {

namespace {

void require_same_dim(int a, int b) {
  if (a != b) throw Error(ErrorCode::DimensionMismatch, "operands differ in dimension");
}

// Rotates the phase of every column so its largest-modulus entry is real
// and positive. Deterministic representative of each line.
void normalize_column_phases(Matrix& cols) {
  for (Eigen::Index c = 0; c < cols.cols(); ++c) {
    Eigen::Index best = 0;
    cols.col(c).cwiseAbs().maxCoeff(&best);
    const Complex pivot = cols(best, c);
    if (std::abs(pivot) > 0.0) cols.col(c) *= std::conj(pivot) / std::abs(pivot);
  }
}

}  // namespace

double max_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return std::sqrt(m.cwiseAbs2().maxCoeff());
}

HermitianOperator::HermitianOperator(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols())
    throw Error(ErrorCode::DimensionMismatch, "operator matrix is not square");
  if (max_norm(m_ - m_.adjoint()) > tol::construction)
    throw Error(ErrorCode::NotHermitian, "matrix is not self-adjoint");
  m_ = (0.5 * (m_ + m_.adjoint())).eval();
}

Basis::Basis(Matrix columns) : cols_(std::move(columns)) {
  if (cols_.rows() != cols_.cols())
    throw Error(ErrorCode::DimensionMismatch, "basis matrix is not square");
  const Matrix gram = cols_.adjoint() * cols_;
  if (max_norm(gram - Matrix::Identity(cols_.rows(), cols_.cols())) > tol::unitary)
    throw Error(ErrorCode::NotUnitary, "basis columns are not orthonormal");
}

Basis Basis::standard(int n) { return Basis(Matrix::Identity(n, n)); }

Basis Basis::random(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(n, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < n; ++r) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      g(r, c) = Complex(re, im);
    }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < n; ++c) {
    const Complex d = r(c, c);
    if (std::abs(d) > 0.0) q.col(c) *= d / std::abs(d);
  }
  return Basis(std::move(q));
}

Subspace::Subspace(Matrix generators) : gens_(std::move(generators)) {
  const Matrix gram = gens_.adjoint() * gens_;
  if (max_norm(gram - Matrix::Identity(gens_.cols(), gens_.cols())) > tol::unitary)
    throw Error(ErrorCode::NotOrthonormal, "subspace generators are not orthonormal");
}

Subspace Subspace::span_of(const Basis& basis, std::span<const int> indices) {
  Matrix gens(basis.dim(), static_cast<Eigen::Index>(indices.size()));
  for (std::size_t t = 0; t < indices.size(); ++t)
    gens.col(static_cast<Eigen::Index>(t)) = basis.columns().col(indices[t]);
  return Subspace(std::move(gens));
}

HermitianOperator build_operator(const Basis& basis, const LabeledPartition& p,
                                 const ClassSpec& spec) {
  require_same_dim(basis.dim(), spec.dim());
  validate_partition(spec, p);
  Eigen::VectorXd diag(spec.dim());
  for (int b = 0; b < spec.dim(); ++b) diag(b) = spec.slot_value(p.slot_of[static_cast<std::size_t>(b)]);
  const Matrix& u = basis.columns();
  Matrix m = u * diag.cast<Complex>().asDiagonal() * u.adjoint();
  m = (0.5 * (m + m.adjoint())).eval();
  return HermitianOperator(std::move(m));
}

double commutator_norm(const HermitianOperator& a, const HermitianOperator& b) {
  require_same_dim(a.dim(), b.dim());
  const Matrix& x = a.matrix();
  const Matrix& y = b.matrix();
  return max_norm(x * y - y * x);
}

bool is_orthogonal_numeric(const HermitianOperator& a, const HermitianOperator& b,
                           double tolerance) {
  require_same_dim(a.dim(), b.dim());
  return max_norm(a.matrix() * b.matrix()) <= tolerance &&
         max_norm(b.matrix() * a.matrix()) <= tolerance;
}

bool subspace_compatible(const Subspace& x, const Subspace& y, double tolerance) {
  require_same_dim(x.ambient_dim(), y.ambient_dim());
  const Matrix px = x.projector();
  const Matrix py = y.projector();
  return max_norm(px * py - py * px) <= tolerance;
}

LabeledPartition recover_partition(const HermitianOperator& a, const Basis& basis,
                                   const ClassSpec& spec, double tolerance) {
  require_same_dim(a.dim(), basis.dim());
  require_same_dim(a.dim(), spec.dim());
  LabeledPartition p;
  p.slot_of.resize(static_cast<std::size_t>(spec.dim()));
  for (int b = 0; b < spec.dim(); ++b) {
    const Vector w = basis.columns().col(b);
    const Vector aw = a.matrix() * w;
    const double lambda = w.dot(aw).real();
    if ((aw - lambda * w).cwiseAbs().maxCoeff() > tolerance)
      throw Error(ErrorCode::NotInApartment,
                  "basis vector " + std::to_string(b) + " is not an eigenvector");
    int slot = -1;
    for (int s = 0; s < spec.num_slots(); ++s)
      if (std::abs(lambda - spec.slot_value(s)) <= tolerance) slot = s;
    if (slot < 0)
      throw Error(ErrorCode::EigenvalueMismatch,
                  "eigenvalue " + std::to_string(lambda) + " matches no slot");
    p.slot_of[static_cast<std::size_t>(b)] = slot;
  }
  try {
    validate_partition(spec, p);
  } catch (const Error&) {
    throw Error(ErrorCode::EigenvalueMismatch, "eigenvalue multiplicities differ from the class");
  }
  return p;
}

HermitianOperator conjugate(const HermitianOperator& a, const Basis& u, bool antiunitary) {
  require_same_dim(a.dim(), u.dim());
  const Matrix& um = u.columns();
  Matrix m = antiunitary ? Matrix(um * a.matrix().conjugate() * um.adjoint())
                         : Matrix(um * a.matrix() * um.adjoint());
  m = (0.5 * (m + m.adjoint())).eval();
  return HermitianOperator(std::move(m));
}

Eigen::VectorXd spectrum(const HermitianOperator& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

std::vector<Subspace> slot_eigenspaces(const HermitianOperator& a, const ClassSpec& spec,
                                       double tolerance) {
  require_same_dim(a.dim(), spec.dim());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix());
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(spec.num_slots()));
  for (Eigen::Index r = 0; r < values.size(); ++r) {
    int slot = -1;
    for (int s = 0; s < spec.num_slots(); ++s)
      if (std::abs(values(r) - spec.slot_value(s)) <= tolerance) slot = s;
    if (slot < 0)
      throw Error(ErrorCode::EigenvalueMismatch,
                  "eigenvalue " + std::to_string(values(r)) + " matches no slot");
    members[static_cast<std::size_t>(slot)].push_back(r);
  }
  std::vector<Subspace> spaces;
  for (int s = 0; s < spec.num_slots(); ++s) {
    const auto& idx = members[static_cast<std::size_t>(s)];
    if (static_cast<int>(idx.size()) != spec.slot_size(s))
      throw Error(ErrorCode::EigenvalueMismatch, "eigenvalue multiplicities differ from the class");
    Matrix gens(spec.dim(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t t = 0; t < idx.size(); ++t) gens.col(static_cast<Eigen::Index>(t)) = vectors.col(idx[t]);
    spaces.emplace_back(std::move(gens));
  }
  return spaces;
}

Subspace range_subspace(const HermitianOperator& a, double tolerance) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(a.matrix());
  std::vector<Eigen::Index> idx;
  for (Eigen::Index r = 0; r < solver.eigenvalues().size(); ++r)
    if (std::abs(solver.eigenvalues()(r)) > tolerance) idx.push_back(r);
  Matrix gens(a.dim(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t t = 0; t < idx.size(); ++t)
    gens.col(static_cast<Eigen::Index>(t)) = solver.eigenvectors().col(idx[t]);
  return Subspace(std::move(gens));
}

HermitianOperator apply_symmetry_operator(const ClassSpec& spec, const SymmetryPerm& delta,
                                          const HermitianOperator& a) {
  if (!preserves_multiplicities(spec, delta))
    throw Error(ErrorCode::InvalidPermutation, "permutation does not preserve multiplicities");
  const auto spaces = slot_eigenspaces(a, spec);
  Matrix m = Matrix::Zero(spec.dim(), spec.dim());
  for (int s = 1; s < spec.num_slots(); ++s)
    m += spec.slot_value(s) * spaces[static_cast<std::size_t>(delta(s))].projector();
  m = (0.5 * (m + m.adjoint())).eval();
  return HermitianOperator(std::move(m));
}

bool eigenspaces_compatible(const HermitianOperator& a, const HermitianOperator& b,
                            const ClassSpec& spec, double tolerance) {
  const auto xs = slot_eigenspaces(a, spec);
  const auto ys = slot_eigenspaces(b, spec);
  for (const auto& x : xs)
    for (const auto& y : ys)
      if (!subspace_compatible(x, y, tolerance)) return false;
  return true;
}

double line_distance(const Vector& u, const Vector& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 1.0;
  // Norm of the rejection of u from v: equals sqrt(1 - |<u,v>|^2) without
  // the cancellation near 1.
  const Vector a = u / nu;
  const Vector b = v / nv;
  return std::min(1.0, (a - b * b.dot(a)).norm());
}

Basis common_eigenbasis(std::span<const HermitianOperator> family, std::uint64_t seed) {
  if (family.empty()) throw Error(ErrorCode::EmptySubset, "empty operator family");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> coeff(0.0, 1.0);
  const int n = family.front().dim();
  Matrix combo = Matrix::Zero(n, n);
  for (const auto& op : family) {
    require_same_dim(op.dim(), n);
    combo += coeff(rng) * op.matrix();
  }
  combo = (0.5 * (combo + combo.adjoint())).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(combo);
  Matrix cols = solver.eigenvectors();
  normalize_column_phases(cols);
  return Basis(std::move(cols));
}

Basis rotated_frame(const Basis& basis, int i, int j, double theta) {
  Matrix cols = basis.columns();
  const Vector wi = cols.col(i);
  const Vector wj = cols.col(j);
  cols.col(i) = std::cos(theta) * wi + std::sin(theta) * wj;
  cols.col(j) = -std::sin(theta) * wi + std::cos(theta) * wj;
  return Basis(std::move(cols));
}

}  // namespace apartmentlab
