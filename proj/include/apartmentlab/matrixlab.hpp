#pragma once

// Dense numeric realization of combinatorial operators and the matrix-level
// predicates (commutativity, orthogonality, subspace compatibility) used to
// cross-check the combinatorics.

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "apartmentlab/spectra.hpp"

namespace apartmentlab {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

namespace tol {
inline constexpr double construction = 1e-12;  // Hermitian check on construction
inline constexpr double unitary = 1e-10;        // U^* U = Id, orthonormal generators
inline constexpr double predicate = 1e-8;       // commutator / orthogonality tests
inline constexpr double eigen = 1e-9;           // eigenvalue matching
inline constexpr double decomposition = 1e-6;   // canonical-form residual
}  // namespace tol

/// Entrywise max norm ||M||_max.
double max_norm(const Matrix& m);

class HermitianOperator {
 public:
  /// Throws Error(NotHermitian) if ||M - M^*||_max > tol::construction.
  explicit HermitianOperator(Matrix m);

  const Matrix& matrix() const noexcept { return m_; }
  int dim() const noexcept { return static_cast<int>(m_.rows()); }

 private:
  Matrix m_;
};

/// Orthonormal basis of C^n stored as the columns of a unitary matrix.
class Basis {
 public:
  explicit Basis(Matrix columns);

  static Basis standard(int n);
  /// Haar-distributed unitary: QR of a seeded complex Gaussian matrix with
  /// the phases of R's diagonal moved into Q.
  static Basis random(int n, std::uint64_t seed);

  const Matrix& columns() const noexcept { return cols_; }
  Vector column(int b) const { return cols_.col(b); }
  int dim() const noexcept { return static_cast<int>(cols_.cols()); }

 private:
  Matrix cols_;
};

/// A subspace given by orthonormal generators (n x d).
class Subspace {
 public:
  explicit Subspace(Matrix generators);

  static Subspace span_of(const Basis& basis, std::span<const int> indices);

  const Matrix& generators() const noexcept { return gens_; }
  int ambient_dim() const noexcept { return static_cast<int>(gens_.rows()); }
  int dim() const noexcept { return static_cast<int>(gens_.cols()); }
  Matrix projector() const { return gens_ * gens_.adjoint(); }

 private:
  Matrix gens_;
};

HermitianOperator build_operator(const Basis& basis, const LabeledPartition& p,
                                 const ClassSpec& spec);

/// ||AB - BA||_max.
double commutator_norm(const HermitianOperator& a, const HermitianOperator& b);

/// AB = BA = 0 within tol (max norm).
bool is_orthogonal_numeric(const HermitianOperator& a, const HermitianOperator& b,
                           double tolerance = tol::predicate);

/// Projections commute within tol.
bool subspace_compatible(const Subspace& x, const Subspace& y,
                         double tolerance = tol::predicate);

/// Inverse of build_operator. Throws NotInApartment if some basis column is
/// not an eigenvector, EigenvalueMismatch if an eigenvalue matches no slot or
/// the block sizes disagree with the spec.
LabeledPartition recover_partition(const HermitianOperator& a, const Basis& basis,
                                   const ClassSpec& spec, double tolerance = tol::eigen);

/// U A U^*, or U conj(A) U^* when antiunitary is set.
HermitianOperator conjugate(const HermitianOperator& a, const Basis& u, bool antiunitary);

/// Sorted eigenvalues.
Eigen::VectorXd spectrum(const HermitianOperator& a);

/// Eigenspace of `a` for every slot of `spec`, in slot order. Throws
/// EigenvalueMismatch when the spectrum is not that of the class.
std::vector<Subspace> slot_eigenspaces(const HermitianOperator& a, const ClassSpec& spec,
                                       double tolerance = tol::eigen);

/// Closure of the range (span of eigenvectors with nonzero eigenvalue).
Subspace range_subspace(const HermitianOperator& a, double tolerance = tol::eigen);

/// delta(A) for an arbitrary member of the class: eigenspace of slot i
/// becomes the old eigenspace of slot delta(i).
HermitianOperator apply_symmetry_operator(const ClassSpec& spec, const SymmetryPerm& delta,
                                          const HermitianOperator& a);

/// Von Neumann's criterion evaluated directly: every pair of eigenspaces
/// (kernels included) passes subspace_compatible.
bool eigenspaces_compatible(const HermitianOperator& a, const HermitianOperator& b,
                            const ClassSpec& spec, double tolerance = tol::predicate);

/// sqrt(1 - |<u,v>|^2) for normalized u, v: the distance between the lines.
double line_distance(const Vector& u, const Vector& v);

/// Common eigenbasis of a commuting family via a seeded Gaussian linear
/// combination (its spectrum is simple whenever the joint eigenspaces are
/// one-dimensional). Column phases are normalized so the largest-modulus
/// entry of every column is real and positive.
Basis common_eigenbasis(std::span<const HermitianOperator> family, std::uint64_t seed);

/// Replaces columns i, j by a rotation of angle theta inside their span,
/// producing a second apartment that shares exactly A_ij with the first.
Basis rotated_frame(const Basis& basis, int i, int j, double theta);

}  // namespace apartmentlab
