#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "chq/matrix.hpp"
#include "chq/validation.hpp"

namespace chq {

using StateVector = std::vector<Complex>;
using BlochAxis = std::array<double, 3>;

class HilbertSpace {
 public:
  /// Throws DomainError for dim == 0.
  explicit HilbertSpace(std::size_t dim);
  [[nodiscard]] std::size_t dim() const { return dim_; }

 private:
  std::size_t dim_;
};

/// A Hermitian idempotent matrix with a display label ("x+", "z-", ...).
class Projector {
 public:
  /// Throws DomainError when the matrix is not a projector within tol.
  Projector(ComplexMatrix matrix, std::string label = {}, const Tolerance& tol = {});

  [[nodiscard]] const ComplexMatrix& matrix() const { return matrix_; }
  [[nodiscard]] const std::string& label() const { return label_; }
  [[nodiscard]] std::size_t dim() const { return matrix_.rows(); }
  /// Tr P rounded to the nearest integer.
  [[nodiscard]] std::size_t rank() const;
  /// I - P.
  [[nodiscard]] Projector complement(std::string label = {}) const;

 private:
  ComplexMatrix matrix_;
  std::string label_;
};

class DensityOperator {
 public:
  /// Throws DomainError unless is_density holds within tol.
  DensityOperator(ComplexMatrix matrix, std::string label = {}, const Tolerance& tol = {});

  /// |psi><psi| after normalizing psi; throws DomainError for a zero vector.
  static DensityOperator pure(std::span<const Complex> psi, std::string label = {});
  /// (I + sigma.n)/2 for a qubit; the axis is normalized first.
  static DensityOperator bloch(const BlochAxis& axis, std::string label = {});
  /// I / dim.
  static DensityOperator maximally_mixed(std::size_t dim);

  [[nodiscard]] const ComplexMatrix& matrix() const { return matrix_; }
  [[nodiscard]] const std::string& label() const { return label_; }
  [[nodiscard]] std::size_t dim() const { return matrix_.rows(); }

 private:
  ComplexMatrix matrix_;
  std::string label_;
};

/// Time-independent Hamiltonian (hbar = 1) plus the reference time t_r at
/// which Schroedinger and Heisenberg pictures coincide.
class Dynamics {
 public:
  /// Throws DomainError for a non-Hermitian Hamiltonian.
  explicit Dynamics(ComplexMatrix hamiltonian, double reference_time = 0.0, const Tolerance& tol = {});
  /// H = 0 on a space of the given dimension.
  static Dynamics free(std::size_t dim, double reference_time = 0.0);

  [[nodiscard]] const ComplexMatrix& hamiltonian() const { return hamiltonian_; }
  [[nodiscard]] double reference_time() const { return reference_time_; }
  [[nodiscard]] std::size_t dim() const { return hamiltonian_.rows(); }
  [[nodiscard]] Dynamics with_reference_time(double t) const;

 private:
  ComplexMatrix hamiltonian_;
  double reference_time_;
};

/// Exclusive, exhaustive set of alternatives at one time. The invariants are
/// not enforced on construction; validate_decomposition() reports them and
/// family construction rejects invalid decompositions.
struct DecompositionOfUnity {
  std::vector<Projector> projectors;
  double time = 0.0;

  [[nodiscard]] std::size_t size() const { return projectors.size(); }
  [[nodiscard]] std::size_t dim() const;
};

ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();
/// sigma . n (no normalization).
ComplexMatrix sigma_dot(const BlochAxis& n);
double axis_norm(const BlochAxis& n);
/// Throws DomainError for a zero axis.
BlochAxis normalized(const BlochAxis& n);

/// U(t_to, t_from) = exp(-i H (t_to - t_from)).
ComplexMatrix propagator(const Dynamics& dyn, double t_from, double t_to);

/// P(t) = U^dagger(t, t_r) P U(t, t_r).
Projector heisenberg_projector(const Dynamics& dyn, const Projector& p, double t);

/// rho = sum_i w_i |phi_i><phi_i|. Weights must be nonnegative and sum to 1,
/// vectors must be normalized; otherwise DomainError.
DensityOperator mixed_state(std::span<const double> weights, std::span<const StateVector> pure_vectors,
                            const Tolerance& tol = {});

/// {(I + sigma.n)/2, (I - sigma.n)/2} labelled "+" and "-". Throws
/// DomainError for a non-unit axis.
DecompositionOfUnity spin_decomposition(const BlochAxis& axis, double time = 0.0, const Tolerance& tol = {});

/// Lists every violated idempotency, nonzero, orthogonality and completeness
/// constraint with its residual. Empty iff the decomposition is valid.
ValidationReport validate_decomposition(const DecompositionOfUnity& d, const Tolerance& tol = {});

}  // namespace chq
