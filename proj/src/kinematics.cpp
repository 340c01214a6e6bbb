#include "chq/kinematics.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "chq/errors.hpp"

namespace chq {

namespace {

constexpr Complex kI{0.0, 1.0};

std::string member_name(const DecompositionOfUnity& d, std::size_t i) {
  const auto& label = d.projectors[i].label();
  return label.empty() ? "#" + std::to_string(i) : label;
}

}  // namespace

HilbertSpace::HilbertSpace(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw DomainError("Hilbert space dimension must be positive");
}

Projector::Projector(ComplexMatrix matrix, std::string label, const Tolerance& tol)
    : matrix_(std::move(matrix)), label_(std::move(label)) {
  if (!matrix_.is_square()) throw ShapeError("projector matrix must be square");
  if (!is_projector(matrix_, tol)) {
    std::ostringstream os;
    os << "matrix labelled '" << label_ << "' is not a projector (residual "
       << projector_residual(matrix_) << ")";
    throw DomainError(os.str());
  }
}

std::size_t Projector::rank() const {
  return static_cast<std::size_t>(std::llround(trace(matrix_).real()));
}

Projector Projector::complement(std::string label) const {
  return Projector(ComplexMatrix::identity(dim()) - matrix_, std::move(label));
}

DensityOperator::DensityOperator(ComplexMatrix matrix, std::string label, const Tolerance& tol)
    : matrix_(std::move(matrix)), label_(std::move(label)) {
  if (!matrix_.is_square()) throw ShapeError("density matrix must be square");
  if (!is_density(matrix_, tol)) {
    throw DomainError("matrix labelled '" + label_ + "' is not a density operator");
  }
}

DensityOperator DensityOperator::pure(std::span<const Complex> psi, std::string label) {
  double norm2 = 0.0;
  for (const auto& z : psi) norm2 += std::norm(z);
  if (psi.empty() || norm2 == 0.0) throw DomainError("pure state vector must be nonzero");
  StateVector unit(psi.begin(), psi.end());
  for (auto& z : unit) z /= std::sqrt(norm2);
  return DensityOperator(ComplexMatrix::outer(unit), std::move(label));
}

DensityOperator DensityOperator::bloch(const BlochAxis& axis, std::string label) {
  const auto n = normalized(axis);
  return DensityOperator(0.5 * (ComplexMatrix::identity(2) + sigma_dot(n)), std::move(label));
}

DensityOperator DensityOperator::maximally_mixed(std::size_t dim) {
  return DensityOperator(Complex(1.0 / static_cast<double>(dim)) * ComplexMatrix::identity(dim), "I/d");
}

Dynamics::Dynamics(ComplexMatrix hamiltonian, double reference_time, const Tolerance& tol)
    : hamiltonian_(std::move(hamiltonian)), reference_time_(reference_time) {
  if (!std::isfinite(reference_time)) throw DomainError("reference time must be finite");
  if (!hamiltonian_.is_square()) throw ShapeError("Hamiltonian must be square");
  if (!is_hermitian(hamiltonian_, tol)) throw DomainError("Hamiltonian is not Hermitian");
}

Dynamics Dynamics::free(std::size_t dim, double reference_time) {
  return Dynamics(ComplexMatrix::zero(dim, dim), reference_time);
}

Dynamics Dynamics::with_reference_time(double t) const { return Dynamics(hamiltonian_, t); }

std::size_t DecompositionOfUnity::dim() const {
  return projectors.empty() ? 0 : projectors.front().dim();
}

ComplexMatrix pauli_x() { return {{0.0, 1.0}, {1.0, 0.0}}; }
ComplexMatrix pauli_y() { return {{0.0, -kI}, {kI, 0.0}}; }
ComplexMatrix pauli_z() { return {{1.0, 0.0}, {0.0, -1.0}}; }

ComplexMatrix sigma_dot(const BlochAxis& n) {
  return Complex(n[0]) * pauli_x() + Complex(n[1]) * pauli_y() + Complex(n[2]) * pauli_z();
}

double axis_norm(const BlochAxis& n) { return std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]); }

BlochAxis normalized(const BlochAxis& n) {
  const double len = axis_norm(n);
  if (!(len > 0.0) || !std::isfinite(len)) throw DomainError("Bloch axis must be nonzero and finite");
  return {n[0] / len, n[1] / len, n[2] / len};
}

ComplexMatrix propagator(const Dynamics& dyn, double t_from, double t_to) {
  if (!std::isfinite(t_from) || !std::isfinite(t_to)) throw DomainError("propagator times must be finite");
  if (t_from == t_to) return ComplexMatrix::identity(dyn.dim());
  return hermitian_expm(dyn.hamiltonian(), -kI * (t_to - t_from));
}

Projector heisenberg_projector(const Dynamics& dyn, const Projector& p, double t) {
  if (p.dim() != dyn.dim()) throw ShapeError("projector and Hamiltonian dimensions differ");
  const auto u = propagator(dyn, dyn.reference_time(), t);
  return Projector(adjoint(u) * p.matrix() * u, p.label());
}

DensityOperator mixed_state(std::span<const double> weights, std::span<const StateVector> pure_vectors,
                            const Tolerance& tol) {
  if (weights.size() != pure_vectors.size() || weights.empty()) {
    throw ShapeError("mixed_state: need one weight per vector and at least one of each");
  }
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!tol.accepts(std::abs(total - 1.0), 1.0)) throw DomainError("mixed_state: weights must sum to 1");
  const std::size_t dim = pure_vectors.front().size();
  auto rho = ComplexMatrix::zero(dim, dim);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0)) throw DomainError("mixed_state: weights must be nonnegative");
    const auto& v = pure_vectors[i];
    if (v.size() != dim) throw ShapeError("mixed_state: vectors of different dimension");
    double norm2 = 0.0;
    for (const auto& z : v) norm2 += std::norm(z);
    if (!tol.accepts(std::abs(norm2 - 1.0), 1.0)) throw DomainError("mixed_state: vectors must be normalized");
    rho = rho + Complex(weights[i]) * ComplexMatrix::outer(v);
  }
  return DensityOperator(rho, "mixture", tol);
}

DecompositionOfUnity spin_decomposition(const BlochAxis& axis, double time, const Tolerance& tol) {
  if (!tol.accepts(std::abs(axis_norm(axis) - 1.0), 1.0)) {
    throw DomainError("spin_decomposition: axis must have unit length");
  }
  const auto id = ComplexMatrix::identity(2);
  const auto s = sigma_dot(axis);
  DecompositionOfUnity d;
  d.time = time;
  d.projectors.emplace_back(0.5 * (id + s), "+", tol);
  d.projectors.emplace_back(0.5 * (id - s), "-", tol);
  return d;
}

ValidationReport validate_decomposition(const DecompositionOfUnity& d, const Tolerance& tol) {
  ValidationReport report;
  if (d.projectors.empty()) {
    report.add("nonempty", "decomposition has no members", 1.0);
    return report;
  }
  const std::size_t dim = d.dim();
  for (std::size_t a = 0; a < d.size(); ++a) {
    if (d.projectors[a].dim() != dim) {
      report.add("dimension", member_name(d, a), 1.0);
      return report;
    }
  }
  auto sum = ComplexMatrix::zero(dim, dim);
  for (std::size_t a = 0; a < d.size(); ++a) {
    const auto& pa = d.projectors[a].matrix();
    const double idem = projector_residual(pa);
    if (!tol.accepts(idem, max_abs(pa))) report.add("idempotency", member_name(d, a), idem);
    if (tol.accepts(max_abs(pa))) report.add("nonzero", member_name(d, a), max_abs(pa));
    for (std::size_t b = a + 1; b < d.size(); ++b) {
      const double overlap = max_abs(pa * d.projectors[b].matrix());
      if (!tol.accepts(overlap)) {
        report.add("orthogonality", member_name(d, a) + " x " + member_name(d, b), overlap);
      }
    }
    sum = sum + pa;
  }
  const double completeness = max_abs_diff(sum, ComplexMatrix::identity(dim));
  if (!tol.accepts(completeness, 1.0)) report.add("completeness", "sum of members vs identity", completeness);
  return report;
}

}  // namespace chq
