#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace chq {

using Complex = std::complex<double>;
using DenseStorage = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Comparison policy for every numerical predicate in the library.
///
/// A residual r measured against a reference magnitude m is accepted when
/// r <= abs_eps + rel_eps * m. All norms are max-absolute-entry norms.
struct Tolerance {
  double abs_eps = 1e-10;
  double rel_eps = 1e-10;

  /// Throws DomainError unless both fields are finite and nonnegative.
  void validate() const;

  [[nodiscard]] bool accepts(double residual, double magnitude = 0.0) const {
    return residual <= abs_eps + rel_eps * magnitude;
  }
};

/// Dense, row-major, immutable complex matrix with at least one row and one
/// column and only finite entries.
class ComplexMatrix {
 public:
  /// Zero matrix. Throws ShapeError for an empty shape.
  ComplexMatrix(std::size_t rows, std::size_t cols);
  /// Throws ShapeError for an empty shape, DomainError for NaN/Inf entries.
  explicit ComplexMatrix(DenseStorage storage);
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static ComplexMatrix from_rows(const std::vector<std::vector<Complex>>& rows);
  static ComplexMatrix identity(std::size_t n);
  static ComplexMatrix zero(std::size_t rows, std::size_t cols) { return {rows, cols}; }
  static ComplexMatrix diagonal(std::span<const Complex> values);
  /// |v><v| for a column vector v.
  static ComplexMatrix outer(std::span<const Complex> ket);

  [[nodiscard]] std::size_t rows() const { return static_cast<std::size_t>(m_.rows()); }
  [[nodiscard]] std::size_t cols() const { return static_cast<std::size_t>(m_.cols()); }
  [[nodiscard]] bool is_square() const { return m_.rows() == m_.cols(); }

  /// Bounds-checked element access; throws ShapeError when out of range.
  [[nodiscard]] Complex at(std::size_t r, std::size_t c) const;
  [[nodiscard]] Complex operator()(std::size_t r, std::size_t c) const {
    return m_(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  }

  /// Row-major view of the entries.
  [[nodiscard]] std::span<const Complex> entries() const {
    return {m_.data(), static_cast<std::size_t>(m_.size())};
  }
  [[nodiscard]] std::vector<std::vector<Complex>> to_rows() const;
  [[nodiscard]] const DenseStorage& dense() const { return m_; }

 private:
  DenseStorage m_;
};

ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex s, const ComplexMatrix& a);

/// Standard product; throws ShapeError when a.cols != b.rows.
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix adjoint(const ComplexMatrix& a);
/// Throws ShapeError for non-square input.
Complex trace(const ComplexMatrix& a);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

struct HermitianEigensystem {
  std::vector<double> values;  // ascending
  ComplexMatrix vectors;       // columns are the eigenvectors
};

/// Eigendecomposition of a Hermitian matrix. Throws DomainError for
/// non-Hermitian input and NumericError if the solver fails.
HermitianEigensystem hermitian_eigensystem(const ComplexMatrix& h, const Tolerance& tol = {});

/// exp(scale * h) = V exp(scale * Lambda) V^dagger for Hermitian h.
ComplexMatrix hermitian_expm(const ComplexMatrix& h, Complex scale, const Tolerance& tol = {});

/// Max-absolute-entry norm.
double max_abs(const ComplexMatrix& a);
/// max_abs(a - b); throws ShapeError on mismatch.
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, const Tolerance& tol = {});
bool is_hermitian(const ComplexMatrix& a, const Tolerance& tol = {});
bool is_unitary(const ComplexMatrix& u, const Tolerance& tol = {});

/// max(|P^2 - P|, |P^dagger - P|); requires a square matrix.
double projector_residual(const ComplexMatrix& p);
bool is_projector(const ComplexMatrix& p, const Tolerance& tol = {});
/// Hermitian, spectrum >= -abs_eps, unit trace.
bool is_density(const ComplexMatrix& r, const Tolerance& tol = {});

}  // namespace chq
