#include "chq/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chq/errors.hpp"
#include "chq/validation.hpp"

namespace chq {

namespace {

void require_square(const ComplexMatrix& a, const char* what) {
  if (!a.is_square()) {
    std::ostringstream os;
    os << what << ": expected a square matrix, got " << a.rows() << "x" << a.cols();
    throw ShapeError(os.str());
  }
}

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << what << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
       << b.cols();
    throw ShapeError(os.str());
  }
}

}  // namespace

void Tolerance::validate() const {
  if (!std::isfinite(abs_eps) || !std::isfinite(rel_eps) || abs_eps < 0.0 || rel_eps < 0.0) {
    throw DomainError("tolerance fields must be finite and nonnegative");
  }
}

std::string ValidationReport::summary() const {
  if (violations.empty()) return "ok";
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    const auto& v = violations[i];
    if (i) os << "; ";
    os << v.constraint << " violated for " << v.subject << " (residual " << v.residual << ")";
  }
  return os.str();
}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw ShapeError("matrix dimensions must be positive");
  m_ = DenseStorage::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

ComplexMatrix::ComplexMatrix(DenseStorage storage) : m_(std::move(storage)) {
  if (m_.rows() == 0 || m_.cols() == 0) throw ShapeError("matrix dimensions must be positive");
  for (Eigen::Index i = 0; i < m_.size(); ++i) {
    const Complex z = m_.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
      throw DomainError("matrix entries must be finite");
    }
  }
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows)
    : ComplexMatrix(from_rows(std::vector<std::vector<Complex>>(rows.begin(), rows.end()))) {}

ComplexMatrix ComplexMatrix::from_rows(const std::vector<std::vector<Complex>>& rows) {
  if (rows.empty() || rows.front().empty()) throw ShapeError("matrix literal must be nonempty");
  const auto n_cols = rows.front().size();
  DenseStorage m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != n_cols) throw ShapeError("ragged matrix literal");
    for (std::size_t c = 0; c < n_cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return ComplexMatrix(std::move(m));
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
  if (n == 0) throw ShapeError("identity dimension must be positive");
  return ComplexMatrix(DenseStorage::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)));
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const Complex> values) {
  ComplexMatrix out(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out.m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = values[i];
  }
  return out;
}

ComplexMatrix ComplexMatrix::outer(std::span<const Complex> ket) {
  if (ket.empty()) throw ShapeError("state vector must be nonempty");
  Eigen::Map<const Eigen::VectorXcd> v(ket.data(), static_cast<Eigen::Index>(ket.size()));
  return ComplexMatrix(DenseStorage(v * v.adjoint()));
}

Complex ComplexMatrix::at(std::size_t r, std::size_t c) const {
  if (r >= rows() || c >= cols()) throw ShapeError("matrix index out of range");
  return (*this)(r, c);
}

std::vector<std::vector<Complex>> ComplexMatrix::to_rows() const {
  std::vector<std::vector<Complex>> out(rows(), std::vector<Complex>(cols()));
  for (std::size_t r = 0; r < rows(); ++r) {
    for (std::size_t c = 0; c < cols(); ++c) out[r][c] = (*this)(r, c);
  }
  return out;
}

ComplexMatrix operator+(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "add");
  return ComplexMatrix(DenseStorage(a.dense() + b.dense()));
}

ComplexMatrix operator-(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "subtract");
  return ComplexMatrix(DenseStorage(a.dense() - b.dense()));
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) { return matmul(a, b); }

ComplexMatrix operator*(Complex s, const ComplexMatrix& a) {
  return ComplexMatrix(DenseStorage(s * a.dense()));
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream os;
    os << "matmul: " << a.rows() << "x" << a.cols() << " times " << b.rows() << "x" << b.cols();
    throw ShapeError(os.str());
  }
  return ComplexMatrix(DenseStorage(a.dense() * b.dense()));
}

ComplexMatrix adjoint(const ComplexMatrix& a) { return ComplexMatrix(DenseStorage(a.dense().adjoint())); }

Complex trace(const ComplexMatrix& a) {
  require_square(a, "trace");
  return a.dense().trace();
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const auto ar = a.dense().rows(), ac = a.dense().cols();
  const auto br = b.dense().rows(), bc = b.dense().cols();
  DenseStorage out(ar * br, ac * bc);
  for (Eigen::Index i = 0; i < ar; ++i) {
    for (Eigen::Index j = 0; j < ac; ++j) {
      out.block(i * br, j * bc, br, bc) = a.dense()(i, j) * b.dense();
    }
  }
  return ComplexMatrix(std::move(out));
}

HermitianEigensystem hermitian_eigensystem(const ComplexMatrix& h, const Tolerance& tol) {
  require_square(h, "hermitian_eigensystem");
  if (!is_hermitian(h, tol)) throw DomainError("hermitian_eigensystem: matrix is not Hermitian");
  // Symmetrize so that round-off in the input cannot leak into the solver.
  const Eigen::MatrixXcd sym = 0.5 * (h.dense() + h.dense().adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sym);
  if (solver.info() != Eigen::Success) throw NumericError("Hermitian eigendecomposition failed");
  std::vector<double> values(solver.eigenvalues().data(),
                             solver.eigenvalues().data() + solver.eigenvalues().size());
  return {std::move(values), ComplexMatrix(DenseStorage(solver.eigenvectors()))};
}

ComplexMatrix hermitian_expm(const ComplexMatrix& h, Complex scale, const Tolerance& tol) {
  if (!std::isfinite(scale.real()) || !std::isfinite(scale.imag())) {
    throw DomainError("hermitian_expm: scale must be finite");
  }
  const auto eig = hermitian_eigensystem(h, tol);
  const auto& v = eig.vectors.dense();
  Eigen::VectorXcd phases(static_cast<Eigen::Index>(eig.values.size()));
  for (std::size_t i = 0; i < eig.values.size(); ++i) {
    phases(static_cast<Eigen::Index>(i)) = std::exp(scale * eig.values[i]);
  }
  return ComplexMatrix(DenseStorage(v * phases.asDiagonal() * v.adjoint()));
}

double max_abs(const ComplexMatrix& a) {
  double m = 0.0;
  for (const auto& z : a.entries()) m = std::max(m, std::abs(z));
  return m;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  const auto ea = a.entries();
  const auto eb = b.entries();
  for (std::size_t i = 0; i < ea.size(); ++i) m = std::max(m, std::abs(ea[i] - eb[i]));
  return m;
}

bool approx_equal(const ComplexMatrix& a, const ComplexMatrix& b, const Tolerance& tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return tol.accepts(max_abs_diff(a, b), std::max(max_abs(a), max_abs(b)));
}

bool is_hermitian(const ComplexMatrix& a, const Tolerance& tol) {
  if (!a.is_square()) return false;
  const double residual = (a.dense() - a.dense().adjoint()).cwiseAbs().maxCoeff();
  return tol.accepts(residual, max_abs(a));
}

bool is_unitary(const ComplexMatrix& u, const Tolerance& tol) {
  if (!u.is_square()) return false;
  const DenseStorage gram = u.dense().adjoint() * u.dense();
  const double residual =
      (gram - DenseStorage::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
  return tol.accepts(residual, 1.0);
}

double projector_residual(const ComplexMatrix& p) {
  require_square(p, "projector_residual");
  const auto& m = p.dense();
  const double idem = (m * m - m).cwiseAbs().maxCoeff();
  const double herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  return std::max(idem, herm);
}

bool is_projector(const ComplexMatrix& p, const Tolerance& tol) {
  if (!p.is_square()) return false;
  return tol.accepts(projector_residual(p), max_abs(p));
}

bool is_density(const ComplexMatrix& r, const Tolerance& tol) {
  if (!r.is_square() || !is_hermitian(r, tol)) return false;
  const Complex tr = trace(r);
  if (!tol.accepts(std::abs(tr - 1.0), 1.0)) return false;
  const auto eig = hermitian_eigensystem(r, tol);
  return eig.values.front() >= -tol.abs_eps;
}

}  // namespace chq
