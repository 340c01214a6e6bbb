#include <cmath>
#include <numbers>

#include "chq/errors.hpp"
#include "chq/kinematics.hpp"
#include "doctest.h"
#include "random_family.hpp"

using namespace chq;

namespace {

const double pi = std::numbers::pi;

ComplexMatrix half_sigma_z() { return Complex(0.5) * pauli_z(); }

Projector px_plus() { return spin_decomposition({1, 0, 0}).projectors[0]; }
Projector px_minus() { return spin_decomposition({1, 0, 0}).projectors[1]; }

}  // namespace

TEST_CASE("constructors validate their inputs") {
  CHECK_THROWS_AS(HilbertSpace(0), DomainError);
  CHECK_THROWS_AS((void)Projector(pauli_x()), DomainError);
  CHECK_THROWS_AS(DensityOperator(ComplexMatrix{{2, 0}, {0, -1}}), DomainError);
  CHECK_THROWS_AS(Dynamics(ComplexMatrix{{0, 1}, {0, 0}}), DomainError);
  CHECK(Projector(ComplexMatrix{{1, 0}, {0, 0}}).rank() == 1);
  CHECK(approx_equal(px_plus().complement().matrix(), px_minus().matrix()));
}

TEST_CASE("propagator") {
  const auto free = Dynamics::free(3);
  CHECK(approx_equal(propagator(free, 0.3, 7.1), ComplexMatrix::identity(3)));
  const Dynamics dyn(half_sigma_z());
  CHECK(approx_equal(propagator(dyn, 1.25, 1.25), ComplexMatrix::identity(2)));
  CHECK(max_abs_diff(propagator(dyn, 0.0, 2 * pi), Complex(-1.0) * ComplexMatrix::identity(2)) < 1e-12);

  testing::RandomSource r(21);
  for (int k = 0; k < 30; ++k) {
    const Dynamics d(testing::random_hermitian(r, r.index(2, 4)), r.uniform(-1, 1));
    const double t1 = r.uniform(-3, 3);
    const double t2 = r.uniform(-3, 3);
    const double t3 = r.uniform(-3, 3);
    CHECK(max_abs_diff(propagator(d, t1, t3), propagator(d, t2, t3) * propagator(d, t1, t2)) < 1e-10);
    CHECK(is_unitary(propagator(d, t1, t2)));
  }
}

TEST_CASE("heisenberg_projector") {
  const auto free = Dynamics::free(2, 0.5);
  CHECK(approx_equal(heisenberg_projector(free, px_plus(), 9.0).matrix(), px_plus().matrix()));
  const Dynamics dyn(half_sigma_z(), 0.7);
  CHECK(approx_equal(heisenberg_projector(dyn, px_plus(), 0.7).matrix(), px_plus().matrix()));
  // Rotation by pi about z sends the +x Bloch vector to -x.
  CHECK(max_abs_diff(heisenberg_projector(dyn, px_plus(), 0.7 + pi).matrix(), px_minus().matrix()) < 1e-12);

  testing::RandomSource r(22);
  for (int k = 0; k < 30; ++k) {
    const std::size_t n = r.index(2, 4);
    const Dynamics d(testing::random_hermitian(r, n), r.uniform(-1, 1));
    auto decomp = testing::random_decomposition(r, n, r.index(1, n));
    const double t = r.uniform(-4, 4);
    DecompositionOfUnity moved;
    for (const auto& p : decomp.projectors) moved.projectors.push_back(heisenberg_projector(d, p, t));
    CHECK(validate_decomposition(moved).ok());
  }
}

TEST_CASE("mixed_state") {
  const StateVector zero{1.0, 0.0};
  const StateVector one{0.0, 1.0};
  const double w1[] = {1.0};
  const StateVector v1[] = {zero};
  CHECK(approx_equal(mixed_state(w1, v1).matrix(), ComplexMatrix{{1, 0}, {0, 0}}));
  const double w2[] = {0.5, 0.5};
  const StateVector v2[] = {zero, one};
  CHECK(approx_equal(mixed_state(w2, v2).matrix(), Complex(0.5) * ComplexMatrix::identity(2)));

  const double s = 1.0 / std::sqrt(2.0);
  const double w3[] = {0.3, 0.7};
  const StateVector v3[] = {{s, s}, zero};
  const auto rho = mixed_state(w3, v3);
  CHECK(std::abs(trace(rho.matrix()) - 1.0) < 1e-12);
  const auto eig = hermitian_eigensystem(rho.matrix());
  for (double e : eig.values) {
    CHECK(e >= -1e-12);
    CHECK(e <= 1.0 + 1e-12);
  }

  const double bad_weights[] = {0.6, 0.6};
  CHECK_THROWS_AS(mixed_state(bad_weights, v2), DomainError);
  const double negative[] = {1.5, -0.5};
  CHECK_THROWS_AS(mixed_state(negative, v2), DomainError);
  const StateVector unnormalized[] = {{1.0, 1.0}, one};
  CHECK_THROWS_AS(mixed_state(w2, unnormalized), DomainError);
}

TEST_CASE("spin_decomposition") {
  const auto z = spin_decomposition({0, 0, 1});
  CHECK(approx_equal(z.projectors[0].matrix(), ComplexMatrix{{1, 0}, {0, 0}}));
  CHECK(approx_equal(z.projectors[1].matrix(), ComplexMatrix{{0, 0}, {0, 1}}));
  const auto x = spin_decomposition({1, 0, 0});
  const auto id = ComplexMatrix::identity(2);
  CHECK(approx_equal(x.projectors[0].matrix(), Complex(0.5) * (id + pauli_x())));
  CHECK(approx_equal(x.projectors[1].matrix(), Complex(0.5) * (id - pauli_x())));
  CHECK(x.projectors[0].label() == "+");
  CHECK_THROWS_AS(spin_decomposition({0, 0, 2}), DomainError);

  testing::RandomSource r(23);
  for (int k = 0; k < 50; ++k) {
    const auto d = spin_decomposition(testing::random_axis(r));
    CHECK(validate_decomposition(d).ok());
    for (const auto& p : d.projectors) CHECK(std::abs(trace(p.matrix()) - 1.0) < 1e-12);
  }
}

TEST_CASE("validate_decomposition") {
  CHECK(validate_decomposition(spin_decomposition({0, 0, 1})).ok());
  DecompositionOfUnity only_identity{{Projector(ComplexMatrix::identity(2), "I")}, 0.0};
  CHECK(validate_decomposition(only_identity).ok());

  DecompositionOfUnity bad{{spin_decomposition({0, 0, 1}).projectors[0], px_plus()}, 0.0};
  const auto report = validate_decomposition(bad);
  CHECK_FALSE(report.ok());
  bool orthogonality = false;
  bool completeness = false;
  for (const auto& v : report.violations) {
    if (v.constraint == "orthogonality") {
      orthogonality = true;
      // |P_z+ P_x+| max entry = 1/2
      CHECK(v.residual == doctest::Approx(0.5).epsilon(1e-12));
    }
    if (v.constraint == "completeness") {
      completeness = true;
      // P_z+ + P_x+ - I = [[1/2, 1/2], [1/2, -1/2]]
      CHECK(v.residual == doctest::Approx(0.5).epsilon(1e-12));
    }
  }
  CHECK(orthogonality);
  CHECK(completeness);

  CHECK_FALSE(validate_decomposition(DecompositionOfUnity{}).ok());
}
