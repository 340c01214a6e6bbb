#include <cmath>
#include <vector>

#include "chq/decoherence.hpp"
#include "chq/errors.hpp"
#include "chq/hpo.hpp"
#include "doctest.h"
#include "oracle.hpp"
#include "random_family.hpp"

using namespace chq;

namespace {

// Naive Kronecker product, independent of the library's kron.
oracle::Mat naive_kron(const oracle::Mat& a, const oracle::Mat& b) {
  const std::size_t p = a.size();
  const std::size_t q = b.size();
  oracle::Mat out(p * q, std::vector<Complex>(p * q, 0.0));
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t k = 0; k < q; ++k) {
        for (std::size_t l = 0; l < q; ++l) out[i * q + k][j * q + l] = a[i][j] * b[k][l];
      }
    }
  }
  return out;
}

ComplexMatrix proj_z(bool up) { return spin_decomposition({0, 0, 1}).projectors[up ? 0 : 1].matrix(); }
ComplexMatrix proj_x(bool up) { return spin_decomposition({1, 0, 0}).projectors[up ? 0 : 1].matrix(); }

HistoryProposition prop(const HpoProjector& p, std::string label) { return {p, std::move(label)}; }

double residual_of_terms(const HpoProjector& p) {
  auto sum = ComplexMatrix::zero(p.dim(), p.dim());
  for (const auto& t : p.terms()) {
    auto m = t.slots[0];
    for (std::size_t k = 1; k < t.slots.size(); ++k) m = kron(m, t.slots[k]);
    sum = sum + m;
  }
  return max_abs_diff(sum, p.matrix());
}

bool has(const ValidationReport& r, const std::string& constraint) {
  for (const auto& v : r.violations) {
    if (v.constraint == constraint) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("hpo_embed") {
  const History h({{1.0, Projector(proj_z(true))}, {2.0, Projector(proj_x(true))}});
  const auto p = hpo_embed(h, HilbertSpace(2));
  CHECK(p.form() == HpoProjector::Form::homogeneous);
  CHECK(p.n_slots() == 2);
  CHECK(p.dim() == 4);
  CHECK(std::abs(trace(p.matrix()) - 1.0) < 1e-12);
  CHECK(oracle::max_diff(naive_kron(oracle::from(proj_z(true)), oracle::from(proj_x(true))), p.matrix()) < 1e-15);

  const History identity({{0.0, Projector(ComplexMatrix::identity(2))},
                          {1.0, Projector(ComplexMatrix::identity(2))},
                          {2.0, Projector(ComplexMatrix::identity(2))}});
  CHECK(approx_equal(hpo_embed(identity, HilbertSpace(2)).matrix(), ComplexMatrix::identity(8)));
  CHECK_THROWS_AS(hpo_embed(h, HilbertSpace(3)), ShapeError);

  testing::RandomSource r(71);
  for (int k = 0; k < 80; ++k) {
    const std::size_t d = r.index(2, 4);
    const std::size_t n = r.index(1, 4);
    if (std::pow(d, n) > 256) continue;
    std::vector<QuantumEvent> events;
    for (std::size_t j = 0; j < n; ++j) {
      events.push_back({static_cast<double>(j), Projector(testing::random_projector(r, d, 1, d))});
    }
    const auto e = hpo_embed(History(events), HilbertSpace(d));
    CHECK(projector_residual(e.matrix()) <= 1e-12);
    CHECK(is_hermitian(e.matrix(), Tolerance{1e-12}));
  }
}

TEST_CASE("HpoProjector construction") {
  CHECK_THROWS_AS(HpoProjector::homogeneous({pauli_x(), proj_z(true)}), DomainError);
  CHECK_THROWS_AS(HpoProjector::homogeneous({proj_z(true), ComplexMatrix::identity(3)}), ShapeError);
  std::vector<ComplexMatrix> many(13, proj_z(true));
  CHECK_THROWS_AS(HpoProjector::homogeneous(many), ShapeError);
  CHECK_NOTHROW(HpoProjector::homogeneous(std::vector<ComplexMatrix>(12, proj_z(true))));

  CHECK_THROWS_AS(HpoProjector::sum({{{proj_z(true), proj_z(true)}}, {{proj_z(true), ComplexMatrix::identity(2)}}}, 2, 2),
                  DomainError);
  const auto single = HpoProjector::sum({{{proj_z(true), proj_x(true)}}}, 2, 2);
  CHECK(single.form() == HpoProjector::Form::homogeneous);
  const auto none = HpoProjector::sum({}, 2, 2);
  CHECK(max_abs(none.matrix()) == 0.0);
  CHECK_THROWS_AS(HpoProjector::untracked(ComplexMatrix::identity(4) + ComplexMatrix::identity(4), 2, 2),
                  DomainError);
  CHECK_THROWS_AS(HpoProjector::untracked(ComplexMatrix::identity(4), 3, 2), ShapeError);
}

TEST_CASE("hpo_negate") {
  const auto p = proj_z(true);
  const auto q = proj_x(true);
  const auto pq = HpoProjector::homogeneous({p, q});
  const auto n = hpo_negate(pq);
  CHECK(n.form() == HpoProjector::Form::sum);
  REQUIRE(n.terms().size() == 3);
  const auto np = ComplexMatrix::identity(2) - p;
  const auto nq = ComplexMatrix::identity(2) - q;
  const auto expected = kron(np, q) + kron(p, nq) + kron(np, nq);
  CHECK(max_abs_diff(n.matrix(), expected) <= 1e-12);
  CHECK(max_abs_diff(n.matrix(), ComplexMatrix::identity(4) - kron(p, q)) <= 1e-12);
  CHECK(residual_of_terms(n) <= 1e-12);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = i + 1; j < 3; ++j) {
      const auto a = HpoProjector::homogeneous(n.terms()[i].slots);
      const auto b = HpoProjector::homogeneous(n.terms()[j].slots);
      CHECK(prop_disjoint(prop(a, "a"), prop(b, "b")));
    }
  }
  const auto back = hpo_negate(n);
  CHECK(max_abs_diff(back.matrix(), pq.matrix()) <= 1e-12);

  const auto unit = hpo_negate(HpoProjector::unit(2, 2));
  CHECK(max_abs(unit.matrix()) <= 1e-15);
  CHECK(unit.terms().empty());
  CHECK(max_abs_diff(hpo_negate(HpoProjector::zero(2, 3)).matrix(), ComplexMatrix::identity(9)) <= 1e-15);

  // A slot equal to I drops every pattern that would use I - I = 0.
  const auto half = hpo_negate(HpoProjector::homogeneous({p, ComplexMatrix::identity(2)}));
  CHECK(half.terms().size() == 1);
  CHECK(max_abs_diff(half.matrix(), kron(np, ComplexMatrix::identity(2))) <= 1e-12);

  testing::RandomSource r(72);
  for (int k = 0; k < 40; ++k) {
    const std::size_t d = r.index(2, 3);
    std::vector<ComplexMatrix> slots;
    for (int j = 0; j < 3; ++j) slots.push_back(testing::random_projector(r, d, 1, d - 1));
    const auto h = HpoProjector::homogeneous(slots);
    const auto neg = hpo_negate(h);
    REQUIRE(neg.terms().size() == 7);
    CHECK(residual_of_terms(neg) <= 1e-12);
    CHECK(max_abs_diff(neg.matrix() + h.matrix(), ComplexMatrix::identity(h.dim())) <= 1e-12);
    for (std::size_t i = 0; i < 7; ++i) {
      for (std::size_t j = i + 1; j < 7; ++j) {
        const auto a = HpoProjector::homogeneous(neg.terms()[i].slots);
        const auto b = HpoProjector::homogeneous(neg.terms()[j].slots);
        CHECK(max_abs(a.matrix() * b.matrix()) <= 1e-12);
      }
    }
    CHECK(max_abs_diff(hpo_negate(neg).matrix(), h.matrix()) <= 1e-12);
  }

  // A sum whose slot projectors do not commute can only be negated as a matrix.
  const auto mixed = HpoProjector::sum({{{p, q}}, {{np, p}}}, 2, 2);
  const auto mixed_neg = hpo_negate(mixed);
  CHECK(mixed_neg.form() == HpoProjector::Form::untracked);
  CHECK(max_abs_diff(mixed_neg.matrix() + mixed.matrix(), ComplexMatrix::identity(4)) <= 1e-12);
}

TEST_CASE("prop_leq, prop_disjoint and prop_ojoin") {
  const auto I = ComplexMatrix::identity(2);
  const auto zx = prop(HpoProjector::homogeneous({proj_z(true), proj_x(true)}), "zx");
  const auto zI = prop(HpoProjector::homogeneous({proj_z(true), I}), "z+");
  const auto mI = prop(HpoProjector::homogeneous({proj_z(false), I}), "z-");
  const auto one = unit_proposition(2, 2);
  const auto zero = null_proposition(2, 2);

  CHECK(prop_leq(zx, zI));
  CHECK_FALSE(prop_leq(zI, zx));
  for (const auto* a : {&zx, &zI, &mI, &one, &zero}) {
    CHECK(prop_leq(*a, one));
    CHECK(prop_leq(zero, *a));
    CHECK(prop_leq(*a, *a));
  }
  CHECK(prop_disjoint(zI, mI));
  CHECK_FALSE(prop_disjoint(zI, zI));
  CHECK_FALSE(prop_disjoint(zx, zI));

  const auto j = prop_ojoin(zI, mI);
  CHECK(approx_equal(j.hpo.matrix(), ComplexMatrix::identity(4)));
  CHECK(j.label == "(z+ + z-)");
  CHECK(approx_equal(prop_ojoin(mI, zI).hpo.matrix(), j.hpo.matrix()));
  CHECK(prop_leq(zI, j));
  CHECK_THROWS_AS(prop_ojoin(zI, zx), DomainError);

  const auto nzx = prop_negate(zx);
  CHECK(nzx.label == "not(zx)");
  CHECK(approx_equal(prop_ojoin(zx, nzx).hpo.matrix(), one.hpo.matrix()));

  const auto other = unit_proposition(1, 4);
  CHECK_THROWS_AS(prop_leq(one, other), ShapeError);
  CHECK_THROWS_AS(prop_disjoint(one, other), ShapeError);

}

namespace {

// All sums of subsets of one random qutrit basis, placed in slot 1 of two.
std::vector<HistoryProposition> one_slot_set(testing::RandomSource& r) {
  const auto basis = testing::random_decomposition(r, 3, 3);
  std::vector<HistoryProposition> set;
  for (std::size_t mask = 0; mask < 8; ++mask) {
    auto m = ComplexMatrix::zero(3, 3);
    for (std::size_t i = 0; i < 3; ++i) {
      if (mask & (1u << i)) m = m + basis.projectors[i].matrix();
    }
    set.push_back(prop(HpoProjector::untracked(kron(m, ComplexMatrix::identity(3)), 2, 3), std::to_string(mask)));
  }
  return set;
}

}  // namespace

TEST_CASE("prop_leq is a partial order") {
  testing::RandomSource r(73);
  for (int k = 0; k < 5; ++k) {
    const auto set = one_slot_set(r);
    for (std::size_t a = 0; a < set.size(); ++a) {
      CHECK(prop_leq(set[a], set[a]));
      for (std::size_t b = 0; b < set.size(); ++b) {
        // Subset order on the masks.
        CHECK(prop_leq(set[a], set[b]) == ((a & b) == a));
        if (a != b) CHECK_FALSE((prop_leq(set[a], set[b]) && prop_leq(set[b], set[a])));
        for (std::size_t c = 0; c < set.size(); ++c) {
          if (prop_leq(set[a], set[b]) && prop_leq(set[b], set[c])) CHECK(prop_leq(set[a], set[c]));
        }
      }
    }
  }
}

TEST_CASE("orthoalgebra_axiom_suite") {
  testing::RandomSource r(74);
  const auto set = one_slot_set(r);
  const auto report = orthoalgebra_axiom_suite(set);
  CHECK(report.ok());
  CHECK(report.notes.empty());

  // The 2^n slot patterns of {P_k, I - P_k} together with 0 and 1.
  for (std::size_t n : {2u, 3u}) {
    std::vector<ComplexMatrix> slots;
    for (std::size_t j = 0; j < n; ++j) slots.push_back(testing::random_projector(r, 2, 1, 1));
    const auto h = HpoProjector::homogeneous(slots);
    std::vector<HistoryProposition> props = {unit_proposition(n, 2), null_proposition(n, 2), prop(h, "p")};
    const auto neg = hpo_negate(h);
    for (const auto& t : neg.terms()) props.push_back(prop(HpoProjector::homogeneous(t.slots), "t"));
    CHECK(props.size() == 3 + (std::size_t{1} << n) - 1);
    CHECK(orthoalgebra_axiom_suite(props).ok());
  }

  // An overlapping sum is not a projector.
  const auto zI = HpoProjector::homogeneous({proj_z(true), ComplexMatrix::identity(2)});
  const auto zx = HpoProjector::homogeneous({proj_z(true), proj_x(true)});
  const std::vector<HistoryProposition> broken = {
      unit_proposition(2, 2), null_proposition(2, 2),
      prop(HpoProjector::unchecked(zI.matrix() + zx.matrix(), 2, 2), "overlap")};
  const auto bad = orthoalgebra_axiom_suite(broken);
  CHECK_FALSE(bad.ok());
  CHECK(has(bad.violations, "projector"));

  // Missing generated elements become notes, not violations.
  const std::vector<HistoryProposition> sparse = {prop(zx, "zx")};
  const auto sr = orthoalgebra_axiom_suite(sparse);
  CHECK(sr.ok());
  CHECK_FALSE(sr.notes.empty());
}

TEST_CASE("chain_of_proposition") {
  testing::RandomSource r(75);
  for (int k = 0; k < 40; ++k) {
    const auto f = testing::random_family(r, {3, 3, 27});
    const auto dm = decoherence_matrix(f);
    const auto& hs = f.histories();
    const Label a = hs[r.index(0, hs.size() - 1)].label();
    const Label single[] = {a};
    CHECK(max_abs_diff(chain_of_proposition(f, single), chain_operator(f, a).matrix) <= 1e-15);

    std::vector<Label> all;
    for (const auto& h : hs) all.push_back(h.label());
    CHECK(max_abs_diff(chain_of_proposition(f, all), ComplexMatrix::identity(f.dim())) <= 1e-10);

    if (hs.size() < 2) continue;
    Label b = a;
    while (b == a) b = hs[r.index(0, hs.size() - 1)].label();
    const Label pair[] = {a, b};
    const auto c = chain_of_proposition(f, pair);
    const double dgg = trace(c * f.initial_state().matrix() * adjoint(c)).real();
    const double expected = dm.at(a, a).real() + dm.at(b, b).real() + 2 * dm.at(a, b).real();
    CHECK(std::abs(dgg - expected) <= 1e-10);

    const Label twice[] = {a, a};
    CHECK_THROWS_AS(chain_of_proposition(f, twice), DomainError);
    Label unknown = a;
    unknown[0] = 99;
    const Label missing[] = {unknown};
    CHECK_THROWS_AS(chain_of_proposition(f, missing), LookupError);
  }
}
