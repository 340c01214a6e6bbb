#include "chq/hpo.hpp"

#include <algorithm>
#include <optional>
#include <set>

#include "chq/errors.hpp"

namespace chq {

namespace {

constexpr std::size_t kMaxSlotGenerators = 12;

std::size_t tensor_dim(std::size_t n_slots, std::size_t slot_dim) {
  if (n_slots == 0 || slot_dim == 0) throw ShapeError("HPO needs at least one slot of positive dimension");
  std::size_t dim = 1;
  for (std::size_t k = 0; k < n_slots; ++k) {
    dim *= slot_dim;
    if (dim > kMaxHpoDimension) {
      throw ShapeError("HPO tensor space exceeds the dimension cap of " + std::to_string(kMaxHpoDimension));
    }
  }
  return dim;
}

ComplexMatrix term_matrix(const HomogeneousTerm& t) {
  ComplexMatrix m = t.slots.front();
  for (std::size_t k = 1; k < t.slots.size(); ++k) m = kron(m, t.slots[k]);
  return m;
}

// Two homogeneous terms are orthogonal iff some slot pair is.
bool terms_orthogonal(const HomogeneousTerm& a, const HomogeneousTerm& b, const Tolerance& tol) {
  for (std::size_t k = 0; k < a.slots.size(); ++k) {
    if (tol.accepts(max_abs(a.slots[k] * b.slots[k]))) return true;
  }
  return false;
}

bool slot_leq(const ComplexMatrix& a, const ComplexMatrix& b, const Tolerance& tol) {
  return approx_equal(a * b, a, tol);
}

void require_same_space(const HistoryProposition& a, const HistoryProposition& b) {
  if (a.hpo.n_slots() != b.hpo.n_slots() || a.hpo.slot_dim() != b.hpo.slot_dim()) {
    throw ShapeError("history propositions live on different tensor spaces");
  }
}

// Atoms of the Boolean algebra generated by commuting projectors on one slot.
std::optional<std::vector<ComplexMatrix>> slot_atoms(const std::vector<ComplexMatrix>& generators,
                                                     const Tolerance& tol) {
  if (generators.size() > kMaxSlotGenerators) return std::nullopt;
  for (std::size_t i = 0; i < generators.size(); ++i) {
    for (std::size_t j = i + 1; j < generators.size(); ++j) {
      const auto& p = generators[i];
      const auto& q = generators[j];
      if (!tol.accepts(max_abs(p * q - q * p))) return std::nullopt;
    }
  }
  const std::size_t d = generators.front().rows();
  const auto id = ComplexMatrix::identity(d);
  std::vector<ComplexMatrix> atoms;
  for (std::size_t mask = 0; mask < (std::size_t{1} << generators.size()); ++mask) {
    ComplexMatrix atom = id;
    for (std::size_t i = 0; i < generators.size(); ++i) {
      atom = atom * ((mask >> i) & 1U ? id - generators[i] : generators[i]);
    }
    if (!tol.accepts(max_abs(atom))) atoms.push_back(std::move(atom));
  }
  return atoms;
}

HpoProjector negate_by_atoms(const HpoProjector& p, const ComplexMatrix& complement, const Tolerance& tol) {
  const std::size_t n = p.n_slots();
  std::vector<std::vector<ComplexMatrix>> atoms(n);
  std::size_t product_count = 1;
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<ComplexMatrix> generators;
    for (const auto& term : p.terms()) {
      const auto& g = term.slots[k];
      const bool seen = std::any_of(generators.begin(), generators.end(),
                                    [&](const ComplexMatrix& h) { return approx_equal(g, h, tol); });
      if (!seen) generators.push_back(g);
    }
    auto slot = slot_atoms(generators, tol);
    if (!slot) return HpoProjector::untracked(complement, n, p.slot_dim(), tol);
    atoms[k] = std::move(*slot);
    product_count *= atoms[k].size();
    if (product_count > kMaxHpoDimension) return HpoProjector::untracked(complement, n, p.slot_dim(), tol);
  }

  std::vector<HomogeneousTerm> outside;
  std::vector<std::size_t> pick(n, 0);
  for (std::size_t c = 0; c < product_count; ++c) {
    std::size_t rest = c;
    HomogeneousTerm atom;
    for (std::size_t k = n; k-- > 0;) {
      pick[k] = rest % atoms[k].size();
      rest /= atoms[k].size();
    }
    for (std::size_t k = 0; k < n; ++k) atom.slots.push_back(atoms[k][pick[k]]);
    const bool inside = std::any_of(p.terms().begin(), p.terms().end(), [&](const HomogeneousTerm& t) {
      for (std::size_t k = 0; k < n; ++k) {
        if (!slot_leq(atom.slots[k], t.slots[k], tol)) return false;
      }
      return true;
    });
    if (!inside) outside.push_back(std::move(atom));
  }
  return HpoProjector::sum(std::move(outside), n, p.slot_dim(), tol);
}

}  // namespace

HpoProjector::HpoProjector(ComplexMatrix matrix, std::size_t n_slots, std::size_t slot_dim, Form form,
                           std::vector<HomogeneousTerm> terms)
    : matrix_(std::move(matrix)), n_slots_(n_slots), slot_dim_(slot_dim), form_(form), terms_(std::move(terms)) {}

HpoProjector HpoProjector::homogeneous(std::vector<ComplexMatrix> slots, const Tolerance& tol) {
  if (slots.empty()) throw ShapeError("homogeneous HPO needs at least one slot");
  const std::size_t d = slots.front().rows();
  tensor_dim(slots.size(), d);
  for (const auto& s : slots) {
    if (!s.is_square() || s.rows() != d) throw ShapeError("HPO slots must be square and of equal dimension");
    if (!is_projector(s, tol)) throw DomainError("HPO slot is not a projector");
  }
  HomogeneousTerm term{std::move(slots)};
  auto m = term_matrix(term);
  const std::size_t n = term.slots.size();
  return {std::move(m), n, d, Form::homogeneous, {std::move(term)}};
}

HpoProjector HpoProjector::sum(std::vector<HomogeneousTerm> terms, std::size_t n_slots, std::size_t slot_dim,
                               const Tolerance& tol) {
  const std::size_t dim = tensor_dim(n_slots, slot_dim);
  if (terms.empty()) return zero(n_slots, slot_dim);
  for (const auto& t : terms) {
    if (t.slots.size() != n_slots) throw ShapeError("HPO term has the wrong number of slots");
    for (const auto& s : t.slots) {
      if (!s.is_square() || s.rows() != slot_dim) throw ShapeError("HPO term slot has the wrong dimension");
      if (!is_projector(s, tol)) throw DomainError("HPO term slot is not a projector");
    }
  }
  if (terms.size() == 1) return homogeneous(std::move(terms.front().slots), tol);
  for (std::size_t a = 0; a < terms.size(); ++a) {
    for (std::size_t b = a + 1; b < terms.size(); ++b) {
      if (!terms_orthogonal(terms[a], terms[b], tol)) {
        throw DomainError("HPO sum terms " + std::to_string(a) + " and " + std::to_string(b) + " are not orthogonal");
      }
    }
  }
  auto m = ComplexMatrix::zero(dim, dim);
  for (const auto& t : terms) m = m + term_matrix(t);
  return {std::move(m), n_slots, slot_dim, Form::sum, std::move(terms)};
}

HpoProjector HpoProjector::untracked(ComplexMatrix matrix, std::size_t n_slots, std::size_t slot_dim,
                                     const Tolerance& tol) {
  if (!is_projector(matrix, tol)) throw DomainError("matrix is not a projector on the history space");
  return unchecked(std::move(matrix), n_slots, slot_dim);
}

HpoProjector HpoProjector::unchecked(ComplexMatrix matrix, std::size_t n_slots, std::size_t slot_dim) {
  const std::size_t dim = tensor_dim(n_slots, slot_dim);
  if (!matrix.is_square() || matrix.rows() != dim) throw ShapeError("matrix does not act on the history space");
  return {std::move(matrix), n_slots, slot_dim, Form::untracked, {}};
}

HpoProjector HpoProjector::unit(std::size_t n_slots, std::size_t slot_dim) {
  tensor_dim(n_slots, slot_dim);
  return homogeneous(std::vector<ComplexMatrix>(n_slots, ComplexMatrix::identity(slot_dim)));
}

HpoProjector HpoProjector::zero(std::size_t n_slots, std::size_t slot_dim) {
  const std::size_t dim = tensor_dim(n_slots, slot_dim);
  return {ComplexMatrix::zero(dim, dim), n_slots, slot_dim, Form::sum, {}};
}

HpoProjector hpo_embed(const History& history, const HilbertSpace& space) {
  std::vector<ComplexMatrix> slots;
  for (const auto& e : history.events()) {
    if (e.projector.dim() != space.dim()) {
      throw ShapeError("history projector of dimension " + std::to_string(e.projector.dim()) +
                       " does not act on a space of dimension " + std::to_string(space.dim()));
    }
    slots.push_back(e.projector.matrix());
  }
  return HpoProjector::homogeneous(std::move(slots));
}

HpoProjector hpo_negate(const HpoProjector& p, const Tolerance& tol) {
  const auto complement = ComplexMatrix::identity(p.dim()) - p.matrix();
  const std::size_t n = p.n_slots();
  switch (p.form()) {
    case HpoProjector::Form::homogeneous: {
      const auto& slots = p.terms().front().slots;
      const auto id = ComplexMatrix::identity(p.slot_dim());
      std::vector<HomogeneousTerm> terms;
      // Bit k set: slot k carries I - P_k. Pattern 0 is p itself.
      for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        HomogeneousTerm t;
        bool vanishes = false;
        for (std::size_t k = 0; k < n; ++k) {
          auto s = (mask >> k) & 1U ? id - slots[k] : slots[k];
          if (tol.accepts(max_abs(s))) vanishes = true;
          t.slots.push_back(std::move(s));
        }
        if (!vanishes) terms.push_back(std::move(t));
      }
      return HpoProjector::sum(std::move(terms), n, p.slot_dim(), tol);
    }
    case HpoProjector::Form::sum:
      if (p.terms().empty()) return HpoProjector::unit(n, p.slot_dim());
      return negate_by_atoms(p, complement, tol);
    case HpoProjector::Form::untracked:
      break;
  }
  return HpoProjector::untracked(complement, n, p.slot_dim(), tol);
}

HistoryProposition unit_proposition(std::size_t n_slots, std::size_t slot_dim) {
  return {HpoProjector::unit(n_slots, slot_dim), "1"};
}

HistoryProposition null_proposition(std::size_t n_slots, std::size_t slot_dim) {
  return {HpoProjector::zero(n_slots, slot_dim), "0"};
}

HistoryProposition prop_negate(const HistoryProposition& a, const Tolerance& tol) {
  return {hpo_negate(a.hpo, tol), "not(" + a.label + ")"};
}

bool prop_leq(const HistoryProposition& a, const HistoryProposition& b, const Tolerance& tol) {
  require_same_space(a, b);
  const auto& pa = a.hpo.matrix();
  const auto& pb = b.hpo.matrix();
  return approx_equal(pa * pb, pa, tol) && approx_equal(pb * pa, pa, tol);
}

bool prop_disjoint(const HistoryProposition& a, const HistoryProposition& b, const Tolerance& tol) {
  require_same_space(a, b);
  return tol.accepts(max_abs(a.hpo.matrix() * b.hpo.matrix()));
}

HistoryProposition prop_ojoin(const HistoryProposition& a, const HistoryProposition& b, const Tolerance& tol) {
  if (!prop_disjoint(a, b, tol)) {
    throw DomainError("disjoint join of non-disjoint propositions " + a.label + " and " + b.label);
  }
  const std::string label = "(" + a.label + " + " + b.label + ")";
  const auto& ha = a.hpo;
  const auto& hb = b.hpo;
  if (ha.form() != HpoProjector::Form::untracked && hb.form() != HpoProjector::Form::untracked) {
    std::vector<HomogeneousTerm> terms = ha.terms();
    terms.insert(terms.end(), hb.terms().begin(), hb.terms().end());
    return {HpoProjector::sum(std::move(terms), ha.n_slots(), ha.slot_dim(), tol), label};
  }
  return {HpoProjector::untracked(ha.matrix() + hb.matrix(), ha.n_slots(), ha.slot_dim(), tol), label};
}

OrthoalgebraReport orthoalgebra_axiom_suite(std::span<const HistoryProposition> props, const Tolerance& tol) {
  OrthoalgebraReport report;
  if (props.empty()) {
    report.notes.push_back("empty proposition set");
    return report;
  }
  const std::size_t n_slots = props.front().hpo.n_slots();
  const std::size_t slot_dim = props.front().hpo.slot_dim();
  const auto one = unit_proposition(n_slots, slot_dim);
  const auto nil = null_proposition(n_slots, slot_dim);

  std::vector<bool> valid(props.size(), true);
  for (std::size_t i = 0; i < props.size(); ++i) {
    require_same_space(props[i], one);
    const double r = projector_residual(props[i].hpo.matrix());
    if (!is_projector(props[i].hpo.matrix(), tol)) {
      valid[i] = false;
      report.violations.add("projector", props[i].label, r);
    }
  }

  auto in_set = [&](const ComplexMatrix& m) {
    return std::any_of(props.begin(), props.end(),
                       [&](const HistoryProposition& p) { return approx_equal(p.hpo.matrix(), m, tol); });
  };
  std::set<std::string> missing;
  if (!in_set(one.hpo.matrix())) report.notes.push_back("unit proposition 1 not in the set");
  if (!in_set(nil.hpo.matrix())) report.notes.push_back("null proposition 0 not in the set");

  for (std::size_t i = 0; i < props.size(); ++i) {
    if (!valid[i]) continue;
    const auto& a = props[i];
    if (!prop_leq(nil, a, tol) || !prop_leq(a, one, tol)) report.violations.add("bounds 0 <= a <= 1", a.label);

    // Negation: a (+) not-a = 1, not-not-a = a, and uniqueness within the set.
    const auto neg = prop_negate(a, tol);
    if (!prop_disjoint(a, neg, tol) || !approx_equal(a.hpo.matrix() + neg.hpo.matrix(), one.hpo.matrix(), tol)) {
      report.violations.add("negation", a.label + " (+) not(" + a.label + ") != 1");
    }
    const auto negneg = hpo_negate(neg.hpo, tol);
    const double nn = max_abs_diff(negneg.matrix(), a.hpo.matrix());
    if (!tol.accepts(nn, 1.0)) report.violations.add("double negation", a.label, nn);
    if (!in_set(neg.hpo.matrix())) missing.insert("not(" + a.label + ")");
    for (std::size_t j = 0; j < props.size(); ++j) {
      if (!valid[j] || !prop_disjoint(a, props[j], tol)) continue;
      if (approx_equal(a.hpo.matrix() + props[j].hpo.matrix(), one.hpo.matrix(), tol) &&
          !approx_equal(props[j].hpo.matrix(), neg.hpo.matrix(), tol)) {
        report.violations.add("negation uniqueness", props[j].label + " is a second complement of " + a.label);
      }
    }
  }

  for (std::size_t i = 0; i < props.size(); ++i) {
    if (!valid[i]) continue;
    for (std::size_t j = 0; j < props.size(); ++j) {
      if (!valid[j] || i == j) continue;
      const auto& a = props[i];
      const auto& b = props[j];

      // a <= b iff b = a (+) g with g = b - a a projector disjoint from a.
      const auto g = b.hpo.matrix() - a.hpo.matrix();
      const bool g_works = is_projector(g, tol) && tol.accepts(max_abs(a.hpo.matrix() * g));
      const bool leq = prop_leq(a, b, tol);
      if (leq != g_works) {
        report.violations.add("order vs join", a.label + " <= " + b.label + " is " + (leq ? "true" : "false") +
                                                   " but the difference " + (g_works ? "is" : "is not") +
                                                   " a disjoint complement");
      }
      if (leq && !in_set(g)) missing.insert(b.label + " - " + a.label);

      if (!prop_disjoint(a, b, tol)) continue;
      const auto ab = prop_ojoin(a, b, tol);
      const auto ba = prop_ojoin(b, a, tol);
      if (!approx_equal(ab.hpo.matrix(), ba.hpo.matrix(), tol)) report.violations.add("commutativity", ab.label);
      if (!prop_leq(a, ab, tol) || !prop_leq(b, ab, tol)) report.violations.add("join upper bound", ab.label);
      if (i < j && !in_set(ab.hpo.matrix())) missing.insert(ab.label);
      for (std::size_t k = 0; k < props.size(); ++k) {
        if (!valid[k] || k == i || k == j) continue;
        const auto& c = props[k];
        if (!prop_disjoint(ab, c, tol)) continue;
        const auto bc = prop_ojoin(b, c, tol);
        if (!prop_disjoint(a, bc, tol)) {
          report.violations.add("associativity", "(" + a.label + " + " + b.label + ") + " + c.label +
                                                     " defined but the regrouping is not");
          continue;
        }
        const auto left = prop_ojoin(ab, c, tol);
        const auto right = prop_ojoin(a, bc, tol);
        if (!approx_equal(left.hpo.matrix(), right.hpo.matrix(), tol)) {
          report.violations.add("associativity", left.label + " vs " + right.label);
        }
      }
    }
  }
  for (const auto& m : missing) report.notes.push_back("generated element not in the set: " + m);
  return report;
}

ComplexMatrix chain_of_proposition(const HistoryFamily& family, std::span<const Label> labels) {
  if (labels.empty()) throw DomainError("a proposition needs at least one history");
  std::set<Label> seen;
  auto sum = ComplexMatrix::zero(family.dim(), family.dim());
  for (const auto& l : labels) {
    if (!seen.insert(l).second) throw DomainError("history " + format_label(l) + " listed twice");
    sum = sum + family.chain_operators()[family.index_of(l)].matrix;
  }
  return sum;
}

}  // namespace chq
