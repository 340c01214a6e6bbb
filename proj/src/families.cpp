#include "chq/families.hpp"

#include <algorithm>
#include <sstream>

namespace chq {

namespace {

void require_product(const HistoryFamily& f, const char* what) {
  if (f.structure() != FamilyStructure::product) {
    throw UnsupportedStructureError(std::string(what) + " requires product families with per-time decompositions");
  }
}

std::string name_of(const Projector& p, std::size_t index) {
  return p.label().empty() ? "#" + std::to_string(index) : p.label();
}

// Every projector of `coarse` must be the sum of the members of `fine` it contains.
bool is_finer_decomposition(const DecompositionOfUnity& fine, const DecompositionOfUnity& coarse,
                            const Tolerance& tol) {
  if (fine.dim() != coarse.dim()) return false;
  for (const auto& p : coarse.projectors) {
    auto sum = ComplexMatrix::zero(p.dim(), p.dim());
    for (const auto& q : fine.projectors) {
      if (approx_equal(p.matrix() * q.matrix(), q.matrix(), tol)) sum = sum + q.matrix();
    }
    if (!approx_equal(sum, p.matrix(), tol)) return false;
  }
  return true;
}

void require_same_kinematics(const HistoryFamily& f1, const HistoryFamily& f2, const Tolerance& tol) {
  if (f1.dim() != f2.dim()) throw DomainError("families act on Hilbert spaces of different dimension");
  if (!approx_equal(f1.dynamics().hamiltonian(), f2.dynamics().hamiltonian(), tol) ||
      f1.dynamics().reference_time() != f2.dynamics().reference_time()) {
    throw DomainError("families have different dynamics");
  }
  if (!approx_equal(f1.initial_state().matrix(), f2.initial_state().matrix(), tol)) {
    throw DomainError("families have different initial states");
  }
}

}  // namespace

std::string to_string(Relation r) {
  switch (r) {
    case Relation::refines: return "refines";
    case Relation::coarsens: return "coarsens";
    case Relation::compatible_via: return "compatible_via";
    case Relation::incompatible: return "incompatible";
    case Relation::complementary: return "complementary";
  }
  return "unknown";
}

std::string Obstruction::describe() const {
  std::ostringstream os;
  if (kind == Kind::non_commuting) {
    os << "projectors " << first << " and " << second << " at t = " << time
       << " do not commute (|[P,Q]| = " << commutator << ")";
  } else {
    os << "common refinement violates the decoherence condition";
    if (consistency) os << " (" << consistency->violations.size() << " pair(s), largest residual "
                        << consistency->max_residual << ")";
  }
  return os.str();
}

FamilyPreconditionError::FamilyPreconditionError(const std::string& which, ConsistencyReport report)
    : Error(which + " family is not consistent; compatibility is only defined between consistent families"),
      report_(std::move(report)) {}

bool is_refinement(const HistoryFamily& g, const HistoryFamily& f, const Tolerance& tol) {
  require_product(g, "is_refinement");
  require_product(f, "is_refinement");
  for (std::size_t j = 0; j < f.support().size(); ++j) {
    const auto k = g.support().index_of(f.support()[j]);
    if (!k) return false;
    if (!is_finer_decomposition(g.decompositions()[*k], f.decompositions()[j], tol)) return false;
  }
  return true;
}

CommonRefinement common_refinement(const HistoryFamily& f1, const HistoryFamily& f2, const Tolerance& tol) {
  require_product(f1, "common_refinement");
  require_product(f2, "common_refinement");
  require_same_kinematics(f1, f2, tol);

  std::vector<double> times = f1.support().times();
  times.insert(times.end(), f2.support().times().begin(), f2.support().times().end());
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  CommonRefinement result;
  std::vector<DecompositionOfUnity> decomps;
  for (double t : times) {
    const auto i1 = f1.support().index_of(t);
    const auto i2 = f2.support().index_of(t);
    if (!i1 || !i2) {
      decomps.push_back(i1 ? f1.decompositions()[*i1] : f2.decompositions()[*i2]);
      continue;
    }
    const auto& d1 = f1.decompositions()[*i1];
    const auto& d2 = f2.decompositions()[*i2];
    DecompositionOfUnity merged;
    merged.time = t;
    for (std::size_t a = 0; a < d1.size(); ++a) {
      for (std::size_t b = 0; b < d2.size(); ++b) {
        const auto& p = d1.projectors[a];
        const auto& q = d2.projectors[b];
        const auto pq = p.matrix() * q.matrix();
        const double commutator = max_abs(pq - q.matrix() * p.matrix());
        if (!tol.accepts(commutator)) {
          result.obstruction = Obstruction{Obstruction::Kind::non_commuting, t, name_of(p, a), name_of(q, b),
                                           commutator, std::nullopt};
          return result;
        }
        if (tol.accepts(max_abs(pq))) {
          result.impossible.push_back({t, name_of(p, a), name_of(q, b)});
          continue;
        }
        // Equal members keep a single label so that refining a family by
        // itself reproduces it.
        std::string label = approx_equal(p.matrix(), q.matrix(), tol) ? p.label()
                                                                      : name_of(p, a) + "&" + name_of(q, b);
        merged.projectors.emplace_back(pq, std::move(label), tol);
      }
    }
    decomps.push_back(std::move(merged));
  }
  result.family = product_family(TemporalSupport(std::move(times)), std::move(decomps), f1.dynamics(),
                                 f1.initial_state(), tol)
                      .with_final_state(f1.final_state());
  return result;
}

FamilyRelationReport are_compatible(const HistoryFamily& f1, const HistoryFamily& f2, Condition condition,
                                    double epsilon, const Tolerance& tol) {
  require_product(f1, "are_compatible");
  require_product(f2, "are_compatible");
  auto r1 = check_consistency(decoherence_matrix(f1, tol), condition, epsilon);
  if (!r1.consistent()) throw FamilyPreconditionError("first", std::move(r1));
  auto r2 = check_consistency(decoherence_matrix(f2, tol), condition, epsilon);
  if (!r2.consistent()) throw FamilyPreconditionError("second", std::move(r2));
  require_same_kinematics(f1, f2, tol);

  FamilyRelationReport report;
  if (is_refinement(f1, f2, tol)) {
    report.relation = Relation::refines;
    report.witness = f1;
    report.note = "first family refines the second";
    return report;
  }
  if (is_refinement(f2, f1, tol)) {
    report.relation = Relation::coarsens;
    report.witness = f2;
    report.note = "first family is a coarsening of the second";
    return report;
  }

  auto common = common_refinement(f1, f2, tol);
  if (!common.family) {
    report.relation = Relation::complementary;
    report.obstruction = common.obstruction;
    report.note =
        "both families are consistent but share support times with non-commuting decompositions, so no common "
        "refinement exists (structural complementarity)";
    return report;
  }
  auto rc = check_consistency(decoherence_matrix(*common.family, tol), condition, epsilon);
  if (!rc.consistent()) {
    report.relation = Relation::incompatible;
    report.obstruction = Obstruction{Obstruction::Kind::inconsistent_witness, 0.0, {}, {}, 0.0, std::move(rc)};
    report.note = "the canonical common refinement is not consistent";
    return report;
  }
  report.relation = Relation::compatible_via;
  report.witness = std::move(common.family);
  report.note = "compatible via the product-projector common refinement";
  return report;
}

}  // namespace chq
