#pragma once

#include <optional>
#include <string>
#include <vector>

#include "chq/decoherence.hpp"
#include "chq/histories.hpp"

namespace chq {

enum class Relation { refines, coarsens, compatible_via, incompatible, complementary };

std::string to_string(Relation r);

/// Why two families have no consistent common refinement.
struct Obstruction {
  enum class Kind { non_commuting, inconsistent_witness };
  Kind kind = Kind::non_commuting;
  double time = 0.0;
  std::string first;   // projector label from the first family
  std::string second;  // projector label from the second family
  double commutator = 0.0;
  std::optional<ConsistencyReport> consistency;

  [[nodiscard]] std::string describe() const;
};

/// Product P Q that vanished while building a common refinement. The
/// combination is recorded rather than kept as a zero projector.
struct ImpossibleBranch {
  double time;
  std::string first;
  std::string second;
};

struct CommonRefinement {
  std::optional<HistoryFamily> family;
  std::optional<Obstruction> obstruction;
  std::vector<ImpossibleBranch> impossible;
};

struct FamilyRelationReport {
  Relation relation = Relation::incompatible;
  std::optional<HistoryFamily> witness;
  std::optional<Obstruction> obstruction;
  std::string note;

  [[nodiscard]] bool compatible() const {
    return relation == Relation::refines || relation == Relation::coarsens || relation == Relation::compatible_via;
  }
};

/// Raised by are_compatible when an input family is itself inconsistent.
class FamilyPreconditionError : public Error {
 public:
  FamilyPreconditionError(const std::string& which, ConsistencyReport report);
  [[nodiscard]] const ConsistencyReport& report() const { return report_; }

 private:
  ConsistencyReport report_;
};

/// True iff supp(g) contains supp(f) and, at every time of f, each projector
/// of f is a sum of projectors of g. Product families only.
bool is_refinement(const HistoryFamily& g, const HistoryFamily& f, const Tolerance& tol = {});

/// Canonical common refinement over the union of the supports, using the
/// products P Q at shared times. Absent (with the obstruction) if some pair
/// fails to commute. Throws DomainError for mismatched dynamics or initial
/// state.
CommonRefinement common_refinement(const HistoryFamily& f1, const HistoryFamily& f2, const Tolerance& tol = {});

/// Compatible iff a consistent common refinement exists. When none exists
/// because of non-commuting decompositions the pair is reported as
/// complementary. Throws FamilyPreconditionError for inconsistent inputs.
FamilyRelationReport are_compatible(const HistoryFamily& f1, const HistoryFamily& f2,
                                    Condition condition = Condition::weak,
                                    double epsilon = kDefaultConsistencyEpsilon, const Tolerance& tol = {});

}  // namespace chq
