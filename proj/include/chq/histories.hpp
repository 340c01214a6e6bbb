#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chq/kinematics.hpp"
#include "chq/matrix.hpp"

namespace chq {

/// Branch indices (alpha_1, ..., alpha_n), one per support time.
using Label = std::vector<std::size_t>;

/// "(0,1,0)".
std::string format_label(const Label& label);

struct QuantumEvent {
  double time;
  Projector projector;
};

/// Strictly increasing, nonempty sequence of finite times.
class TemporalSupport {
 public:
  /// Throws DomainError naming the first offending pair.
  explicit TemporalSupport(std::vector<double> times);

  [[nodiscard]] const std::vector<double>& times() const { return times_; }
  [[nodiscard]] std::size_t size() const { return times_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return times_[i]; }
  [[nodiscard]] std::optional<std::size_t> index_of(double t) const;
  bool operator==(const TemporalSupport&) const = default;

 private:
  std::vector<double> times_;
};

class History {
 public:
  /// Throws DomainError for an empty sequence or non-increasing times.
  explicit History(std::vector<QuantumEvent> events, Label label = {});

  [[nodiscard]] const std::vector<QuantumEvent>& events() const { return events_; }
  [[nodiscard]] const Label& label() const { return label_; }
  [[nodiscard]] std::size_t size() const { return events_.size(); }
  [[nodiscard]] TemporalSupport support() const;
  /// Projector labels joined by ',' (falls back to branch indices).
  [[nodiscard]] std::string display_name() const;

 private:
  std::vector<QuantumEvent> events_;
  Label label_;
};

/// C_alpha. Generally not a projector.
struct ChainOperator {
  ComplexMatrix matrix;
  Label label;
};

/// Maps the branch prefix (alpha_1, ..., alpha_{j-1}) to the decomposition
/// used at support time t_j.
using BranchResolver = std::function<DecompositionOfUnity(std::span<const std::size_t> prefix)>;
/// Resolved form of a BranchResolver: every realizable prefix and its decomposition.
using BranchTree = std::map<Label, DecompositionOfUnity>;

/// 0/1 grouping matrices b[beta][alpha] keyed by support index. Each fine
/// index alpha must belong to exactly one coarse index beta, and every
/// coarse index must be nonempty.
struct CoarseGraining {
  std::map<std::size_t, std::vector<std::vector<int>>> groupings;
};

enum class FamilyStructure { product, branch_dependent, general };

/// Labelled set of histories over one support, together with the dynamics
/// and the initial (optionally final) state. Immutable; chain operators are
/// computed once on construction.
class HistoryFamily {
 public:
  /// Generic constructor: checks shared support and unique labels but not
  /// completeness (see completeness_check). Histories are stored in
  /// lexicographic label order.
  static HistoryFamily from_histories(TemporalSupport support, std::vector<History> histories, Dynamics dynamics,
                                      DensityOperator initial_state,
                                      std::optional<DensityOperator> final_state = std::nullopt);

  [[nodiscard]] const TemporalSupport& support() const { return support_; }
  [[nodiscard]] const std::vector<History>& histories() const { return histories_; }
  [[nodiscard]] const std::vector<ChainOperator>& chain_operators() const { return chains_; }
  [[nodiscard]] const Dynamics& dynamics() const { return dynamics_; }
  [[nodiscard]] const DensityOperator& initial_state() const { return initial_; }
  [[nodiscard]] const std::optional<DensityOperator>& final_state() const { return final_; }
  [[nodiscard]] FamilyStructure structure() const { return structure_; }
  [[nodiscard]] std::size_t size() const { return histories_.size(); }
  [[nodiscard]] std::size_t dim() const { return dynamics_.dim(); }

  /// Per-time decompositions; throws UnsupportedStructureError unless product.
  [[nodiscard]] const std::vector<DecompositionOfUnity>& decompositions() const;
  [[nodiscard]] const std::optional<BranchTree>& branch_tree() const { return tree_; }
  /// The grouping that produced this family, when it came from coarse_grain.
  [[nodiscard]] const std::optional<CoarseGraining>& coarse_record() const { return coarse_record_; }

  [[nodiscard]] bool contains(const Label& label) const;
  /// Throws LookupError for an unknown label.
  [[nodiscard]] std::size_t index_of(const Label& label) const;

  /// Same histories bound to another initial state.
  [[nodiscard]] HistoryFamily with_initial_state(DensityOperator rho) const;
  [[nodiscard]] HistoryFamily with_final_state(std::optional<DensityOperator> rho) const;

 private:
  HistoryFamily(TemporalSupport support, Dynamics dynamics, DensityOperator initial,
                std::optional<DensityOperator> final_state);
  void build_chains();

  TemporalSupport support_;
  std::vector<History> histories_;
  std::vector<ChainOperator> chains_;
  std::map<Label, std::size_t> index_;
  Dynamics dynamics_;
  DensityOperator initial_;
  std::optional<DensityOperator> final_;
  FamilyStructure structure_ = FamilyStructure::general;
  std::vector<DecompositionOfUnity> decomps_;
  std::optional<BranchTree> tree_;
  std::optional<CoarseGraining> coarse_record_;

  friend HistoryFamily product_family(const TemporalSupport&, std::vector<DecompositionOfUnity>, const Dynamics&,
                                      const DensityOperator&, const Tolerance&);
  friend HistoryFamily branch_dependent_family(const TemporalSupport&, const BranchResolver&, const Dynamics&,
                                               const DensityOperator&, const Tolerance&);
  friend HistoryFamily coarse_grain(const HistoryFamily&, const CoarseGraining&, const Tolerance&);
};

/// All sequences (alpha_1, ..., alpha_n) over one decomposition per support
/// time. Each decomposition's time is set to the matching support time.
/// Throws ShapeError on a count/dimension mismatch and DomainError for an
/// invalid decomposition.
HistoryFamily product_family(const TemporalSupport& support, std::vector<DecompositionOfUnity> decomps,
                             const Dynamics& dyn, const DensityOperator& rho, const Tolerance& tol = {});

/// Family whose decomposition at t_j may depend on the earlier branches.
HistoryFamily branch_dependent_family(const TemporalSupport& support, const BranchResolver& resolver,
                                      const Dynamics& dyn, const DensityOperator& rho, const Tolerance& tol = {});

/// Replaces the decomposition at the grouped times by the coarser projectors
/// Q_beta = sum_alpha b[beta][alpha] P_alpha; the support is unchanged.
/// Product families only (UnsupportedStructureError otherwise).
HistoryFamily coarse_grain(const HistoryFamily& family, const CoarseGraining& grouping, const Tolerance& tol = {});

/// For each history of coarse_grain(fine, grouping), in that family's label
/// order, the fine labels it is made of.
std::vector<std::vector<Label>> coarse_partition(const HistoryFamily& fine, const CoarseGraining& grouping);

/// Drops support times whose decomposition is the single projector I
/// (keeps one time if every time is trivial). Product families only.
HistoryFamily drop_identity_events(const HistoryFamily& family, const Tolerance& tol = {});

/// Throws LookupError for an unknown label.
ChainOperator chain_operator(const HistoryFamily& family, const Label& label);

/// |sum_alpha C_alpha - I| in the max-entry norm.
double completeness_check(const HistoryFamily& family);

}  // namespace chq
