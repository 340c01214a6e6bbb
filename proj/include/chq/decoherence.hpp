#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "chq/errors.hpp"
#include "chq/histories.hpp"
#include "chq/matrix.hpp"
#include "chq/validation.hpp"

namespace chq {

inline constexpr double kDefaultConsistencyEpsilon = 1e-8;

enum class FunctionalKind { standard, time_symmetric };
enum class Condition { weak, medium };

std::string to_string(Condition c);
std::string to_string(FunctionalKind k);
/// "weak" / "medium"; throws DomainError otherwise.
Condition parse_condition(std::string_view text);

/// d(alpha, beta) over the labels of a family. The constructor only checks
/// shapes; use validate_generalized_functional for the functional axioms.
class DecoherenceMatrix {
 public:
  DecoherenceMatrix(std::vector<Label> labels, ComplexMatrix entries, FunctionalKind kind);

  [[nodiscard]] const std::vector<Label>& labels() const { return labels_; }
  [[nodiscard]] const ComplexMatrix& entries() const { return entries_; }
  [[nodiscard]] FunctionalKind kind() const { return kind_; }
  [[nodiscard]] std::size_t size() const { return labels_.size(); }
  [[nodiscard]] Complex operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }
  /// Throws LookupError for an unknown label.
  [[nodiscard]] std::size_t index_of(const Label& label) const;
  [[nodiscard]] Complex at(const Label& alpha, const Label& beta) const {
    return entries_(index_of(alpha), index_of(beta));
  }

 private:
  std::vector<Label> labels_;
  ComplexMatrix entries_;
  FunctionalKind kind_;
};

/// Raised when a decoherence functional is requested for a family whose
/// chain operators do not sum to the identity.
class IncompleteFamilyError : public Error {
 public:
  IncompleteFamilyError(const std::string& what, double residual) : Error(what), residual_(residual) {}
  [[nodiscard]] double residual() const { return residual_; }

 private:
  double residual_;
};

/// The time-symmetric normalization sum vanished (initial and final states
/// are incompatible with every history).
class DegeneratePosteriorError : public Error {
 public:
  using Error::Error;
};

struct PairViolation {
  Label alpha;
  Label beta;
  double residual;   // |Re d| (weak) or |d| (medium)
  double threshold;  // epsilon * max(1, sqrt(d(a,a) d(b,b)))
};

struct ConsistencyReport {
  Condition condition = Condition::weak;
  double epsilon = kDefaultConsistencyEpsilon;
  std::vector<PairViolation> violations;  // ordered by (alpha, beta)
  double max_residual = 0.0;              // over all off-diagonal pairs

  [[nodiscard]] bool consistent() const { return violations.empty(); }
};

class InconsistentFamilyError : public Error {
 public:
  explicit InconsistentFamilyError(ConsistencyReport report);
  [[nodiscard]] const ConsistencyReport& report() const { return report_; }

 private:
  ConsistencyReport report_;
};

struct ProbabilityTable {
  std::vector<std::pair<Label, double>> entries;  // label order of the matrix
  double total = 0.0;
  /// sum over alpha < beta of 2 |Re d(alpha, beta)|: the largest amount by
  /// which the probability of any disjunction of histories can deviate from
  /// the sum of its parts.
  double interference_bound = 0.0;

  /// Throws LookupError for an unknown label.
  [[nodiscard]] double probability(const Label& label) const;
};

struct InterferenceTerms {
  double p_alpha;
  double p_beta;
  double cross;  // 2 Re d(alpha, beta)
  double p_or;   // Tr(C_gamma rho C_gamma^dagger) with C_gamma = C_alpha + C_beta
};

struct FunctionalAxiomReport {
  double hermiticity = 0.0;      // max |d(a,b) - d(b,a)*|
  double min_diagonal = 0.0;     // min Re d(a,a)
  double diagonal_imag = 0.0;    // max |Im d(a,a)|
  double normalization = 0.0;    // |sum d - 1|
  double coarse_hermiticity = 0.0;
  double coarse_min_diagonal = 0.0;
  double coarse_normalization = 0.0;
  std::optional<double> biadditivity;  // set when an independent coarse matrix was supplied
  ValidationReport violations;

  [[nodiscard]] bool ok() const { return violations.ok(); }
};

/// d(alpha, beta) = Tr(C_alpha rho C_beta^dagger). Throws
/// IncompleteFamilyError when sum C_alpha != I within tol.
DecoherenceMatrix decoherence_matrix(const HistoryFamily& family, const Tolerance& tol = {});

/// d(alpha, beta) = N Tr(rho_f C_alpha rho_in C_beta^dagger) with N making
/// the entries sum to one. Requires a final state (DomainError otherwise);
/// throws DegeneratePosteriorError when the unnormalized sum vanishes.
DecoherenceMatrix time_symmetric_decoherence_matrix(const HistoryFamily& family, const Tolerance& tol = {});

/// Weak: flags |Re d(a,b)| > eps * scale; medium: flags |d(a,b)| > eps *
/// scale, scale = max(1, sqrt(d(a,a) d(b,b))). Throws DomainError for eps < 0.
ConsistencyReport check_consistency(const DecoherenceMatrix& dm, Condition condition = Condition::weak,
                                    double epsilon = kDefaultConsistencyEpsilon);

/// p(alpha) = d(alpha, alpha), clamped to [0, 1]. Throws
/// InconsistentFamilyError when the family fails the condition.
ProbabilityTable probabilities(const DecoherenceMatrix& dm, Condition condition = Condition::weak,
                               double epsilon = kDefaultConsistencyEpsilon);

/// Splits p(alpha or beta) into the two diagonal terms plus interference.
/// The histories must differ at exactly one time with orthogonal projectors
/// there; DomainError otherwise.
InterferenceTerms interference_decomposition(const HistoryFamily& family, const Label& alpha, const Label& beta,
                                             const Tolerance& tol = {});

/// Probability of a history computed by sequential collapse: the initial
/// state is split into its spectral ensemble, each member is evolved
/// between event times, projected and renormalized, and the conditional
/// probabilities are multiplied. Does not use chain operators.
double collapse_oracle(const HistoryFamily& family, const Label& label);

/// Entries of the coarse-grained functional: block sums over the partition.
/// Group g gets the label (g).
DecoherenceMatrix block_sum(const DecoherenceMatrix& dm, const std::vector<std::vector<Label>>& partition);

/// Checks hermiticity, positivity, normalization and biadditivity. When
/// `coarse` is given (e.g. recomputed from coarse_grain), its entries are
/// compared with the block sums; group g corresponds to coarse->labels()[g].
/// Throws DomainError if the partition does not cover every label exactly once.
FunctionalAxiomReport validate_generalized_functional(const DecoherenceMatrix& dm,
                                                      const std::vector<std::vector<Label>>& partition,
                                                      const DecoherenceMatrix* coarse = nullptr,
                                                      const Tolerance& tol = {});

/// Smallest eigenvalue of (D + D^dagger)/2.
double psd_floor(const DecoherenceMatrix& dm);

}  // namespace chq
