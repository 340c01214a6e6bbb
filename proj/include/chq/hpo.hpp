#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "chq/histories.hpp"
#include "chq/kinematics.hpp"
#include "chq/matrix.hpp"
#include "chq/validation.hpp"

namespace chq {

/// Largest tensor-space dimension d^n an HPO may have.
inline constexpr std::size_t kMaxHpoDimension = 4096;

/// slot_1 (x) slot_2 (x) ... (x) slot_n.
struct HomogeneousTerm {
  std::vector<ComplexMatrix> slots;
};

/// Projector on the n-fold tensor power of a d-dimensional space. Whether it
/// is homogeneous is known from how it was built, never inferred from the
/// matrix.
class HpoProjector {
 public:
  enum class Form { homogeneous, sum, untracked };

  /// Throws DomainError if a slot is not a projector, ShapeError for
  /// mismatched slot dimensions or a tensor space above kMaxHpoDimension.
  static HpoProjector homogeneous(std::vector<ComplexMatrix> slots, const Tolerance& tol = {});
  /// Orthogonal sum of homogeneous terms (DomainError if two terms overlap).
  /// A single term yields the homogeneous form, no terms the zero projector.
  static HpoProjector sum(std::vector<HomogeneousTerm> terms, std::size_t n_slots, std::size_t slot_dim,
                          const Tolerance& tol = {});
  /// A projector known only as a matrix (DomainError if it is not one).
  static HpoProjector untracked(ComplexMatrix matrix, std::size_t n_slots, std::size_t slot_dim,
                                const Tolerance& tol = {});
  /// Skips the projector check; for feeding deliberately broken inputs to
  /// diagnostic suites.
  static HpoProjector unchecked(ComplexMatrix matrix, std::size_t n_slots, std::size_t slot_dim);
  static HpoProjector unit(std::size_t n_slots, std::size_t slot_dim);
  static HpoProjector zero(std::size_t n_slots, std::size_t slot_dim);

  [[nodiscard]] const ComplexMatrix& matrix() const { return matrix_; }
  [[nodiscard]] std::size_t n_slots() const { return n_slots_; }
  [[nodiscard]] std::size_t slot_dim() const { return slot_dim_; }
  [[nodiscard]] std::size_t dim() const { return matrix_.rows(); }
  [[nodiscard]] Form form() const { return form_; }
  /// One term when homogeneous, the summands when a sum, none when untracked.
  [[nodiscard]] const std::vector<HomogeneousTerm>& terms() const { return terms_; }

 private:
  HpoProjector(ComplexMatrix matrix, std::size_t n_slots, std::size_t slot_dim, Form form,
               std::vector<HomogeneousTerm> terms);

  ComplexMatrix matrix_;
  std::size_t n_slots_;
  std::size_t slot_dim_;
  Form form_;
  std::vector<HomogeneousTerm> terms_;
};

struct HistoryProposition {
  HpoProjector hpo;
  std::string label;
};

/// Homogeneous HPO of a history's (Schroedinger-picture) projectors in time
/// order. Throws ShapeError if a projector does not act on `space`.
HpoProjector hpo_embed(const History& history, const HilbertSpace& space);

/// I - p. For homogeneous p the structure is the orthogonal sum over all
/// slot patterns of {P_k, I - P_k} except the all-P pattern (patterns with a
/// zero slot are dropped). Sums over commuting slot projectors are expanded
/// into atoms; anything else comes back untracked.
HpoProjector hpo_negate(const HpoProjector& p, const Tolerance& tol = {});

HistoryProposition unit_proposition(std::size_t n_slots, std::size_t slot_dim);
HistoryProposition null_proposition(std::size_t n_slots, std::size_t slot_dim);
HistoryProposition prop_negate(const HistoryProposition& a, const Tolerance& tol = {});

/// a b = b a = a. Throws ShapeError for different tensor spaces.
bool prop_leq(const HistoryProposition& a, const HistoryProposition& b, const Tolerance& tol = {});
/// a b = 0. Throws ShapeError for different tensor spaces.
bool prop_disjoint(const HistoryProposition& a, const HistoryProposition& b, const Tolerance& tol = {});
/// a + b for disjoint a, b; DomainError otherwise.
HistoryProposition prop_ojoin(const HistoryProposition& a, const HistoryProposition& b, const Tolerance& tol = {});

struct OrthoalgebraReport {
  ValidationReport violations;
  std::vector<std::string> notes;  // elements the checks needed but the set lacks

  [[nodiscard]] bool ok() const { return violations.ok(); }
};

/// Checks the orthoalgebra laws on a finite set of propositions: projector
/// property, 0 <= a <= 1, commutativity and associativity of the disjoint
/// join, a <= b iff b = a (+) g for some g, a (+) not-a = 1, uniqueness of
/// the negation within the set, and not-not-a = a.
OrthoalgebraReport orthoalgebra_axiom_suite(std::span<const HistoryProposition> props, const Tolerance& tol = {});

/// C_gamma = sum of the chain operators of the listed histories. Throws
/// DomainError for repeated labels and LookupError for unknown ones.
ComplexMatrix chain_of_proposition(const HistoryFamily& family, std::span<const Label> labels);

}  // namespace chq
