#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "chq/histories.hpp"
#include "chq/validation.hpp"

namespace chq {

/// Element of K1: a nonempty, strictly increasing finite set of times.
class K1Element {
 public:
  /// Throws DomainError for an empty or non-increasing sequence.
  explicit K1Element(std::vector<double> times);

  [[nodiscard]] const std::vector<double>& times() const { return times_; }
  [[nodiscard]] std::size_t size() const { return times_.size(); }
  [[nodiscard]] bool nuclear() const { return times_.size() == 1; }
  auto operator<=>(const K1Element&) const = default;

 private:
  std::vector<double> times_;
};

std::string to_string(const K1Element& t);

/// s o t, defined iff s_m <= t_1. A shared endpoint is merged, so that
/// {t} o {t} = {t}.
std::optional<K1Element> k1_compose(const K1Element& s, const K1Element& t);

/// {t_1} o {t_2} o ... o {t_n}.
std::vector<K1Element> k1_nuclear_decomposition(const K1Element& t);

/// Element of K2: a history as a time-ordered event sequence.
class K2Element {
 public:
  /// Throws DomainError for an empty sequence or non-increasing times.
  explicit K2Element(std::vector<QuantumEvent> events);

  [[nodiscard]] const std::vector<QuantumEvent>& events() const { return events_; }
  [[nodiscard]] std::size_t size() const { return events_.size(); }

 private:
  std::vector<QuantumEvent> events_;
};

/// Same times and (within tol) the same projectors.
bool same_history(const K2Element& a, const K2Element& b, const Tolerance& tol = {});

/// a o b, defined iff the last time of a is strictly before the first of b.
std::optional<K2Element> k2_compose(const K2Element& a, const K2Element& b);

/// sigma: K2 -> K1, the temporal support of a history.
K1Element sigma_support(const K2Element& a);

/// Finite partial semigroup given by an explicit composition table.
struct FinitePsg {
  std::vector<std::string> elements;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> table;

  [[nodiscard]] std::size_t size() const { return elements.size(); }
  [[nodiscard]] std::optional<std::size_t> compose(std::size_t s, std::size_t t) const;
  /// Throws LookupError for an unknown name.
  [[nodiscard]] std::size_t index_of(const std::string& name) const;

  /// Builds the table from (left, right, result) name triples. Throws
  /// DomainError for unknown or duplicate names and for conflicting entries.
  static FinitePsg from_triples(std::vector<std::string> elements,
                                const std::vector<std::tuple<std::string, std::string, std::string>>& triples);
};

inline constexpr std::size_t kDefaultPsgElementCap = 64;

struct PsgReport {
  ValidationReport violations;  // associativity, directedness, uniqueness of unit/absorbing
  bool associative = true;
  bool directed = true;
  std::optional<std::size_t> unit;
  std::optional<std::size_t> absorbing;
  std::vector<std::size_t> nuclear;  // typical elements with no decomposition s o t, s != x != t
};

/// Exhaustive O(n^3) scan. Throws DomainError when the table has more than
/// max_elements elements.
PsgReport validate_finite_psg(const FinitePsg& p, std::size_t max_elements = kDefaultPsgElementCap);

/// Lists every defined s o t whose image under sigma is not composable or
/// composes to something other than sigma(s o t).
ValidationReport check_homomorphism(const FinitePsg& p, std::span<const std::size_t> sigma, const FinitePsg& support);

/// Causality on a finite instance: flags nuclear chains a < b < ... < c
/// (x < y meaning x o y is defined) with sigma(a) = sigma(c) whose elements
/// are not all equal. Throws DomainError if sigma is not a homomorphism.
ValidationReport check_causality(const FinitePsg& p, std::span<const std::size_t> sigma, const FinitePsg& support,
                                 std::size_t max_elements = kDefaultPsgElementCap);

/// (history psg, support psg, sigma).
struct QuasitemporalStructure {
  FinitePsg history_psg;
  FinitePsg support_psg;
  std::vector<std::size_t> sigma;
};

/// Homomorphism, surjectivity and sigma[N(U)] = N(T) on the supplied tables.
ValidationReport validate_quasitemporal(const QuasitemporalStructure& q,
                                        std::size_t max_elements = kDefaultPsgElementCap);

/// K1 restricted to the nonempty subsets of `times`, with its elements.
struct FiniteK1 {
  FinitePsg psg;
  std::vector<K1Element> elements;
};
FiniteK1 finite_k1(std::span<const double> times);

/// K2 restricted to histories over subsets of `times` with projectors drawn
/// from `alphabet`, together with sigma onto finite_k1(times).
struct FiniteK2 {
  QuasitemporalStructure structure;
  std::vector<K2Element> elements;
};
FiniteK2 finite_k2(std::span<const double> times, const std::vector<Projector>& alphabet);

}  // namespace chq
