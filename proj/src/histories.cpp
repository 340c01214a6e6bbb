#include "chq/histories.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chq/errors.hpp"

namespace chq {

namespace {

void require_valid(const DecompositionOfUnity& d, std::size_t dim, const std::string& where,
                   const Tolerance& tol) {
  if (d.dim() != dim) {
    throw ShapeError(where + ": decomposition dimension " + std::to_string(d.dim()) +
                     " does not match Hilbert space dimension " + std::to_string(dim));
  }
  const auto report = validate_decomposition(d, tol);
  if (!report.ok()) throw DomainError(where + ": invalid decomposition of unity: " + report.summary());
}

std::string join_labels(const DecompositionOfUnity& d, const std::vector<int>& row) {
  std::string out;
  for (std::size_t a = 0; a < row.size(); ++a) {
    if (row[a] != 1) continue;
    if (!out.empty()) out += "|";
    out += d.projectors[a].label().empty() ? std::to_string(a) : d.projectors[a].label();
  }
  return out;
}

}  // namespace

std::string format_label(const Label& label) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < label.size(); ++i) os << (i ? "," : "") << label[i];
  os << ")";
  return os.str();
}

TemporalSupport::TemporalSupport(std::vector<double> times) : times_(std::move(times)) {
  if (times_.empty()) throw DomainError("temporal support must be nonempty");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i])) throw DomainError("temporal support times must be finite");
    if (i > 0 && !(times_[i - 1] < times_[i])) {
      std::ostringstream os;
      os << "times must be strictly increasing: t[" << i - 1 << "] = " << times_[i - 1] << " >= t[" << i
         << "] = " << times_[i];
      throw DomainError(os.str());
    }
  }
}

std::optional<std::size_t> TemporalSupport::index_of(double t) const {
  const auto it = std::lower_bound(times_.begin(), times_.end(), t);
  if (it == times_.end() || *it != t) return std::nullopt;
  return static_cast<std::size_t>(it - times_.begin());
}

History::History(std::vector<QuantumEvent> events, Label label)
    : events_(std::move(events)), label_(std::move(label)) {
  if (events_.empty()) throw DomainError("a history needs at least one event");
  std::vector<double> times;
  times.reserve(events_.size());
  for (const auto& e : events_) times.push_back(e.time);
  TemporalSupport check(std::move(times));
  const std::size_t dim = events_.front().projector.dim();
  for (const auto& e : events_) {
    if (e.projector.dim() != dim) throw ShapeError("history projectors act on different spaces");
  }
}

TemporalSupport History::support() const {
  std::vector<double> times;
  for (const auto& e : events_) times.push_back(e.time);
  return TemporalSupport(std::move(times));
}

std::string History::display_name() const {
  std::string out;
  for (std::size_t j = 0; j < events_.size(); ++j) {
    if (j) out += ",";
    const auto& l = events_[j].projector.label();
    out += l.empty() ? (j < label_.size() ? std::to_string(label_[j]) : "?") : l;
  }
  return out;
}

HistoryFamily::HistoryFamily(TemporalSupport support, Dynamics dynamics, DensityOperator initial,
                             std::optional<DensityOperator> final_state)
    : support_(std::move(support)),
      dynamics_(std::move(dynamics)),
      initial_(std::move(initial)),
      final_(std::move(final_state)) {
  if (initial_.dim() != dynamics_.dim()) throw ShapeError("initial state and Hamiltonian dimensions differ");
  if (final_ && final_->dim() != dynamics_.dim()) throw ShapeError("final state and Hamiltonian dimensions differ");
}

HistoryFamily HistoryFamily::from_histories(TemporalSupport support, std::vector<History> histories,
                                            Dynamics dynamics, DensityOperator initial_state,
                                            std::optional<DensityOperator> final_state) {
  HistoryFamily f(std::move(support), std::move(dynamics), std::move(initial_state), std::move(final_state));
  if (histories.empty()) throw DomainError("a family needs at least one history");
  std::sort(histories.begin(), histories.end(),
            [](const History& a, const History& b) { return a.label() < b.label(); });
  for (std::size_t i = 0; i < histories.size(); ++i) {
    const auto& h = histories[i];
    if (!(h.support() == f.support_)) {
      throw DomainError("history " + format_label(h.label()) + " does not share the family support");
    }
    if (h.events().front().projector.dim() != f.dim()) {
      throw ShapeError("history " + format_label(h.label()) + " acts on a space of the wrong dimension");
    }
    if (!f.index_.emplace(h.label(), i).second) {
      throw DomainError("duplicate history label " + format_label(h.label()));
    }
  }
  f.histories_ = std::move(histories);
  f.build_chains();
  return f;
}

void HistoryFamily::build_chains() {
  const std::size_t n = support_.size();
  std::vector<ComplexMatrix> u;
  u.reserve(n);
  for (std::size_t j = 0; j < n; ++j) u.push_back(propagator(dynamics_, dynamics_.reference_time(), support_[j]));
  chains_.clear();
  chains_.reserve(histories_.size());
  for (const auto& h : histories_) {
    auto c = ComplexMatrix::identity(dim());
    for (std::size_t j = 0; j < n; ++j) {
      const auto heis = adjoint(u[j]) * h.events()[j].projector.matrix() * u[j];
      c = heis * c;  // latest time leftmost
    }
    chains_.push_back({std::move(c), h.label()});
  }
}

const std::vector<DecompositionOfUnity>& HistoryFamily::decompositions() const {
  if (structure_ != FamilyStructure::product) {
    throw UnsupportedStructureError("per-time decompositions exist only for product families");
  }
  return decomps_;
}

bool HistoryFamily::contains(const Label& label) const { return index_.contains(label); }

std::size_t HistoryFamily::index_of(const Label& label) const {
  const auto it = index_.find(label);
  if (it == index_.end()) throw LookupError("no history labelled " + format_label(label));
  return it->second;
}

HistoryFamily HistoryFamily::with_initial_state(DensityOperator rho) const {
  if (rho.dim() != dim()) throw ShapeError("initial state has the wrong dimension");
  HistoryFamily copy = *this;
  copy.initial_ = std::move(rho);
  return copy;
}

HistoryFamily HistoryFamily::with_final_state(std::optional<DensityOperator> rho) const {
  if (rho && rho->dim() != dim()) throw ShapeError("final state has the wrong dimension");
  HistoryFamily copy = *this;
  copy.final_ = std::move(rho);
  return copy;
}

HistoryFamily product_family(const TemporalSupport& support, std::vector<DecompositionOfUnity> decomps,
                             const Dynamics& dyn, const DensityOperator& rho, const Tolerance& tol) {
  if (decomps.size() != support.size()) {
    throw ShapeError("product_family: " + std::to_string(decomps.size()) + " decompositions for " +
                     std::to_string(support.size()) + " support times");
  }
  for (std::size_t j = 0; j < decomps.size(); ++j) {
    decomps[j].time = support[j];
    require_valid(decomps[j], dyn.dim(), "product_family (time index " + std::to_string(j) + ")", tol);
  }

  std::size_t total = 1;
  for (const auto& d : decomps) total *= d.size();
  std::vector<History> histories;
  histories.reserve(total);
  for (std::size_t k = 0; k < total; ++k) {
    // Mixed-radix decode, last index fastest: lexicographic order.
    Label label(support.size(), 0);
    std::size_t rest = k;
    for (std::size_t j = support.size(); j-- > 0;) {
      label[j] = rest % decomps[j].size();
      rest /= decomps[j].size();
    }
    std::vector<QuantumEvent> events;
    events.reserve(label.size());
    for (std::size_t j = 0; j < label.size(); ++j) events.push_back({support[j], decomps[j].projectors[label[j]]});
    histories.emplace_back(std::move(events), std::move(label));
  }

  auto family = HistoryFamily::from_histories(support, std::move(histories), dyn, rho);
  family.structure_ = FamilyStructure::product;
  family.decomps_ = std::move(decomps);
  return family;
}

HistoryFamily branch_dependent_family(const TemporalSupport& support, const BranchResolver& resolver,
                                      const Dynamics& dyn, const DensityOperator& rho, const Tolerance& tol) {
  BranchTree tree;
  std::vector<History> histories;
  std::vector<QuantumEvent> path;
  Label prefix;

  std::function<void()> expand = [&]() {
    const std::size_t j = prefix.size();
    if (j == support.size()) {
      histories.emplace_back(path, prefix);
      return;
    }
    auto d = resolver(std::span<const std::size_t>(prefix.data(), prefix.size()));
    d.time = support[j];
    require_valid(d, dyn.dim(), "branch_dependent_family (prefix " + format_label(prefix) + ")", tol);
    for (std::size_t a = 0; a < d.size(); ++a) {
      prefix.push_back(a);
      path.push_back({support[j], d.projectors[a]});
      expand();
      path.pop_back();
      prefix.pop_back();
    }
    tree.emplace(prefix, std::move(d));
  };
  expand();

  auto family = HistoryFamily::from_histories(support, std::move(histories), dyn, rho);
  family.structure_ = FamilyStructure::branch_dependent;
  family.tree_ = std::move(tree);
  return family;
}

namespace {

void validate_grouping(const HistoryFamily& family, const CoarseGraining& grouping) {
  const auto& decomps = family.decompositions();
  for (const auto& [j, b] : grouping.groupings) {
    if (j >= decomps.size()) throw DomainError("coarse_grain: time index " + std::to_string(j) + " out of range");
    const std::size_t fine = decomps[j].size();
    if (b.empty()) throw DomainError("coarse_grain: empty grouping matrix at time index " + std::to_string(j));
    std::vector<int> owners(fine, 0);
    for (std::size_t beta = 0; beta < b.size(); ++beta) {
      if (b[beta].size() != fine) {
        throw DomainError("coarse_grain: grouping row " + std::to_string(beta) + " at time index " +
                          std::to_string(j) + " has " + std::to_string(b[beta].size()) + " columns, expected " +
                          std::to_string(fine));
      }
      int members = 0;
      for (std::size_t a = 0; a < fine; ++a) {
        if (b[beta][a] != 0 && b[beta][a] != 1) throw DomainError("coarse_grain: grouping entries must be 0 or 1");
        members += b[beta][a];
        owners[a] += b[beta][a];
      }
      if (members == 0) throw DomainError("coarse_grain: coarse branch " + std::to_string(beta) + " is empty");
    }
    for (std::size_t a = 0; a < fine; ++a) {
      if (owners[a] != 1) {
        throw DomainError("coarse_grain: fine branch " + std::to_string(a) + " at time index " + std::to_string(j) +
                          " belongs to " + std::to_string(owners[a]) + " coarse branches (not a partition)");
      }
    }
  }
}

}  // namespace

HistoryFamily coarse_grain(const HistoryFamily& family, const CoarseGraining& grouping, const Tolerance& tol) {
  if (family.structure() != FamilyStructure::product) {
    throw UnsupportedStructureError("coarse_grain is defined for product families only");
  }
  validate_grouping(family, grouping);
  auto decomps = family.decompositions();
  for (const auto& [j, b] : grouping.groupings) {
    const auto& fine = family.decompositions()[j];
    DecompositionOfUnity coarse;
    coarse.time = fine.time;
    for (const auto& row : b) {
      auto sum = ComplexMatrix::zero(family.dim(), family.dim());
      for (std::size_t a = 0; a < row.size(); ++a) {
        if (row[a] == 1) sum = sum + fine.projectors[a].matrix();
      }
      coarse.projectors.emplace_back(std::move(sum), join_labels(fine, row), tol);
    }
    decomps[j] = std::move(coarse);
  }
  auto out = product_family(family.support(), std::move(decomps), family.dynamics(), family.initial_state(), tol);
  out.final_ = family.final_state();
  out.coarse_record_ = grouping;
  return out;
}

std::vector<std::vector<Label>> coarse_partition(const HistoryFamily& fine, const CoarseGraining& grouping) {
  validate_grouping(fine, grouping);
  std::map<Label, std::vector<Label>> groups;
  for (const auto& h : fine.histories()) {
    Label coarse = h.label();
    for (const auto& [j, b] : grouping.groupings) {
      for (std::size_t beta = 0; beta < b.size(); ++beta) {
        if (b[beta][h.label()[j]] == 1) coarse[j] = beta;
      }
    }
    groups[coarse].push_back(h.label());
  }
  std::vector<std::vector<Label>> out;
  out.reserve(groups.size());
  for (auto& [coarse, members] : groups) out.push_back(std::move(members));
  return out;
}

HistoryFamily drop_identity_events(const HistoryFamily& family, const Tolerance& tol) {
  const auto& decomps = family.decompositions();
  const auto id = ComplexMatrix::identity(family.dim());
  std::vector<double> times;
  std::vector<DecompositionOfUnity> kept;
  for (std::size_t j = 0; j < decomps.size(); ++j) {
    const bool trivial = decomps[j].size() == 1 && approx_equal(decomps[j].projectors[0].matrix(), id, tol);
    if (!trivial) {
      times.push_back(family.support()[j]);
      kept.push_back(decomps[j]);
    }
  }
  if (kept.empty()) {
    times.push_back(family.support()[0]);
    kept.push_back(decomps[0]);
  }
  auto out = product_family(TemporalSupport(std::move(times)), std::move(kept), family.dynamics(),
                            family.initial_state(), tol);
  return out.with_final_state(family.final_state());
}

ChainOperator chain_operator(const HistoryFamily& family, const Label& label) {
  return family.chain_operators()[family.index_of(label)];
}

double completeness_check(const HistoryFamily& family) {
  auto sum = ComplexMatrix::zero(family.dim(), family.dim());
  for (const auto& c : family.chain_operators()) sum = sum + c.matrix;
  return max_abs_diff(sum, ComplexMatrix::identity(family.dim()));
}

}  // namespace chq
