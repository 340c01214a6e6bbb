#include "chq/decoherence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace chq {

namespace {

// Tr(A B^dagger) without forming the product.
Complex trace_with_adjoint(const DenseStorage& a, const DenseStorage& b) {
  return (a.array() * b.array().conjugate()).sum();
}

void require_complete(const HistoryFamily& family, const Tolerance& tol) {
  const double residual = completeness_check(family);
  if (!tol.accepts(residual, 1.0)) {
    std::ostringstream os;
    os << "family is not complete: |sum C - I| = " << residual;
    throw IncompleteFamilyError(os.str(), residual);
  }
}

std::vector<Label> family_labels(const HistoryFamily& family) {
  std::vector<Label> labels;
  labels.reserve(family.size());
  for (const auto& h : family.histories()) labels.push_back(h.label());
  return labels;
}

DenseStorage gram_entries(const HistoryFamily& family, const DenseStorage& left, const DenseStorage& right) {
  const auto& chains = family.chain_operators();
  const auto n = static_cast<Eigen::Index>(chains.size());
  std::vector<DenseStorage> weighted;
  weighted.reserve(chains.size());
  for (const auto& c : chains) weighted.emplace_back(left * c.matrix.dense() * right);
  DenseStorage d(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = 0; b < n; ++b) {
      d(a, b) = trace_with_adjoint(weighted[static_cast<std::size_t>(a)],
                                   chains[static_cast<std::size_t>(b)].matrix.dense());
    }
  }
  return d;
}

}  // namespace

std::string to_string(Condition c) { return c == Condition::weak ? "weak" : "medium"; }

std::string to_string(FunctionalKind k) { return k == FunctionalKind::standard ? "standard" : "time_symmetric"; }

Condition parse_condition(std::string_view text) {
  if (text == "weak") return Condition::weak;
  if (text == "medium") return Condition::medium;
  throw DomainError("unknown consistency condition '" + std::string(text) + "' (expected weak or medium)");
}

DecoherenceMatrix::DecoherenceMatrix(std::vector<Label> labels, ComplexMatrix entries, FunctionalKind kind)
    : labels_(std::move(labels)), entries_(std::move(entries)), kind_(kind) {
  if (!entries_.is_square() || entries_.rows() != labels_.size()) {
    throw ShapeError("decoherence matrix must be square with one row per label");
  }
  std::set<Label> seen(labels_.begin(), labels_.end());
  if (seen.size() != labels_.size()) throw DomainError("decoherence matrix labels must be unique");
}

std::size_t DecoherenceMatrix::index_of(const Label& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw LookupError("no history labelled " + format_label(label));
  return static_cast<std::size_t>(it - labels_.begin());
}

InconsistentFamilyError::InconsistentFamilyError(ConsistencyReport report)
    : Error([&] {
        std::ostringstream os;
        os << "family violates the " << to_string(report.condition) << " decoherence condition ("
           << report.violations.size() << " pair(s), largest residual " << report.max_residual
           << "); probabilities are not assigned";
        return os.str();
      }()),
      report_(std::move(report)) {}

double ProbabilityTable::probability(const Label& label) const {
  for (const auto& [l, p] : entries) {
    if (l == label) return p;
  }
  throw LookupError("no history labelled " + format_label(label));
}

DecoherenceMatrix decoherence_matrix(const HistoryFamily& family, const Tolerance& tol) {
  require_complete(family, tol);
  const auto id = DenseStorage::Identity(static_cast<Eigen::Index>(family.dim()),
                                         static_cast<Eigen::Index>(family.dim()));
  auto d = gram_entries(family, id, family.initial_state().matrix().dense());
  return {family_labels(family), ComplexMatrix(std::move(d)), FunctionalKind::standard};
}

DecoherenceMatrix time_symmetric_decoherence_matrix(const HistoryFamily& family, const Tolerance& tol) {
  if (!family.final_state()) throw DomainError("time-symmetric functional requires a final state");
  require_complete(family, tol);
  auto d = gram_entries(family, family.final_state()->matrix().dense(), family.initial_state().matrix().dense());
  const Complex sum = d.sum();
  if (std::abs(sum) <= tol.abs_eps) {
    std::ostringstream os;
    os << "normalization sum Tr(rho_f C rho_in C^dagger) vanishes (" << std::abs(sum)
       << "); final state is orthogonal to every history";
    throw DegeneratePosteriorError(os.str());
  }
  d /= sum;
  return {family_labels(family), ComplexMatrix(std::move(d)), FunctionalKind::time_symmetric};
}

ConsistencyReport check_consistency(const DecoherenceMatrix& dm, Condition condition, double epsilon) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw DomainError("epsilon must be finite and nonnegative");
  ConsistencyReport report;
  report.condition = condition;
  report.epsilon = epsilon;
  const std::size_t n = dm.size();
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const Complex d = dm(a, b);
      const double residual = condition == Condition::weak ? std::abs(d.real()) : std::abs(d);
      const double daa = std::max(0.0, dm(a, a).real());
      const double dbb = std::max(0.0, dm(b, b).real());
      const double threshold = epsilon * std::max(1.0, std::sqrt(daa * dbb));
      report.max_residual = std::max(report.max_residual, residual);
      if (residual > threshold) report.violations.push_back({dm.labels()[a], dm.labels()[b], residual, threshold});
    }
  }
  return report;
}

ProbabilityTable probabilities(const DecoherenceMatrix& dm, Condition condition, double epsilon) {
  auto report = check_consistency(dm, condition, epsilon);
  if (!report.consistent()) throw InconsistentFamilyError(std::move(report));
  ProbabilityTable table;
  for (std::size_t a = 0; a < dm.size(); ++a) {
    const double p = std::clamp(dm(a, a).real(), 0.0, 1.0);
    table.entries.emplace_back(dm.labels()[a], p);
    table.total += p;
    for (std::size_t b = a + 1; b < dm.size(); ++b) table.interference_bound += 2.0 * std::abs(dm(a, b).real());
  }
  return table;
}

InterferenceTerms interference_decomposition(const HistoryFamily& family, const Label& alpha, const Label& beta,
                                             const Tolerance& tol) {
  const auto ia = family.index_of(alpha);
  const auto ib = family.index_of(beta);
  const auto& ea = family.histories()[ia].events();
  const auto& eb = family.histories()[ib].events();
  std::size_t differing = 0;
  for (std::size_t j = 0; j < ea.size(); ++j) {
    const auto& p = ea[j].projector.matrix();
    const auto& q = eb[j].projector.matrix();
    if (approx_equal(p, q, tol)) continue;
    ++differing;
    if (!tol.accepts(max_abs(p * q))) {
      throw DomainError("histories " + format_label(alpha) + " and " + format_label(beta) +
                        " use non-orthogonal projectors at time index " + std::to_string(j));
    }
  }
  if (differing != 1) {
    throw DomainError("histories " + format_label(alpha) + " and " + format_label(beta) + " differ at " +
                      std::to_string(differing) + " times; exactly one is required");
  }
  const auto& rho = family.initial_state().matrix().dense();
  const auto& ca = family.chain_operators()[ia].matrix.dense();
  const auto& cb = family.chain_operators()[ib].matrix.dense();
  const DenseStorage cg = ca + cb;
  InterferenceTerms t{};
  t.p_alpha = trace_with_adjoint(ca * rho, ca).real();
  t.p_beta = trace_with_adjoint(cb * rho, cb).real();
  t.cross = 2.0 * trace_with_adjoint(ca * rho, cb).real();
  t.p_or = trace_with_adjoint(cg * rho, cg).real();
  return t;
}

double collapse_oracle(const HistoryFamily& family, const Label& label) {
  const auto& events = family.histories()[family.index_of(label)].events();
  const auto& dyn = family.dynamics();
  const auto ensemble = hermitian_eigensystem(family.initial_state().matrix());

  // Step propagators U(t_j, t_{j-1}) starting from the reference time.
  std::vector<DenseStorage> steps;
  double previous = dyn.reference_time();
  for (const auto& e : events) {
    steps.push_back(propagator(dyn, previous, e.time).dense());
    previous = e.time;
  }

  double total = 0.0;
  const auto& vectors = ensemble.vectors.dense();
  for (std::size_t i = 0; i < ensemble.values.size(); ++i) {
    const double weight = ensemble.values[i];
    if (weight <= 0.0) continue;
    Eigen::VectorXcd psi = vectors.col(static_cast<Eigen::Index>(i));
    double joint = 1.0;
    for (std::size_t j = 0; j < events.size(); ++j) {
      psi = steps[j] * psi;
      Eigen::VectorXcd projected = events[j].projector.matrix().dense() * psi;
      const double conditional = projected.squaredNorm();
      if (conditional <= std::numeric_limits<double>::min()) {
        joint = 0.0;
        break;
      }
      joint *= conditional;
      psi = projected / std::sqrt(conditional);
    }
    total += weight * joint;
  }
  return total;
}

namespace {

std::vector<std::vector<std::size_t>> partition_indices(const DecoherenceMatrix& dm,
                                                        const std::vector<std::vector<Label>>& partition) {
  std::vector<int> hits(dm.size(), 0);
  std::vector<std::vector<std::size_t>> groups;
  for (const auto& group : partition) {
    if (group.empty()) throw DomainError("partition contains an empty group");
    auto& idx = groups.emplace_back();
    for (const auto& label : group) {
      const auto it = std::find(dm.labels().begin(), dm.labels().end(), label);
      if (it == dm.labels().end()) throw DomainError("partition names unknown label " + format_label(label));
      const auto k = static_cast<std::size_t>(it - dm.labels().begin());
      ++hits[k];
      idx.push_back(k);
    }
  }
  for (std::size_t k = 0; k < hits.size(); ++k) {
    if (hits[k] != 1) {
      throw DomainError("label " + format_label(dm.labels()[k]) + " appears " + std::to_string(hits[k]) +
                        " times in the partition (must be exactly once)");
    }
  }
  return groups;
}

struct AxiomResiduals {
  double hermiticity;
  double min_diagonal;
  double diagonal_imag;
  double normalization;
};

AxiomResiduals axiom_residuals(const ComplexMatrix& m) {
  const auto& d = m.dense();
  AxiomResiduals r{};
  r.hermiticity = (d - d.adjoint()).cwiseAbs().maxCoeff();
  r.min_diagonal = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < d.rows(); ++a) {
    r.min_diagonal = std::min(r.min_diagonal, d(a, a).real());
    r.diagonal_imag = std::max(r.diagonal_imag, std::abs(d(a, a).imag()));
  }
  r.normalization = std::abs(d.sum() - Complex(1.0));
  return r;
}

}  // namespace

DecoherenceMatrix block_sum(const DecoherenceMatrix& dm, const std::vector<std::vector<Label>>& partition) {
  const auto groups = partition_indices(dm, partition);
  DenseStorage out = DenseStorage::Zero(static_cast<Eigen::Index>(groups.size()),
                                        static_cast<Eigen::Index>(groups.size()));
  std::vector<Label> labels;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    labels.push_back({g});
    for (std::size_t h = 0; h < groups.size(); ++h) {
      Complex s = 0.0;
      for (auto a : groups[g]) {
        for (auto b : groups[h]) s += dm(a, b);
      }
      out(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(h)) = s;
    }
  }
  return {std::move(labels), ComplexMatrix(std::move(out)), dm.kind()};
}

FunctionalAxiomReport validate_generalized_functional(const DecoherenceMatrix& dm,
                                                      const std::vector<std::vector<Label>>& partition,
                                                      const DecoherenceMatrix* coarse, const Tolerance& tol) {
  const auto summed = block_sum(dm, partition);
  FunctionalAxiomReport report;

  const auto fine = axiom_residuals(dm.entries());
  report.hermiticity = fine.hermiticity;
  report.min_diagonal = fine.min_diagonal;
  report.diagonal_imag = fine.diagonal_imag;
  report.normalization = fine.normalization;
  if (!tol.accepts(fine.hermiticity, 1.0)) report.violations.add("hermiticity", "d(a,b) vs d(b,a)*", fine.hermiticity);
  if (fine.min_diagonal < -tol.abs_eps) report.violations.add("positivity", "min d(a,a)", -fine.min_diagonal);
  if (!tol.accepts(fine.diagonal_imag, 1.0)) report.violations.add("positivity", "Im d(a,a)", fine.diagonal_imag);
  if (!tol.accepts(fine.normalization, 1.0)) report.violations.add("normalization", "sum d(a,b) - 1", fine.normalization);

  const auto cg = axiom_residuals(summed.entries());
  report.coarse_hermiticity = cg.hermiticity;
  report.coarse_min_diagonal = cg.min_diagonal;
  report.coarse_normalization = cg.normalization;
  if (cg.min_diagonal < -tol.abs_eps) report.violations.add("positivity", "coarse-grained min d(a,a)", -cg.min_diagonal);

  if (coarse != nullptr) {
    if (coarse->size() != summed.size()) {
      throw ShapeError("coarse decoherence matrix has " + std::to_string(coarse->size()) + " histories, partition has " +
                       std::to_string(summed.size()) + " groups");
    }
    const double residual = max_abs_diff(coarse->entries(), summed.entries());
    report.biadditivity = residual;
    if (!tol.accepts(residual, 1.0)) report.violations.add("biadditivity", "coarse entries vs block sums", residual);
  }
  return report;
}

double psd_floor(const DecoherenceMatrix& dm) {
  const auto& d = dm.entries().dense();
  const Eigen::MatrixXcd sym = 0.5 * (d + d.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sym, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericError("eigenvalue computation failed");
  return solver.eigenvalues().minCoeff();
}

}  // namespace chq
