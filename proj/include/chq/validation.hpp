#pragma once

#include <string>
#include <vector>

namespace chq {

struct Violation {
  std::string constraint;  // e.g. "orthogonality", "completeness"
  std::string subject;     // what was checked, human readable
  double residual = 0.0;   // max-entry norm of the violating residual
};

/// Diagnostic result of a validator. Empty iff everything checked held.
struct ValidationReport {
  std::vector<Violation> violations;

  [[nodiscard]] bool ok() const { return violations.empty(); }
  void add(std::string constraint, std::string subject, double residual = 0.0) {
    violations.push_back({std::move(constraint), std::move(subject), residual});
  }
  void merge(const ValidationReport& other) {
    violations.insert(violations.end(), other.violations.begin(), other.violations.end());
  }
  [[nodiscard]] std::string summary() const;
};

}  // namespace chq
