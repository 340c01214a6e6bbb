#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chq/errors.hpp"
#include "chq/histories.hpp"
#include "chq/kinematics.hpp"
#include "chq/matrix.hpp"
#include "chq/psg.hpp"
#include "json.hpp"

namespace chq {

/// Malformed input text, or a field of the wrong type. `line` is 0 when
/// the error is tied to a field rather than a text position.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::string field)
      : Error(what), line_(line), field_(std::move(field)) {}
  [[nodiscard]] std::size_t line() const { return line_; }
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

/// Well-formed input that violates one or more invariants. Every failed
/// check is listed, not only the first.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> issues);
  [[nodiscard]] const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// A state as written in the file, kept in that form for round-tripping.
struct StateSpec {
  enum class Kind { density, vector, bloch };
  Kind kind = Kind::density;
  std::optional<ComplexMatrix> density;
  StateVector vector;
  BlochAxis bloch{0.0, 0.0, 1.0};
};

struct ProjectorSpec {
  std::string label;
  ComplexMatrix matrix;
};

/// Either a qubit axis shorthand or explicit projectors.
struct DecompositionSpec {
  std::optional<BlochAxis> axis;
  std::vector<ProjectorSpec> projectors;
};

/// Decomposition at one depth of a branch-dependent family. `children` is
/// empty at the last support time and otherwise has one entry per projector.
struct BranchNode {
  DecompositionSpec decomposition;
  std::vector<BranchNode> children;
};

struct Scenario {
  std::string name;
  std::string description;
  std::size_t dimension = 0;
  std::optional<ComplexMatrix> hamiltonian;  // absent means H = 0
  double reference_time = 0.0;
  StateSpec initial_state;
  std::optional<StateSpec> final_state;
  std::vector<double> times;
  std::vector<DecompositionSpec> decompositions;  // one per time, unless branch_tree is set
  std::optional<BranchNode> branch_tree;
};

/// Parses and fully validates a scenario document. Throws ParseError for
/// syntax and type errors, ValidationError for invariant violations.
Scenario parse_scenario(std::string_view text);
/// Throws IoError when the file cannot be read.
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json scenario_to_json(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

DensityOperator to_density(const StateSpec& spec, std::size_t dim, const Tolerance& tol = {});
DecompositionOfUnity to_decomposition(const DecompositionSpec& spec, std::size_t dim, double time,
                                      const Tolerance& tol = {});
Dynamics scenario_dynamics(const Scenario& scenario, const Tolerance& tol = {});
/// Product family, or branch-dependent family when a branch tree is given.
/// The final state is attached when present.
HistoryFamily build_family(const Scenario& scenario, const Tolerance& tol = {});

/// Composition-table document: {"elements": [...], "table": [[l, r, result], ...]}
/// with an optional "quasitemporal" block {"support": <table>, "sigma": {element: support element}}.
struct PsgDocument {
  FinitePsg psg;
  std::optional<QuasitemporalStructure> quasitemporal;
};

PsgDocument parse_psg(std::string_view text);
PsgDocument load_psg(const std::filesystem::path& path);

// Complex and matrix literals: [re, im] pairs and row-major nested arrays.
nlohmann::json complex_to_json(Complex z);
nlohmann::json matrix_to_json(const ComplexMatrix& m);

}  // namespace chq
