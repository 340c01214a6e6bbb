#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "chq/commands.hpp"
#include "chq/decoherence.hpp"
#include "chq/hpo.hpp"
#include "chq/scenario.hpp"

namespace py = pybind11;
using namespace chq;

namespace {

Condition condition_of(const std::string& name) { return parse_condition(name); }

HistoryFamily family_of(const std::string& path, bool final_state) {
  auto f = build_family(load_scenario(path));
  if (final_state && !f.final_state()) throw DomainError("scenario has no final state");
  return f;
}

DecoherenceMatrix matrix_of(const HistoryFamily& f, bool final_state) {
  return final_state ? time_symmetric_decoherence_matrix(f) : decoherence_matrix(f);
}

py::tuple label_tuple(const Label& label) {
  py::tuple t(label.size());
  for (std::size_t i = 0; i < label.size(); ++i) t[i] = label[i];
  return t;
}

py::list labels_of(const DecoherenceMatrix& dm) {
  py::list out;
  for (const auto& l : dm.labels()) out.append(label_tuple(l));
  return out;
}

py::dict report_dict(const ConsistencyReport& r) {
  py::list violations;
  for (const auto& v : r.violations) {
    violations.append(py::make_tuple(label_tuple(v.alpha), label_tuple(v.beta), v.residual));
  }
  py::dict d;
  d["consistent"] = r.consistent();
  d["max_residual"] = r.max_residual;
  d["violations"] = violations;
  return d;
}

BlochAxis axis_of(const std::vector<double>& v) {
  if (v.size() != 3) throw ShapeError("an axis needs three components");
  return {v[0], v[1], v[2]};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Consistent-histories engine";

  // Translators registered later take precedence, so the base goes first.
  const auto& error = py::register_exception<Error>(m, "Error");
  py::register_exception<ValidationError>(m, "ValidationError", error);
  py::register_exception<ParseError>(m, "ParseError", error);
  py::register_exception<IoError>(m, "IoError", error);
  py::register_exception<InconsistentFamilyError>(m, "InconsistentFamilyError", error);
  py::register_exception<DomainError>(m, "DomainError", error);

  m.def(
      "run",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line with args; returns (exit code, stdout, stderr).");

  m.def(
      "decoherence_matrix",
      [](const std::string& path, bool final_state) {
        const auto dm = matrix_of(family_of(path, final_state), final_state);
        return py::make_tuple(labels_of(dm), DenseStorage(dm.entries().dense()));
      },
      py::arg("path"), py::arg("final_state") = false, "(labels, matrix) for a scenario file.");

  m.def(
      "consistency",
      [](const std::string& path, const std::string& condition, double epsilon, bool final_state) {
        return report_dict(
            check_consistency(matrix_of(family_of(path, final_state), final_state), condition_of(condition), epsilon));
      },
      py::arg("path"), py::arg("condition") = "weak", py::arg("epsilon") = kDefaultConsistencyEpsilon,
      py::arg("final_state") = false);

  m.def(
      "probabilities",
      [](const std::string& path, const std::string& condition, double epsilon, bool final_state) {
        const auto table =
            probabilities(matrix_of(family_of(path, final_state), final_state), condition_of(condition), epsilon);
        py::dict out;
        for (const auto& [label, p] : table.entries) out[label_tuple(label)] = p;
        return out;
      },
      py::arg("path"), py::arg("condition") = "weak", py::arg("epsilon") = kDefaultConsistencyEpsilon,
      py::arg("final_state") = false, "Label -> probability; raises InconsistentFamilyError when refused.");

  m.def(
      "collapse_probability",
      [](const std::string& path, const Label& label) { return collapse_oracle(family_of(path, false), label); },
      py::arg("path"), py::arg("label"));

  m.def(
      "spin_half",
      [](const std::vector<double>& n0, const std::vector<double>& n, const std::vector<double>& nprime,
         const std::string& condition, double epsilon) {
        const auto a = analyze_spin_half(axis_of(n0), axis_of(n), axis_of(nprime), condition_of(condition), epsilon);
        py::dict d;
        d["lhs"] = a.lhs;
        d["re_d"] = a.re_d;
        d["analytic_consistent"] = a.analytic_consistent;
        d["consistent"] = a.report.consistent();
        d["labels"] = labels_of(a.matrix);
        d["matrix"] = DenseStorage(a.matrix.entries().dense());
        return d;
      },
      py::arg("n0"), py::arg("n"), py::arg("nprime"), py::arg("condition") = "weak",
      py::arg("epsilon") = kDefaultConsistencyEpsilon);

  m.def(
      "hpo_negation",
      [](const std::vector<DenseStorage>& slots) {
        std::vector<ComplexMatrix> mats;
        for (const auto& s : slots) mats.emplace_back(s);
        const auto neg = hpo_negate(HpoProjector::homogeneous(std::move(mats)));
        py::list terms;
        for (const auto& t : neg.terms()) {
          py::list term;
          for (const auto& s : t.slots) term.append(DenseStorage(s.dense()));
          terms.append(term);
        }
        return py::make_tuple(DenseStorage(neg.matrix().dense()), terms);
      },
      py::arg("slots"), "(I - P1 x ... x Pn, homogeneous terms) for slot projectors P1..Pn.");
}
