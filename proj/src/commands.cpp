#include "chq/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "chq/families.hpp"
#include "chq/hpo.hpp"
#include "chq/psg.hpp"

namespace chq {

using nlohmann::json;

namespace {

constexpr double kPrintFloor = 1e-14;

double rounded(double x, int digits) { return std::stod(format_real(x, digits)); }

json rounded_complex(Complex z) {
  return json::array({rounded(z.real(), kMatrixDigits), rounded(z.imag(), kMatrixDigits)});
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string structure_name(FamilyStructure s) {
  switch (s) {
    case FamilyStructure::product: return "product";
    case FamilyStructure::branch_dependent: return "branch-dependent";
    case FamilyStructure::general: return "general";
  }
  return "general";
}

std::string display_name(const HistoryFamily& f, const Label& label) {
  return f.histories()[f.index_of(label)].display_name();
}

struct Loaded {
  Scenario scenario;
  HistoryFamily family;
};

Loaded load(const std::filesystem::path& path) {
  auto s = load_scenario(path);
  auto f = build_family(s);
  return {std::move(s), std::move(f)};
}

DecoherenceMatrix functional(const HistoryFamily& f, const CommandOptions& opts) {
  return opts.final_state ? time_symmetric_decoherence_matrix(f) : decoherence_matrix(f);
}

std::string render_matrix(const DecoherenceMatrix& dm) {
  const std::size_t n = dm.size();
  std::vector<std::string> heads;
  std::size_t width = 0;
  for (const auto& l : dm.labels()) {
    heads.push_back(format_label(l));
    width = std::max(width, heads.back().size());
  }
  std::vector<std::vector<std::string>> cells(n, std::vector<std::string>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cells[i][j] = format_complex(dm(i, j), kMatrixDigits);
      width = std::max(width, cells[i][j].size());
    }
  }
  std::ostringstream os;
  auto emit_row = [&](const std::string& first, const std::vector<std::string>& rest) {
    std::string line = pad(first, width);
    for (const auto& c : rest) line += "  " + pad(c, width);
    line.erase(line.find_last_not_of(' ') + 1);
    os << line << '\n';
  };
  emit_row("", heads);
  for (std::size_t i = 0; i < n; ++i) emit_row(heads[i], cells[i]);
  return os.str();
}

std::string render_histories(const HistoryFamily& f) {
  std::ostringstream os;
  os << "histories:\n";
  for (const auto& h : f.histories()) os << "  " << pad(format_label(h.label()), 12) << h.display_name() << '\n';
  return os.str();
}

std::string render_report(const ConsistencyReport& r) {
  std::ostringstream os;
  os << "condition: " << to_string(r.condition) << ", epsilon: " << format_real(r.epsilon, kMatrixDigits) << '\n';
  os << "max off-diagonal residual: " << format_real(r.max_residual, kMatrixDigits) << '\n';
  if (r.consistent()) {
    os << "verdict: consistent\n";
  } else {
    os << "verdict: inconsistent (" << r.violations.size() << " violating pair(s))\n";
    for (const auto& v : r.violations) {
      os << "  " << format_label(v.alpha) << " vs " << format_label(v.beta)
         << ": residual " << format_real(v.residual, kMatrixDigits) << " > threshold "
         << format_real(v.threshold, kMatrixDigits) << '\n';
    }
  }
  return os.str();
}

json labels_json(const std::vector<Label>& labels) {
  json out = json::array();
  for (const auto& l : labels) out.push_back(l);
  return out;
}

json matrix_json(const DecoherenceMatrix& dm) {
  json rows = json::array();
  for (std::size_t i = 0; i < dm.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < dm.size(); ++j) row.push_back(rounded_complex(dm(i, j)));
    rows.push_back(row);
  }
  return {{"functional", to_string(dm.kind())}, {"labels", labels_json(dm.labels())}, {"entries", rows}};
}

json report_json(const ConsistencyReport& r) {
  json violations = json::array();
  for (const auto& v : r.violations) {
    violations.push_back({{"alpha", v.alpha},
                          {"beta", v.beta},
                          {"residual", rounded(v.residual, kMatrixDigits)},
                          {"threshold", rounded(v.threshold, kMatrixDigits)}});
  }
  return {{"condition", to_string(r.condition)},
          {"epsilon", r.epsilon},
          {"consistent", r.consistent()},
          {"max_residual", rounded(r.max_residual, kMatrixDigits)},
          {"violations", violations}};
}

json histories_json(const HistoryFamily& f) {
  json out = json::array();
  for (const auto& h : f.histories()) out.push_back({{"label", h.label()}, {"name", h.display_name()}});
  return out;
}

std::string header(const Scenario& s) {
  std::string out = "scenario: " + (s.name.empty() ? std::string("(unnamed)") : s.name) + '\n';
  return out;
}

CommandResult emit(const CommandOptions& opts, int code, const std::string& text, const json& doc) {
  CommandResult r;
  r.exit_code = code;
  r.out = opts.format == OutputFormat::structured ? doc.dump(2) + '\n' : text;
  return r;
}

CommandResult failure(const CommandOptions& opts, int code, const std::string& kind, const std::string& message,
                      json extra = json::object(), const std::string& text_detail = {}) {
  CommandResult r;
  r.exit_code = code;
  json doc = {{"status", "error"}, {"kind", kind}, {"message", message}};
  doc.update(extra);
  if (opts.format == OutputFormat::structured) {
    r.out = doc.dump(2) + '\n';
  } else {
    r.out = text_detail;
  }
  r.err = "error (" + kind + "): " + message + '\n';
  return r;
}

template <class F>
CommandResult guarded(const CommandOptions& opts, F&& body) {
  try {
    return body();
  } catch (const IoError& e) {
    return failure(opts, exit_status::io, "io", e.what());
  } catch (const ParseError& e) {
    json extra = {{"field", e.field()}};
    if (e.line() > 0) extra["line"] = e.line();
    return failure(opts, exit_status::io, "parse", e.what(), extra);
  } catch (const ValidationError& e) {
    return failure(opts, exit_status::invalid, "validation", e.what(), {{"issues", e.issues()}});
  } catch (const InconsistentFamilyError& e) {
    return failure(opts, exit_status::inconsistent, "inconsistent", e.what(), {{"report", report_json(e.report())}},
                   render_report(e.report()));
  } catch (const FamilyPreconditionError& e) {
    return failure(opts, exit_status::inconsistent, "inconsistent", e.what(), {{"report", report_json(e.report())}},
                   render_report(e.report()));
  } catch (const IncompleteFamilyError& e) {
    return failure(opts, exit_status::invalid, "incomplete", e.what(), {{"residual", e.residual()}});
  } catch (const Error& e) {
    return failure(opts, exit_status::invalid, "domain", e.what());
  }
}

std::string axis_text(const BlochAxis& a) {
  return "(" + format_real(a[0], kMatrixDigits) + ", " + format_real(a[1], kMatrixDigits) + ", " +
         format_real(a[2], kMatrixDigits) + ")";
}

BlochAxis cross(const BlochAxis& a, const BlochAxis& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot(const BlochAxis& a, const BlochAxis& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

void require_unit(const BlochAxis& a, const char* name) {
  if (std::abs(axis_norm(a) - 1.0) > 1e-9) throw DomainError(std::string(name) + " is not a unit axis");
}

}  // namespace

std::string format_real(double x, int digits) {
  if (std::abs(x) < kPrintFloor) x = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

std::string format_complex(Complex z, int digits) {
  const std::string re = format_real(z.real(), digits);
  std::string im = format_real(z.imag(), digits);
  if (im.front() == '-') return re + im + "i";
  return re + "+" + im + "i";
}

CommandResult cmd_validate(const std::filesystem::path& path, const CommandOptions& opts) {
  return guarded(opts, [&] {
    const auto [s, f] = load(path);
    const double residual = completeness_check(f);
    std::ostringstream os;
    os << header(s) << "dimension: " << s.dimension << "\ntimes:";
    for (double t : s.times) os << ' ' << format_real(t, kMatrixDigits);
    os << "\nstructure: " << structure_name(f.structure()) << "\nhistories: " << f.size()
       << "\nfinal state: " << (s.final_state ? "yes" : "no")
       << "\ncompleteness residual: " << format_real(residual, kMatrixDigits) << "\nstatus: valid\n";
    json doc = {{"command", "validate"},
                {"scenario", s.name},
                {"dimension", s.dimension},
                {"times", s.times},
                {"structure", structure_name(f.structure())},
                {"histories", histories_json(f)},
                {"final_state", s.final_state.has_value()},
                {"completeness_residual", rounded(residual, kMatrixDigits)},
                {"status", "valid"}};
    return emit(opts, exit_status::ok, os.str(), doc);
  });
}

CommandResult cmd_decoherence_matrix(const std::filesystem::path& path, const CommandOptions& opts) {
  return guarded(opts, [&] {
    const auto [s, f] = load(path);
    const auto dm = functional(f, opts);
    std::ostringstream os;
    os << header(s) << "functional: " << to_string(dm.kind()) << '\n'
       << render_histories(f) << "decoherence matrix:\n" << render_matrix(dm);
    json doc = {{"command", "decoherence-matrix"}, {"scenario", s.name}, {"histories", histories_json(f)},
                {"matrix", matrix_json(dm)}};
    return emit(opts, exit_status::ok, os.str(), doc);
  });
}

CommandResult cmd_consistency(const std::filesystem::path& path, const CommandOptions& opts) {
  return guarded(opts, [&] {
    const auto [s, f] = load(path);
    const auto dm = functional(f, opts);
    const auto report = check_consistency(dm, opts.condition, opts.epsilon);
    std::ostringstream os;
    os << header(s) << "functional: " << to_string(dm.kind()) << '\n'
       << render_histories(f) << "decoherence matrix:\n" << render_matrix(dm) << render_report(report);
    json doc = {{"command", "consistency"}, {"scenario", s.name}, {"histories", histories_json(f)},
                {"matrix", matrix_json(dm)}, {"report", report_json(report)}};
    return emit(opts, report.consistent() ? exit_status::ok : exit_status::inconsistent, os.str(), doc);
  });
}

CommandResult cmd_probabilities(const std::filesystem::path& path, const CommandOptions& opts) {
  return guarded(opts, [&] {
    const auto [s, f] = load(path);
    const auto dm = functional(f, opts);
    const auto table = probabilities(dm, opts.condition, opts.epsilon);
    std::ostringstream os;
    os << header(s) << "functional: " << to_string(dm.kind()) << ", condition: " << to_string(opts.condition)
       << '\n';
    json entries = json::array();
    for (const auto& [label, p] : table.entries) {
      const auto name = display_name(f, label);
      os << "  " << pad(format_label(label), 12) << pad(name, 16) << format_real(p, kProbabilityDigits) << '\n';
      entries.push_back({{"label", label}, {"name", name}, {"probability", rounded(p, kProbabilityDigits)}});
    }
    os << "sum: " << format_real(table.total, kProbabilityDigits) << '\n'
       << "interference bound: " << format_real(table.interference_bound, kProbabilityDigits) << '\n';
    json doc = {{"command", "probabilities"},
                {"scenario", s.name},
                {"functional", to_string(dm.kind())},
                {"condition", to_string(opts.condition)},
                {"entries", entries},
                {"sum", rounded(table.total, kProbabilityDigits)},
                {"interference_bound", rounded(table.interference_bound, kProbabilityDigits)}};
    return emit(opts, exit_status::ok, os.str(), doc);
  });
}

CommandResult cmd_compat(const std::filesystem::path& first, const std::filesystem::path& second,
                         const CommandOptions& opts) {
  return guarded(opts, [&] {
    const auto a = load(first);
    const auto b = load(second);
    const auto report = are_compatible(a.family, b.family, opts.condition, opts.epsilon);
    std::ostringstream os;
    os << "first: " << a.scenario.name << "\nsecond: " << b.scenario.name
       << "\nrelation: " << to_string(report.relation) << "\ncompatible: " << (report.compatible() ? "yes" : "no")
       << "\nnote: " << report.note << '\n';
    json doc = {{"command", "compat"},
                {"first", a.scenario.name},
                {"second", b.scenario.name},
                {"relation", to_string(report.relation)},
                {"compatible", report.compatible()},
                {"note", report.note}};
    if (report.obstruction) {
      const auto& o = *report.obstruction;
      os << "obstruction: " << o.describe() << '\n';
      json ob = {{"kind", o.kind == Obstruction::Kind::non_commuting ? "non_commuting" : "inconsistent_witness"},
                 {"description", o.describe()}};
      if (o.kind == Obstruction::Kind::non_commuting) {
        ob["time"] = o.time;
        ob["first"] = o.first;
        ob["second"] = o.second;
        ob["commutator"] = rounded(o.commutator, kMatrixDigits);
      } else if (o.consistency) {
        ob["report"] = report_json(*o.consistency);
      }
      doc["obstruction"] = ob;
    }
    if (report.witness) {
      os << "witness: " << report.witness->size() << " histories over " << report.witness->support().size()
         << " time(s)\n";
      doc["witness"] = histories_json(*report.witness);
    }
    return emit(opts, report.compatible() ? exit_status::ok : exit_status::inconsistent, os.str(), doc);
  });
}

CommandResult cmd_hpo(const std::filesystem::path& path, const CommandOptions& opts) {
  return guarded(opts, [&] {
    const auto [s, f] = load(path);
    const HilbertSpace space(s.dimension);
    const std::size_t n = f.support().size();
    std::vector<HistoryProposition> props{null_proposition(n, s.dimension), unit_proposition(n, s.dimension)};
    auto total = ComplexMatrix::zero(props[1].hpo.dim(), props[1].hpo.dim());
    std::ostringstream os;
    os << header(s) << "history space dimension: " << props[1].hpo.dim() << '\n' << "history propositions:\n";
    json hist = json::array();
    std::vector<HistoryProposition> negations;
    for (const auto& h : f.histories()) {
      HistoryProposition p{hpo_embed(h, space), format_label(h.label())};
      auto neg = prop_negate(p);
      const double rank = trace(p.hpo.matrix()).real();
      total = total + p.hpo.matrix();
      os << "  " << pad(p.label, 12) << pad(h.display_name(), 16) << "rank " << format_real(rank, kMatrixDigits)
         << ", negation terms " << neg.hpo.terms().size() << '\n';
      hist.push_back({{"label", h.label()},
                      {"name", h.display_name()},
                      {"rank", rounded(rank, kMatrixDigits)},
                      {"negation_terms", neg.hpo.terms().size()}});
      props.push_back(std::move(p));
      negations.push_back(std::move(neg));
    }
    props.insert(props.end(), negations.begin(), negations.end());
    const double sum_residual = max_abs_diff(total, ComplexMatrix::identity(total.rows()));
    const auto suite = orthoalgebra_axiom_suite(props);
    os << "sum of history propositions vs 1: residual " << format_real(sum_residual, kMatrixDigits) << '\n'
       << "orthoalgebra checks on " << props.size() << " propositions: " << (suite.ok() ? "pass" : "FAIL") << '\n';
    json violations = json::array();
    for (const auto& v : suite.violations.violations) {
      os << "  violated: " << v.constraint << " for " << v.subject << '\n';
      violations.push_back({{"constraint", v.constraint}, {"subject", v.subject}});
    }
    for (const auto& note : suite.notes) os << "  note: " << note << '\n';
    json doc = {{"command", "hpo"},
                {"scenario", s.name},
                {"history_space_dimension", props[1].hpo.dim()},
                {"propositions", hist},
                {"sum_residual", rounded(sum_residual, kMatrixDigits)},
                {"axioms_ok", suite.ok()},
                {"violations", violations},
                {"notes", suite.notes}};
    return emit(opts, suite.ok() ? exit_status::ok : exit_status::invalid, os.str(), doc);
  });
}

CommandResult cmd_psg_validate(const std::filesystem::path& path, const CommandOptions& opts) {
  return guarded(opts, [&] {
    const auto doc_in = load_psg(path);
    const auto& p = doc_in.psg;
    const auto report = validate_finite_psg(p);
    ValidationReport all = report.violations;
    std::ostringstream os;
    auto name = [&](std::optional<std::size_t> i) { return i ? p.elements[*i] : std::string("none"); };
    std::vector<std::string> nuclear;
    for (auto i : report.nuclear) nuclear.push_back(p.elements[i]);
    os << "elements: " << p.size() << ", defined compositions: " << p.table.size()
       << "\nassociative: " << (report.associative ? "yes" : "no")
       << "\ndirected: " << (report.directed ? "yes" : "no") << "\nunit: " << name(report.unit)
       << "\nabsorbing: " << name(report.absorbing) << "\nnuclear:";
    for (const auto& e : nuclear) os << ' ' << e;
    os << '\n';
    json out = {{"command", "psg-validate"},
                {"elements", p.size()},
                {"associative", report.associative},
                {"directed", report.directed},
                {"unit", report.unit ? json(p.elements[*report.unit]) : json(nullptr)},
                {"absorbing", report.absorbing ? json(p.elements[*report.absorbing]) : json(nullptr)},
                {"nuclear", nuclear}};
    if (doc_in.quasitemporal) {
      const auto& q = *doc_in.quasitemporal;
      const auto qr = validate_quasitemporal(q);
      all.merge(qr);
      bool causal = false;
      if (qr.ok()) {
        const auto cr = check_causality(q.history_psg, q.sigma, q.support_psg);
        all.merge(cr);
        causal = cr.ok();
      }
      os << "quasitemporal: " << (qr.ok() ? "yes" : "no") << "\ncausal: " << (causal ? "yes" : "no") << '\n';
      out["quasitemporal"] = qr.ok();
      out["causal"] = causal;
    }
    json violations = json::array();
    for (const auto& v : all.violations) {
      os << "  violated: " << v.constraint << " for " << v.subject << '\n';
      violations.push_back({{"constraint", v.constraint}, {"subject", v.subject}});
    }
    os << "status: " << (all.ok() ? "valid" : "invalid") << '\n';
    out["violations"] = violations;
    out["status"] = all.ok() ? "valid" : "invalid";
    return emit(opts, all.ok() ? exit_status::ok : exit_status::invalid, os.str(), out);
  });
}

Scenario spin_half_scenario(const BlochAxis& n0, const BlochAxis& n, const BlochAxis& nprime) {
  require_unit(n0, "n0");
  require_unit(n, "n");
  require_unit(nprime, "nprime");
  Scenario s;
  s.name = "spin-half";
  s.description = "spin 1/2 prepared along n0, n' measured at t = 1, n at t = 2, H = 0";
  s.dimension = 2;
  s.reference_time = 0.0;
  s.initial_state.kind = StateSpec::Kind::bloch;
  s.initial_state.bloch = n0;
  s.times = {1.0, 2.0};
  s.decompositions = {DecompositionSpec{nprime, {}}, DecompositionSpec{n, {}}};
  return s;
}

double spin_half_lhs(const BlochAxis& n0, const BlochAxis& n, const BlochAxis& nprime) {
  return dot(cross(n, nprime), cross(n0, nprime));
}

SpinHalfAnalysis analyze_spin_half(const BlochAxis& n0, const BlochAxis& n, const BlochAxis& nprime,
                                   Condition condition, double epsilon) {
  const auto family = build_family(spin_half_scenario(n0, n, nprime));
  auto dm = decoherence_matrix(family);
  auto report = check_consistency(dm, condition, epsilon);
  const double lhs = spin_half_lhs(n0, n, nprime);
  const double re_d = dm.at({0, 0}, {1, 0}).real();
  return {lhs, re_d, std::abs(lhs) / 4.0 <= epsilon, std::move(report), std::move(dm)};
}

CommandResult cmd_example_spin_half(const BlochAxis& n0, const BlochAxis& n, const BlochAxis& nprime,
                                    const CommandOptions& opts) {
  return guarded(opts, [&] {
    const auto a = analyze_spin_half(n0, n, nprime, opts.condition, opts.epsilon);
    const auto family = build_family(spin_half_scenario(n0, n, nprime));
    const bool engine = a.report.consistent();
    const bool comparable = opts.condition == Condition::weak;
    const bool agree = !comparable || engine == a.analytic_consistent;

    std::ostringstream os;
    os << "spin-half: n0 = " << axis_text(n0) << ", n = " << axis_text(n) << ", n' = " << axis_text(nprime) << '\n'
       << render_histories(family) << "decoherence matrix:\n" << render_matrix(a.matrix) << render_report(a.report)
       << "analytic (n x n').(n0 x n'): " << format_real(a.lhs, kMatrixDigits) << '\n'
       << "Re d((0,0),(1,0)): " << format_real(a.re_d, kMatrixDigits)
       << " (x4 = " << format_real(4.0 * a.re_d, kMatrixDigits) << ")\n";
    json doc = {{"command", "example spin-half"},
                {"n0", n0},
                {"n", n},
                {"nprime", nprime},
                {"histories", histories_json(family)},
                {"matrix", matrix_json(a.matrix)},
                {"report", report_json(a.report)},
                {"analytic_lhs", rounded(a.lhs, kMatrixDigits)},
                {"re_d_alpha_beta", rounded(a.re_d, kMatrixDigits)}};
    if (comparable) {
      os << "analytic verdict: " << (a.analytic_consistent ? "consistent" : "inconsistent")
         << "\nengine verdict: " << (engine ? "consistent" : "inconsistent")
         << "\nverdicts agree: " << (agree ? "yes" : "NO") << '\n';
      doc["analytic_consistent"] = a.analytic_consistent;
      doc["verdicts_agree"] = agree;
    } else {
      os << "analytic comparison applies to the weak condition only\n";
    }
    doc["engine_consistent"] = engine;
    if (engine) {
      const auto table = probabilities(a.matrix, opts.condition, opts.epsilon);
      os << "probabilities:\n";
      json entries = json::array();
      for (const auto& [label, p] : table.entries) {
        const auto name = display_name(family, label);
        os << "  " << pad(format_label(label), 12) << pad(name, 16) << format_real(p, kProbabilityDigits) << '\n';
        entries.push_back({{"label", label}, {"name", name}, {"probability", rounded(p, kProbabilityDigits)}});
      }
      doc["probabilities"] = entries;
    }
    int code = engine ? exit_status::ok : exit_status::inconsistent;
    if (!agree) code = exit_status::invalid;
    return emit(opts, code, os.str(), doc);
  });
}

}  // namespace chq
