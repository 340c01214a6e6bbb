#include "chq/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace chq {

using nlohmann::json;

namespace {

constexpr double kAxisNormTolerance = 1e-9;

// "x", "-z", or the components for a general axis.
std::string axis_name(const BlochAxis& a) {
  static const char* names[] = {"x", "y", "z"};
  for (std::size_t k = 0; k < 3; ++k) {
    if (a[(k + 1) % 3] == 0.0 && a[(k + 2) % 3] == 0.0 && std::abs(a[k]) == 1.0) {
      return std::string(a[k] < 0 ? "-" : "") + names[k];
    }
  }
  std::ostringstream os;
  os << std::setprecision(4) << "(" << a[0] << "," << a[1] << "," << a[2] << ")";
  return os.str();
}

[[noreturn]] void field_error(const std::string& path, const std::string& msg) {
  throw ParseError(path + ": " + msg, 0, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path.string());
  return ss.str();
}

json parse_document(std::string_view text) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + upto, '\n'));
    throw ParseError("line " + std::to_string(line) + ": " + e.what(), line, {});
  }
}

const json& member(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) field_error(path, "missing field '" + key + "'");
  return obj.at(key);
}

double read_number(const json& v, const std::string& path) {
  if (!v.is_number()) field_error(path, "expected a number");
  return v.get<double>();
}

std::string read_string(const json& v, const std::string& path) {
  if (!v.is_string()) field_error(path, "expected a string");
  return v.get<std::string>();
}

const json& read_array(const json& v, const std::string& path) {
  if (!v.is_array()) field_error(path, "expected an array");
  return v;
}

const json& read_object(const json& v, const std::string& path) {
  if (!v.is_object()) field_error(path, "expected an object");
  return v;
}

Complex read_complex(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) field_error(path, "expected a complex number [re, im]");
  return {read_number(v[0], path + "[0]"), read_number(v[1], path + "[1]")};
}

StateVector read_vector(const json& v, const std::string& path) {
  read_array(v, path);
  if (v.empty()) field_error(path, "empty vector");
  StateVector out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(read_complex(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

ComplexMatrix read_matrix(const json& v, const std::string& path) {
  read_array(v, path);
  if (v.empty()) field_error(path, "empty matrix");
  std::vector<std::vector<Complex>> rows;
  for (std::size_t r = 0; r < v.size(); ++r) {
    auto row = read_vector(v[r], path + "[" + std::to_string(r) + "]");
    if (!rows.empty() && row.size() != rows.front().size()) {
      field_error(path, "row " + std::to_string(r) + " has " + std::to_string(row.size()) + " entries, expected " +
                            std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  try {
    return ComplexMatrix::from_rows(rows);
  } catch (const Error& e) {
    field_error(path, e.what());
  }
}

BlochAxis read_axis(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 3) field_error(path, "expected an axis [x, y, z]");
  return {read_number(v[0], path + "[0]"), read_number(v[1], path + "[1]"), read_number(v[2], path + "[2]")};
}

StateSpec read_state(const json& v, const std::string& path) {
  read_object(v, path);
  StateSpec s;
  int forms = 0;
  if (v.contains("density")) {
    ++forms;
    s.kind = StateSpec::Kind::density;
    s.density = read_matrix(v.at("density"), path + ".density");
  }
  if (v.contains("vector")) {
    ++forms;
    s.kind = StateSpec::Kind::vector;
    s.vector = read_vector(v.at("vector"), path + ".vector");
  }
  if (v.contains("bloch")) {
    ++forms;
    s.kind = StateSpec::Kind::bloch;
    s.bloch = read_axis(v.at("bloch"), path + ".bloch");
  }
  if (forms != 1) field_error(path, "a state needs exactly one of 'density', 'vector', 'bloch'");
  return s;
}

DecompositionSpec read_decomposition(const json& v, const std::string& path) {
  read_object(v, path);
  DecompositionSpec d;
  const bool has_axis = v.contains("axis");
  const bool has_projectors = v.contains("projectors");
  if (has_axis == has_projectors) field_error(path, "a decomposition needs exactly one of 'axis', 'projectors'");
  if (has_axis) {
    d.axis = read_axis(v.at("axis"), path + ".axis");
    return d;
  }
  const auto& list = read_array(v.at("projectors"), path + ".projectors");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string p = path + ".projectors[" + std::to_string(i) + "]";
    read_object(list[i], p);
    std::string label = list[i].contains("label") ? read_string(list[i].at("label"), p + ".label") : std::string{};
    d.projectors.push_back({std::move(label), read_matrix(member(list[i], "matrix", p), p + ".matrix")});
  }
  return d;
}

BranchNode read_branch(const json& v, const std::string& path) {
  read_object(v, path);
  BranchNode node{read_decomposition(member(v, "decomposition", path), path + ".decomposition"), {}};
  if (v.contains("children")) {
    const auto& kids = read_array(v.at("children"), path + ".children");
    for (std::size_t i = 0; i < kids.size(); ++i) {
      node.children.push_back(read_branch(kids[i], path + ".children[" + std::to_string(i) + "]"));
    }
  }
  return node;
}

Scenario read_scenario(const json& doc) {
  read_object(doc, "$");
  Scenario s;
  if (doc.contains("name")) s.name = read_string(doc.at("name"), "name");
  if (doc.contains("description")) s.description = read_string(doc.at("description"), "description");
  const auto& dim = member(doc, "dimension", "$");
  if (!dim.is_number_integer() || dim.get<long long>() <= 0) field_error("dimension", "expected a positive integer");
  s.dimension = dim.get<std::size_t>();
  if (doc.contains("hamiltonian")) s.hamiltonian = read_matrix(doc.at("hamiltonian"), "hamiltonian");
  if (doc.contains("reference_time") && doc.contains("initial_time")) {
    field_error("reference_time", "give either 'reference_time' or 'initial_time', not both");
  }
  if (doc.contains("reference_time")) s.reference_time = read_number(doc.at("reference_time"), "reference_time");
  if (doc.contains("initial_time")) s.reference_time = read_number(doc.at("initial_time"), "initial_time");
  s.initial_state = read_state(member(doc, "initial_state", "$"), "initial_state");
  if (doc.contains("final_state")) s.final_state = read_state(doc.at("final_state"), "final_state");
  const auto& times = read_array(member(doc, "times", "$"), "times");
  for (std::size_t i = 0; i < times.size(); ++i) {
    s.times.push_back(read_number(times[i], "times[" + std::to_string(i) + "]"));
  }
  if (doc.contains("decompositions") == doc.contains("branch_tree")) {
    field_error("$", "a scenario needs exactly one of 'decompositions', 'branch_tree'");
  }
  if (doc.contains("decompositions")) {
    const auto& list = read_array(doc.at("decompositions"), "decompositions");
    for (std::size_t i = 0; i < list.size(); ++i) {
      s.decompositions.push_back(read_decomposition(list[i], "decompositions[" + std::to_string(i) + "]"));
    }
  } else {
    s.branch_tree = read_branch(doc.at("branch_tree"), "branch_tree");
  }
  return s;
}

void check_decomposition(const DecompositionSpec& spec, std::size_t dim, const std::string& path,
                         std::vector<std::string>& issues) {
  try {
    const auto d = to_decomposition(spec, dim, 0.0);
    const auto report = validate_decomposition(d);
    if (!report.ok()) issues.push_back(path + ": invalid decomposition: " + report.summary());
  } catch (const Error& e) {
    issues.push_back(path + ": " + e.what());
  }
}

void check_branch(const BranchNode& node, std::size_t depth, std::size_t n_times, std::size_t dim,
                  const std::string& path, std::vector<std::string>& issues) {
  check_decomposition(node.decomposition, dim, path + ".decomposition", issues);
  const std::size_t branches = node.decomposition.axis ? 2 : node.decomposition.projectors.size();
  if (depth + 1 == n_times) {
    if (!node.children.empty()) issues.push_back(path + ": children given below the last support time");
    return;
  }
  if (node.children.size() != branches) {
    issues.push_back(path + ": " + std::to_string(node.children.size()) + " children for " +
                     std::to_string(branches) + " projectors");
  }
  for (std::size_t i = 0; i < node.children.size(); ++i) {
    check_branch(node.children[i], depth + 1, n_times, dim, path + ".children[" + std::to_string(i) + "]", issues);
  }
}

void check_state(const StateSpec& spec, std::size_t dim, const std::string& path, std::vector<std::string>& issues) {
  try {
    to_density(spec, dim);
  } catch (const Error& e) {
    issues.push_back(path + ": " + e.what());
  }
}

void validate(const Scenario& s) {
  std::vector<std::string> issues;
  const std::size_t dim = s.dimension;
  if (s.hamiltonian) {
    try {
      scenario_dynamics(s);
    } catch (const Error& e) {
      issues.push_back(std::string("hamiltonian: ") + e.what());
    }
  }
  if (!std::isfinite(s.reference_time)) issues.push_back("reference_time: must be finite");
  check_state(s.initial_state, dim, "initial_state", issues);
  if (s.final_state) check_state(*s.final_state, dim, "final_state", issues);

  if (s.times.empty()) issues.push_back("times: at least one time is required");
  for (std::size_t i = 0; i < s.times.size(); ++i) {
    if (!std::isfinite(s.times[i])) issues.push_back("times[" + std::to_string(i) + "]: must be finite");
  }
  for (std::size_t i = 1; i < s.times.size(); ++i) {
    if (!(s.times[i - 1] < s.times[i])) {
      std::ostringstream os;
      os << "times: not strictly increasing at times[" << i - 1 << "] = " << s.times[i - 1] << ", times[" << i
         << "] = " << s.times[i];
      issues.push_back(os.str());
    }
  }

  if (s.branch_tree) {
    if (!s.times.empty()) check_branch(*s.branch_tree, 0, s.times.size(), dim, "branch_tree", issues);
  } else {
    if (s.decompositions.size() != s.times.size()) {
      issues.push_back("decompositions: " + std::to_string(s.decompositions.size()) + " given for " +
                       std::to_string(s.times.size()) + " times");
    }
    for (std::size_t i = 0; i < s.decompositions.size(); ++i) {
      check_decomposition(s.decompositions[i], dim, "decompositions[" + std::to_string(i) + "]", issues);
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

json state_to_json(const StateSpec& s) {
  switch (s.kind) {
    case StateSpec::Kind::density: return {{"density", matrix_to_json(*s.density)}};
    case StateSpec::Kind::vector: {
      json v = json::array();
      for (const auto& z : s.vector) v.push_back(complex_to_json(z));
      return {{"vector", v}};
    }
    case StateSpec::Kind::bloch: return {{"bloch", s.bloch}};
  }
  return {};
}

json decomposition_to_json(const DecompositionSpec& d) {
  if (d.axis) return {{"axis", *d.axis}};
  json list = json::array();
  for (const auto& p : d.projectors) list.push_back({{"label", p.label}, {"matrix", matrix_to_json(p.matrix)}});
  return {{"projectors", list}};
}

json branch_to_json(const BranchNode& node) {
  json out = {{"decomposition", decomposition_to_json(node.decomposition)}};
  if (!node.children.empty()) {
    json kids = json::array();
    for (const auto& c : node.children) kids.push_back(branch_to_json(c));
    out["children"] = kids;
  }
  return out;
}

FinitePsg read_table(const json& v, const std::string& path) {
  read_object(v, path);
  std::vector<std::string> elements;
  const auto& list = read_array(member(v, "elements", path), path + ".elements");
  for (std::size_t i = 0; i < list.size(); ++i) {
    elements.push_back(read_string(list[i], path + ".elements[" + std::to_string(i) + "]"));
  }
  std::vector<std::tuple<std::string, std::string, std::string>> triples;
  const auto& table = read_array(member(v, "table", path), path + ".table");
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::string p = path + ".table[" + std::to_string(i) + "]";
    if (!table[i].is_array() || table[i].size() != 3) field_error(p, "expected [left, right, result]");
    triples.emplace_back(read_string(table[i][0], p + "[0]"), read_string(table[i][1], p + "[1]"),
                         read_string(table[i][2], p + "[2]"));
  }
  try {
    return FinitePsg::from_triples(std::move(elements), triples);
  } catch (const DomainError& e) {
    throw ValidationError({path + ": " + e.what()});
  }
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> issues)
    : Error([&] {
        std::string msg = std::to_string(issues.size()) + " validation issue(s)";
        for (const auto& i : issues) msg += "\n  " + i;
        return msg;
      }()),
      issues_(std::move(issues)) {}

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

json matrix_to_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(complex_to_json(m(r, c)));
    rows.push_back(row);
  }
  return rows;
}

DensityOperator to_density(const StateSpec& spec, std::size_t dim, const Tolerance& tol) {
  switch (spec.kind) {
    case StateSpec::Kind::density:
      if (spec.density->rows() != dim || spec.density->cols() != dim) {
        throw ShapeError("density matrix is not " + std::to_string(dim) + "x" + std::to_string(dim));
      }
      return DensityOperator(*spec.density, {}, tol);
    case StateSpec::Kind::vector: {
      if (spec.vector.size() != dim) throw ShapeError("state vector length differs from the dimension");
      double norm2 = 0.0;
      for (const auto& z : spec.vector) norm2 += std::norm(z);
      if (!tol.accepts(std::abs(norm2 - 1.0), 1.0)) throw DomainError("state vector is not normalized");
      return DensityOperator::pure(spec.vector);
    }
    case StateSpec::Kind::bloch: {
      if (dim != 2) throw DomainError("a Bloch vector state requires dimension 2");
      if (axis_norm(spec.bloch) > 1.0 + tol.abs_eps) throw DomainError("Bloch vector longer than 1");
      const auto rho = 0.5 * (ComplexMatrix::identity(2) + sigma_dot(spec.bloch));
      return DensityOperator(rho, {}, tol);
    }
  }
  throw DomainError("unknown state form");
}

DecompositionOfUnity to_decomposition(const DecompositionSpec& spec, std::size_t dim, double time,
                                      const Tolerance& tol) {
  if (spec.axis) {
    if (dim != 2) throw DomainError("axis shorthand requires dimension 2");
    if (std::abs(axis_norm(*spec.axis) - 1.0) > kAxisNormTolerance) throw DomainError("axis is not a unit vector");
    auto d = spin_decomposition(normalized(*spec.axis), time, tol);
    const std::string name = axis_name(*spec.axis);
    for (auto& p : d.projectors) p = Projector(p.matrix(), name + p.label(), tol);
    return d;
  }
  DecompositionOfUnity d;
  d.time = time;
  for (std::size_t i = 0; i < spec.projectors.size(); ++i) {
    const auto& p = spec.projectors[i];
    if (p.matrix.rows() != dim || p.matrix.cols() != dim) {
      throw ShapeError("projector " + std::to_string(i) + " is not " + std::to_string(dim) + "x" +
                       std::to_string(dim));
    }
    if (!is_projector(p.matrix, tol)) {
      std::ostringstream os;
      os << "projector " << i << (p.label.empty() ? "" : " (" + p.label + ")")
         << " is not a projector (residual " << projector_residual(p.matrix) << ")";
      throw DomainError(os.str());
    }
    d.projectors.emplace_back(p.matrix, p.label.empty() ? std::to_string(i) : p.label, tol);
  }
  return d;
}

Dynamics scenario_dynamics(const Scenario& s, const Tolerance& tol) {
  if (!s.hamiltonian) return Dynamics::free(s.dimension, s.reference_time);
  if (s.hamiltonian->rows() != s.dimension || s.hamiltonian->cols() != s.dimension) {
    throw ShapeError("hamiltonian is not " + std::to_string(s.dimension) + "x" + std::to_string(s.dimension));
  }
  return Dynamics(*s.hamiltonian, s.reference_time, tol);
}

HistoryFamily build_family(const Scenario& s, const Tolerance& tol) {
  const auto dyn = scenario_dynamics(s, tol);
  const auto rho = to_density(s.initial_state, s.dimension, tol);
  const TemporalSupport support(s.times);
  std::optional<HistoryFamily> family;
  if (s.branch_tree) {
    const BranchNode& root = *s.branch_tree;
    auto resolver = [&](std::span<const std::size_t> prefix) {
      const BranchNode* node = &root;
      for (std::size_t k : prefix) {
        if (k >= node->children.size()) throw DomainError("branch tree has no node for this prefix");
        node = &node->children[k];
      }
      return to_decomposition(node->decomposition, s.dimension, s.times[prefix.size()], tol);
    };
    family = branch_dependent_family(support, resolver, dyn, rho, tol);
  } else {
    std::vector<DecompositionOfUnity> decomps;
    for (std::size_t i = 0; i < s.decompositions.size(); ++i) {
      decomps.push_back(to_decomposition(s.decompositions[i], s.dimension, s.times[i], tol));
    }
    family = product_family(support, std::move(decomps), dyn, rho, tol);
  }
  if (s.final_state) return family->with_final_state(to_density(*s.final_state, s.dimension, tol));
  return *family;
}

Scenario parse_scenario(std::string_view text) {
  auto s = read_scenario(parse_document(text));
  validate(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) { return parse_scenario(read_file(path)); }

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["name"] = s.name;
  doc["description"] = s.description;
  doc["dimension"] = s.dimension;
  if (s.hamiltonian) doc["hamiltonian"] = matrix_to_json(*s.hamiltonian);
  doc["reference_time"] = s.reference_time;
  doc["initial_state"] = state_to_json(s.initial_state);
  if (s.final_state) doc["final_state"] = state_to_json(*s.final_state);
  doc["times"] = s.times;
  if (s.branch_tree) {
    doc["branch_tree"] = branch_to_json(*s.branch_tree);
  } else {
    json list = json::array();
    for (const auto& d : s.decompositions) list.push_back(decomposition_to_json(d));
    doc["decompositions"] = list;
  }
  return doc;
}

void save_scenario(const Scenario& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << scenario_to_json(s).dump(2) << '\n';
  if (!out) throw IoError("cannot write " + path.string());
}

PsgDocument parse_psg(std::string_view text) {
  const json doc = parse_document(text);
  PsgDocument out{read_table(doc, "$"), std::nullopt};
  if (!doc.contains("quasitemporal")) return out;

  const auto& q = read_object(doc.at("quasitemporal"), "quasitemporal");
  QuasitemporalStructure qs{out.psg, read_table(member(q, "support", "quasitemporal"), "quasitemporal.support"), {}};
  const auto& sigma = read_object(member(q, "sigma", "quasitemporal"), "quasitemporal.sigma");
  std::vector<std::string> issues;
  for (std::size_t i = 0; i < qs.history_psg.size(); ++i) {
    const auto& name = qs.history_psg.elements[i];
    if (!sigma.contains(name)) {
      issues.push_back("quasitemporal.sigma: no image for '" + name + "'");
      continue;
    }
    const auto target = read_string(sigma.at(name), "quasitemporal.sigma." + name);
    const auto& support = qs.support_psg.elements;
    const auto it = std::find(support.begin(), support.end(), target);
    if (it == support.end()) {
      issues.push_back("quasitemporal.sigma." + name + ": unknown support element '" + target + "'");
      continue;
    }
    qs.sigma.push_back(static_cast<std::size_t>(it - support.begin()));
  }
  for (const auto& [name, _] : sigma.items()) {
    const auto& hist = qs.history_psg.elements;
    if (std::find(hist.begin(), hist.end(), name) == hist.end()) {
      issues.push_back("quasitemporal.sigma: unknown element '" + name + "'");
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  out.quasitemporal = std::move(qs);
  return out;
}

PsgDocument load_psg(const std::filesystem::path& path) { return parse_psg(read_file(path)); }

}  // namespace chq
