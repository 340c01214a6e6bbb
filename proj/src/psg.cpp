#include "chq/psg.hpp"

#include <algorithm>
#include <sstream>

#include "chq/errors.hpp"

namespace chq {

namespace {

void require_increasing(const std::vector<double>& times, const char* what) {
  if (times.empty()) throw DomainError(std::string(what) + " must be nonempty");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i - 1] < times[i])) throw DomainError(std::string(what) + " times must be strictly increasing");
  }
}

void require_cap(const FinitePsg& p, std::size_t max_elements) {
  if (p.size() > max_elements) {
    throw DomainError("finite psg has " + std::to_string(p.size()) + " elements; the validator cap is " +
                      std::to_string(max_elements));
  }
}

}  // namespace

K1Element::K1Element(std::vector<double> times) : times_(std::move(times)) {
  require_increasing(times_, "K1 element");
}

std::string to_string(const K1Element& t) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < t.size(); ++i) os << (i ? "," : "") << t.times()[i];
  os << "}";
  return os.str();
}

std::optional<K1Element> k1_compose(const K1Element& s, const K1Element& t) {
  const double last = s.times().back();
  const double first = t.times().front();
  if (!(last <= first)) return std::nullopt;
  std::vector<double> out = s.times();
  auto from = t.times().begin();
  if (last == first) ++from;
  out.insert(out.end(), from, t.times().end());
  return K1Element(std::move(out));
}

std::vector<K1Element> k1_nuclear_decomposition(const K1Element& t) {
  std::vector<K1Element> out;
  out.reserve(t.size());
  for (double x : t.times()) out.emplace_back(std::vector<double>{x});
  return out;
}

K2Element::K2Element(std::vector<QuantumEvent> events) : events_(std::move(events)) {
  std::vector<double> times;
  for (const auto& e : events_) times.push_back(e.time);
  require_increasing(times, "K2 element");
}

bool same_history(const K2Element& a, const K2Element& b, const Tolerance& tol) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.events()[i].time != b.events()[i].time) return false;
    if (!approx_equal(a.events()[i].projector.matrix(), b.events()[i].projector.matrix(), tol)) return false;
  }
  return true;
}

std::optional<K2Element> k2_compose(const K2Element& a, const K2Element& b) {
  if (!(a.events().back().time < b.events().front().time)) return std::nullopt;
  std::vector<QuantumEvent> out = a.events();
  out.insert(out.end(), b.events().begin(), b.events().end());
  return K2Element(std::move(out));
}

K1Element sigma_support(const K2Element& a) {
  std::vector<double> times;
  times.reserve(a.size());
  for (const auto& e : a.events()) times.push_back(e.time);
  return K1Element(std::move(times));
}

std::optional<std::size_t> FinitePsg::compose(std::size_t s, std::size_t t) const {
  const auto it = table.find({s, t});
  if (it == table.end()) return std::nullopt;
  return it->second;
}

std::size_t FinitePsg::index_of(const std::string& name) const {
  const auto it = std::find(elements.begin(), elements.end(), name);
  if (it == elements.end()) throw LookupError("unknown psg element '" + name + "'");
  return static_cast<std::size_t>(it - elements.begin());
}

FinitePsg FinitePsg::from_triples(std::vector<std::string> elements,
                                  const std::vector<std::tuple<std::string, std::string, std::string>>& triples) {
  FinitePsg p;
  p.elements = std::move(elements);
  if (p.elements.empty()) throw DomainError("a partial semigroup must be nonempty");
  std::vector<std::string> sorted = p.elements;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("psg element names must be unique");
  }
  auto lookup = [&](const std::string& name) {
    const auto it = std::find(p.elements.begin(), p.elements.end(), name);
    if (it == p.elements.end()) throw DomainError("composition table names unknown element '" + name + "'");
    return static_cast<std::size_t>(it - p.elements.begin());
  };
  for (const auto& [l, r, u] : triples) {
    const auto key = std::make_pair(lookup(l), lookup(r));
    const auto value = lookup(u);
    const auto [it, inserted] = p.table.emplace(key, value);
    if (!inserted && it->second != value) {
      throw DomainError("conflicting composition entries for " + l + " o " + r);
    }
  }
  return p;
}

PsgReport validate_finite_psg(const FinitePsg& p, std::size_t max_elements) {
  require_cap(p, max_elements);
  PsgReport report;
  const std::size_t n = p.size();
  const auto& name = p.elements;

  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = 0; t < n; ++t) {
      const auto st = p.compose(s, t);
      for (std::size_t u = 0; u < n; ++u) {
        const auto tu = p.compose(t, u);
        if (!st || !tu) continue;
        const auto left = p.compose(*st, u);
        const auto right = p.compose(s, *tu);
        if (left && right && *left != *right) {
          report.associative = false;
          report.violations.add("associativity", "(" + name[s] + " o " + name[t] + ") o " + name[u] + " = " +
                                                     name[*left] + " but " + name[s] + " o (" + name[t] + " o " +
                                                     name[u] + ") = " + name[*right]);
        }
      }
    }
  }

  std::vector<std::size_t> units;
  std::vector<std::size_t> absorbing;
  for (std::size_t e = 0; e < n; ++e) {
    bool unit = true;
    bool absorb = true;
    for (std::size_t s = 0; s < n && (unit || absorb); ++s) {
      const auto es = p.compose(e, s);
      const auto se = p.compose(s, e);
      if (!es || !se || *es != s || *se != s) unit = false;
      if (!es || !se || *es != e || *se != e) absorb = false;
    }
    if (unit) units.push_back(e);
    if (absorb) absorbing.push_back(e);
  }
  if (units.size() > 1) report.violations.add("uniqueness", "more than one unit element");
  if (absorbing.size() > 1) report.violations.add("uniqueness", "more than one absorbing element");
  if (!units.empty()) report.unit = units.front();
  if (!absorbing.empty()) report.absorbing = absorbing.front();

  auto typical = [&](std::size_t x) { return x != report.unit && x != report.absorbing; };

  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = s + 1; t < n; ++t) {
      if (!typical(s) || !typical(t)) continue;
      if (p.compose(s, t) && p.compose(t, s)) {
        report.directed = false;
        report.violations.add("directedness", name[s] + " o " + name[t] + " and " + name[t] + " o " + name[s] +
                                                  " are both defined");
      }
    }
  }

  std::vector<bool> decomposable(n, false);
  for (const auto& [key, x] : p.table) {
    const auto [s, t] = key;
    if (typical(s) && typical(t) && s != x && t != x) decomposable[x] = true;
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (typical(x) && !decomposable[x]) report.nuclear.push_back(x);
  }
  return report;
}

ValidationReport check_homomorphism(const FinitePsg& p, std::span<const std::size_t> sigma, const FinitePsg& support) {
  ValidationReport report;
  if (sigma.size() != p.size()) {
    report.add("homomorphism", "sigma must map every element (got " + std::to_string(sigma.size()) + " of " +
                                   std::to_string(p.size()) + ")");
    return report;
  }
  for (auto s : sigma) {
    if (s >= support.size()) {
      report.add("homomorphism", "sigma maps outside the support psg");
      return report;
    }
  }
  for (const auto& [key, u] : p.table) {
    const auto [s, t] = key;
    const auto image = support.compose(sigma[s], sigma[t]);
    if (!image) {
      report.add("homomorphism", "sigma(" + p.elements[s] + ") o sigma(" + p.elements[t] + ") is undefined");
    } else if (*image != sigma[u]) {
      report.add("homomorphism", "sigma(" + p.elements[s] + " o " + p.elements[t] + ") != sigma(" + p.elements[s] +
                                     ") o sigma(" + p.elements[t] + ")");
    }
  }
  return report;
}

ValidationReport check_causality(const FinitePsg& p, std::span<const std::size_t> sigma, const FinitePsg& support,
                                 std::size_t max_elements) {
  require_cap(p, max_elements);
  const auto hom = check_homomorphism(p, sigma, support);
  if (!hom.ok()) throw DomainError("sigma is not a homomorphism: " + hom.summary());

  const auto nuclear = validate_finite_psg(p, max_elements).nuclear;
  const std::size_t m = nuclear.size();
  // reach[i][j]: a chain of length >= 1 leads from nuclear[i] to nuclear[j]
  // without using trivial self-steps.
  std::vector<std::vector<bool>> reach(m, std::vector<bool>(m, false));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (i != j && p.compose(nuclear[i], nuclear[j])) reach[i][j] = true;
    }
  }
  for (std::size_t k = 0; k < m; ++k) {
    for (std::size_t i = 0; i < m; ++i) {
      if (!reach[i][k]) continue;
      for (std::size_t j = 0; j < m; ++j) {
        if (reach[k][j]) reach[i][j] = true;
      }
    }
  }
  ValidationReport report;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (reach[i][j] && sigma[nuclear[i]] == sigma[nuclear[j]]) {
        report.add("causality", "chain from " + p.elements[nuclear[i]] + " to " + p.elements[nuclear[j]] +
                                    " returns to support " + support.elements[sigma[nuclear[i]]]);
      }
    }
  }
  return report;
}

ValidationReport validate_quasitemporal(const QuasitemporalStructure& q, std::size_t max_elements) {
  ValidationReport report = check_homomorphism(q.history_psg, q.sigma, q.support_psg);
  if (!report.ok()) return report;
  std::vector<bool> hit(q.support_psg.size(), false);
  for (auto s : q.sigma) hit[s] = true;
  for (std::size_t t = 0; t < hit.size(); ++t) {
    if (!hit[t]) report.add("surjectivity", "support element " + q.support_psg.elements[t] + " has no preimage");
  }
  const auto nu = validate_finite_psg(q.history_psg, max_elements).nuclear;
  const auto nt = validate_finite_psg(q.support_psg, max_elements).nuclear;
  std::vector<std::size_t> image;
  for (auto x : nu) image.push_back(q.sigma[x]);
  std::sort(image.begin(), image.end());
  image.erase(std::unique(image.begin(), image.end()), image.end());
  if (image != nt) {
    report.add("nuclear correspondence", "sigma[N(U)] != N(T) on the supplied tables");
  }
  return report;
}

FiniteK1 finite_k1(std::span<const double> times) {
  std::vector<double> sorted(times.begin(), times.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.empty() || std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw DomainError("finite_k1 needs distinct times");
  }
  if (sorted.size() > 16) throw DomainError("finite_k1 is limited to 16 times");
  FiniteK1 out;
  const std::size_t n = sorted.size();
  for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
    std::vector<double> subset;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (std::size_t{1} << i)) subset.push_back(sorted[i]);
    }
    out.elements.emplace_back(std::move(subset));
  }
  std::sort(out.elements.begin(), out.elements.end(), [](const K1Element& a, const K1Element& b) {
    return a.size() != b.size() ? a.size() < b.size() : a.times() < b.times();
  });
  for (const auto& e : out.elements) out.psg.elements.push_back(to_string(e));
  for (std::size_t s = 0; s < out.elements.size(); ++s) {
    for (std::size_t t = 0; t < out.elements.size(); ++t) {
      const auto st = k1_compose(out.elements[s], out.elements[t]);
      if (!st) continue;
      const auto it = std::find(out.elements.begin(), out.elements.end(), *st);
      out.psg.table.emplace(std::make_pair(s, t), static_cast<std::size_t>(it - out.elements.begin()));
    }
  }
  return out;
}

FiniteK2 finite_k2(std::span<const double> times, const std::vector<Projector>& alphabet) {
  if (alphabet.empty()) throw DomainError("finite_k2 needs at least one projector");
  auto k1 = finite_k1(times);
  FiniteK2 out;
  std::vector<std::size_t> sigma;
  for (std::size_t s = 0; s < k1.elements.size(); ++s) {
    const auto& support = k1.elements[s].times();
    std::size_t combos = 1;
    for (std::size_t i = 0; i < support.size(); ++i) combos *= alphabet.size();
    for (std::size_t c = 0; c < combos; ++c) {
      std::vector<QuantumEvent> events;
      std::size_t rest = c;
      std::string name = "{";
      for (std::size_t i = 0; i < support.size(); ++i) {
        const std::size_t pick = rest % alphabet.size();
        rest /= alphabet.size();
        const auto& proj = alphabet[pick];
        events.push_back({support[i], proj});
        std::ostringstream os;
        os << (i ? "," : "") << support[i] << ":" << (proj.label().empty() ? std::to_string(pick) : proj.label());
        name += os.str();
      }
      name += "}";
      out.elements.emplace_back(std::move(events));
      out.structure.history_psg.elements.push_back(std::move(name));
      sigma.push_back(s);
    }
  }
  for (std::size_t a = 0; a < out.elements.size(); ++a) {
    for (std::size_t b = 0; b < out.elements.size(); ++b) {
      const auto ab = k2_compose(out.elements[a], out.elements[b]);
      if (!ab) continue;
      for (std::size_t c = 0; c < out.elements.size(); ++c) {
        if (same_history(out.elements[c], *ab)) {
          out.structure.history_psg.table.emplace(std::make_pair(a, b), c);
          break;
        }
      }
    }
  }
  out.structure.support_psg = std::move(k1.psg);
  out.structure.sigma = std::move(sigma);
  return out;
}

}  // namespace chq
