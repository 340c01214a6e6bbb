// Acceptance suite: one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "chq/commands.hpp"
#include "chq/decoherence.hpp"
#include "chq/families.hpp"
#include "chq/hpo.hpp"
#include "chq/psg.hpp"
#include "chq/scenario.hpp"
#include "random_family.hpp"

using namespace chq;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few failure messages of a criterion.
class Tally {
 public:
  void require(bool ok, const std::string& what) {
    ++checks_;
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) messages_ += (messages_.empty() ? "" : "; ") + what;
  }
  [[nodiscard]] Outcome outcome(const std::string& summary) const {
    std::ostringstream os;
    os << summary << ", " << checks_ << " checks";
    if (failures_) os << ", " << failures_ << " failed: " << messages_;
    return {failures_ == 0, os.str()};
  }

 private:
  std::size_t checks_ = 0;
  std::size_t failures_ = 0;
  std::string messages_;
};

std::string num(double x) {
  std::ostringstream os;
  os.precision(3);
  os << x;
  return os.str();
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

HistoryFamily spin_half_family(const BlochAxis& n0, const BlochAxis& n, const BlochAxis& nprime) {
  return build_family(spin_half_scenario(n0, n, nprime));
}

BlochAxis cross(const BlochAxis& a, const BlochAxis& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot(const BlochAxis& a, const BlochAxis& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

BlochAxis unit(const BlochAxis& a) {
  const double n = std::sqrt(dot(a, a));
  return {a[0] / n, a[1] / n, a[2] / n};
}

// Corpus shared by criteria 4, 5 and 7.
const std::vector<HistoryFamily>& random_corpus() {
  static const std::vector<HistoryFamily> corpus = [] {
    testing::RandomSource r(20240601);
    std::vector<HistoryFamily> out;
    for (int k = 0; k < 500; ++k) out.push_back(testing::random_family(r, {4, 4, 256}));
    return out;
  }();
  return corpus;
}

// 1. Case (i): n' = n = n0 = z.
Outcome criterion_1() {
  const auto start = Clock::now();
  Tally t;
  const auto f = spin_half_family({0, 0, 1}, {0, 0, 1}, {0, 0, 1});
  const auto dm = decoherence_matrix(f);
  t.require(check_consistency(dm, Condition::weak).consistent(), "not weak-consistent");
  const auto p = probabilities(dm);
  const double pa = p.probability({0, 0});
  const double pb = p.probability({1, 0});
  t.require(std::abs(pa - 1.0) <= 1e-12, "Prob(alpha) = " + num(pa));
  t.require(std::abs(pb) <= 1e-12, "Prob(beta) = " + num(pb));
  const double elapsed = seconds_since(start);
  t.require(elapsed < 1.0, "runtime " + num(elapsed) + " s");
  return t.outcome("Prob(alpha) = " + num(pa) + ", Prob(beta) = " + num(pb));
}

// 2. Engine verdict vs |(n x n').(n0 x n')| <= 1e-9 on random triples.
Outcome criterion_2() {
  const auto start = Clock::now();
  constexpr double threshold = 1e-9;
  // |Re d(alpha, beta)| = |lhs| / 4 is the largest off-diagonal entry.
  constexpr double engine_epsilon = threshold / 4;
  testing::RandomSource r(2028);
  Tally t;
  std::size_t tested = 0;
  std::size_t excluded = 0;
  std::size_t consistent = 0;
  while (tested < 1200) {
    const auto n0 = testing::random_axis(r);
    const auto n = testing::random_axis(r);
    BlochAxis np = testing::random_axis(r);
    switch (tested % 8) {
      case 0: np = n0; break;
      case 1: np = {-n[0], -n[1], -n[2]}; break;
      case 2: {
        // Root of the left-hand side on a random great circle, by bisection.
        const auto u = testing::random_axis(r);
        const auto v = unit(cross(u, testing::random_axis(r)));
        auto at = [&](double th) {
          return BlochAxis{std::cos(th) * u[0] + std::sin(th) * v[0], std::cos(th) * u[1] + std::sin(th) * v[1],
                           std::cos(th) * u[2] + std::sin(th) * v[2]};
        };
        auto f = [&](double th) { return dot(cross(n, at(th)), cross(n0, at(th))); };
        double lo = 0.0;
        double hi = -1.0;
        for (int k = 1; k <= 64; ++k) {
          const double th = M_PI * k / 64;
          if ((f(lo) < 0) != (f(th) < 0)) {
            hi = th;
            break;
          }
          lo = th;
        }
        if (hi < 0) break;
        for (int k = 0; k < 200 && hi - lo > 1e-16; ++k) {
          const double mid = 0.5 * (lo + hi);
          ((f(lo) < 0) == (f(mid) < 0) ? lo : hi) = mid;
        }
        np = unit(at(0.5 * (lo + hi)));
        break;
      }
      default: break;
    }
    const double lhs = dot(cross(n, np), cross(n0, np));
    if (std::abs(lhs) > threshold / 10 && std::abs(lhs) < threshold * 10) {
      ++excluded;
      continue;
    }
    const bool analytic = std::abs(lhs) <= threshold;
    const auto a = analyze_spin_half(n0, n, np, Condition::weak, engine_epsilon);
    t.require(a.report.consistent() == analytic, "verdict mismatch at lhs = " + num(lhs));
    consistent += analytic ? 1 : 0;
    ++tested;
  }
  const double elapsed = seconds_since(start);
  t.require(tested >= 1000, "only " + std::to_string(tested) + " triples");
  t.require(elapsed < 10.0, "runtime " + num(elapsed) + " s");
  return t.outcome(std::to_string(tested) + " triples (" + std::to_string(consistent) + " consistent, " +
                   std::to_string(excluded) + " in the guard band)");
}

// 3. Case (ii) families (a) and (b).
Outcome criterion_3() {
  Tally t;
  const BlochAxis x{1, 0, 0};
  const BlochAxis z{0, 0, 1};
  const auto a = spin_half_family(x, z, x);
  const auto b = spin_half_family(x, z, z);
  t.require(check_consistency(decoherence_matrix(a)).consistent(), "family (a) inconsistent");
  t.require(check_consistency(decoherence_matrix(b)).consistent(), "family (b) inconsistent");
  const auto ab = are_compatible(a, b);
  const auto ba = are_compatible(b, a);
  t.require(!ab.compatible() && ab.relation == Relation::complementary, "relation " + to_string(ab.relation));
  t.require(!ba.compatible() && ba.relation == Relation::complementary, "swapped relation " + to_string(ba.relation));
  t.require(ab.obstruction.has_value() && ab.obstruction->kind == Obstruction::Kind::non_commuting,
            "no non-commuting obstruction");
  return t.outcome("relation " + to_string(ab.relation) +
                   (ab.obstruction ? " (" + ab.obstruction->describe() + ")" : ""));
}

// 4. collapse_oracle(alpha) = d(alpha, alpha).
Outcome criterion_4() {
  Tally t;
  double worst = 0.0;
  std::size_t histories = 0;
  for (const auto& f : random_corpus()) {
    const auto dm = decoherence_matrix(f);
    for (const auto& h : f.histories()) {
      const double diff = std::abs(collapse_oracle(f, h.label()) - dm.at(h.label(), h.label()).real());
      worst = std::max(worst, diff);
      t.require(diff <= 1e-10, "history " + format_label(h.label()) + " differs by " + num(diff));
      ++histories;
    }
  }
  return t.outcome(std::to_string(random_corpus().size()) + " scenarios, " + std::to_string(histories) +
                   " histories, max difference " + num(worst));
}

// 5. Functional axioms and biadditivity.
Outcome criterion_5() {
  testing::RandomSource r(5);
  Tally t;
  double herm = 0.0;
  double min_diag = 0.0;
  double norm = 0.0;
  double floor = 0.0;
  double biadd = 0.0;
  for (const auto& f : random_corpus()) {
    const auto dm = decoherence_matrix(f);
    const std::size_t n = dm.size();
    Complex sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      min_diag = std::min(min_diag, dm(i, i).real());
      for (std::size_t j = 0; j < n; ++j) {
        herm = std::max(herm, std::abs(dm(i, j) - std::conj(dm(j, i))));
        sum += dm(i, j);
      }
    }
    norm = std::max(norm, std::abs(sum - 1.0));
    floor = std::min(floor, psd_floor(dm));

    const auto grouping = testing::random_grouping(r, f);
    const auto coarse = decoherence_matrix(coarse_grain(f, grouping));
    const auto blocks = block_sum(dm, coarse_partition(f, grouping));
    biadd = std::max(biadd, max_abs_diff(blocks.entries(), coarse.entries()));
  }
  t.require(herm <= 1e-10, "hermiticity residual " + num(herm));
  t.require(min_diag >= -1e-10, "diagonal " + num(min_diag));
  t.require(norm <= 1e-9, "normalization residual " + num(norm));
  t.require(floor >= -1e-9, "eigenvalue floor " + num(floor));
  t.require(biadd <= 1e-10, "biadditivity residual " + num(biadd));
  return t.outcome("hermiticity " + num(herm) + ", min diagonal " + num(min_diag) + ", normalization " + num(norm) +
                   ", eigenvalue floor " + num(floor) + ", biadditivity " + num(biadd));
}

// 6. p(alpha or beta) = p(alpha) + p(beta) + 2 Re d(alpha, beta).
Outcome criterion_6() {
  testing::RandomSource r(6);
  Tally t;
  std::size_t consistent_pairs = 0;
  std::size_t inconsistent_pairs = 0;
  double worst_sum = 0.0;
  double worst_residual = 0.0;

  auto visit = [&](const HistoryFamily& f) {
    const auto dm = decoherence_matrix(f);
    const auto& rho = f.initial_state().matrix();
    const auto& hs = f.histories();
    for (std::size_t i = 0; i < hs.size(); ++i) {
      for (std::size_t j = i + 1; j < hs.size(); ++j) {
        const auto& a = hs[i].label();
        const auto& b = hs[j].label();
        std::size_t differing = 0;
        for (std::size_t k = 0; k < a.size(); ++k) differing += a[k] != b[k] ? 1 : 0;
        if (differing != 1) continue;
        const Label pair[] = {a, b};
        const auto c = chain_of_proposition(f, pair);
        const double p_or = trace(c * rho * adjoint(c)).real();
        const double pa = dm(i, i).real();
        const double pb = dm(j, j).real();
        const double cross = 2 * dm(i, j).real();
        if (std::abs(dm(i, j).real()) <= 1e-12) {
          ++consistent_pairs;
          worst_sum = std::max(worst_sum, std::abs(p_or - pa - pb));
          t.require(std::abs(p_or - pa - pb) <= 1e-9, "consistent pair not additive");
        } else if (std::abs(dm(i, j).real()) > kDefaultConsistencyEpsilon) {
          ++inconsistent_pairs;
          const double residual = p_or - pa - pb;
          worst_residual = std::max(worst_residual, std::abs(residual - cross));
          t.require(std::abs(residual - cross) <= 1e-10, "residual differs from 2 Re d");
        }
      }
    }
  };
  for (int k = 0; k < 200; ++k) visit(testing::random_commuting_family(r, {4, 4, 256}));
  for (int k = 0; k < 200; ++k) visit(testing::random_family(r, {4, 4, 256}));
  const double s = 1 / std::sqrt(2.0);
  visit(spin_half_family({1, 0, 0}, {0, 0, 1}, {s, 0, s}));
  t.require(consistent_pairs > 0 && inconsistent_pairs > 0, "empty pair sample");
  return t.outcome(std::to_string(consistent_pairs) + " consistent pairs (max deviation " + num(worst_sum) + "), " +
                   std::to_string(inconsistent_pairs) + " inconsistent pairs (max |residual - 2 Re d| " +
                   num(worst_residual) + ")");
}

// 7. Time-symmetric functional with rho_f = I/d.
Outcome criterion_7() {
  Tally t;
  double worst = 0.0;
  std::size_t compared = 0;
  for (const auto& f : random_corpus()) {
    const auto standard = decoherence_matrix(f);
    const auto ts = time_symmetric_decoherence_matrix(f.with_final_state(DensityOperator::maximally_mixed(f.dim())));
    const auto a = check_consistency(standard);
    const auto b = check_consistency(ts);
    t.require(a.consistent() == b.consistent(), "verdicts differ");
    for (std::size_t i = 0; i < standard.size(); ++i) {
      worst = std::max(worst, std::abs(standard(i, i).real() - ts(i, i).real()));
    }
    if (a.consistent()) {
      const auto pa = probabilities(standard);
      const auto pb = probabilities(ts);
      for (std::size_t i = 0; i < pa.entries.size(); ++i) {
        worst = std::max(worst, std::abs(pa.entries[i].second - pb.entries[i].second));
      }
      ++compared;
    }
  }
  t.require(worst <= 1e-10, "max difference " + num(worst));
  return t.outcome(std::to_string(random_corpus().size()) + " scenarios (" + std::to_string(compared) +
                   " consistent), max probability difference " + num(worst));
}

// 8. Negation expansion of homogeneous projectors.
Outcome criterion_8() {
  testing::RandomSource r(8);
  Tally t;
  double worst_product = 0.0;
  double worst_sum = 0.0;
  std::size_t trials = 0;
  for (std::size_t n : {2u, 3u}) {
    for (int k = 0; k < 100; ++k) {
      const std::size_t d = r.index(2, 4);
      std::vector<ComplexMatrix> slots;
      for (std::size_t j = 0; j < n; ++j) slots.push_back(testing::random_projector(r, d, 1, d - 1));
      const auto p = HpoProjector::homogeneous(slots);
      const auto neg = hpo_negate(p);
      const auto& terms = neg.terms();
      t.require(terms.size() == (std::size_t{1} << n) - 1, "wrong term count");
      std::vector<ComplexMatrix> mats;
      auto sum = ComplexMatrix::zero(p.dim(), p.dim());
      for (const auto& term : terms) {
        auto m = term.slots[0];
        for (std::size_t j = 1; j < term.slots.size(); ++j) m = kron(m, term.slots[j]);
        sum = sum + m;
        mats.push_back(m);
      }
      for (std::size_t i = 0; i < mats.size(); ++i) {
        for (std::size_t j = i + 1; j < mats.size(); ++j) {
          worst_product = std::max(worst_product, max_abs(mats[i] * mats[j]));
        }
      }
      worst_sum = std::max(worst_sum, max_abs_diff(sum, ComplexMatrix::identity(p.dim()) - p.matrix()));
      ++trials;
    }
  }
  t.require(worst_product <= 1e-12, "term products " + num(worst_product));
  t.require(worst_sum <= 1e-12, "sum residual " + num(worst_sum));
  return t.outcome(std::to_string(trials) + " projectors, max term product " + num(worst_product) +
                   ", max sum residual " + num(worst_sum));
}

// 9. K1/K2 laws and causality.
Outcome criterion_9() {
  Tally t;
  const std::vector<double> times = {1, 2, 3, 4};
  const auto k1 = finite_k1(times);
  const auto& el = k1.elements;

  // Exhaustive associativity over the 15 supports drawn from four times.
  for (const auto& s : el) {
    for (const auto& u : el) {
      const auto su = k1_compose(s, u);
      if (!(s == u)) {
        t.require(!(su && k1_compose(u, s)), "K1 not directed at " + to_string(s) + ", " + to_string(u));
      }
      for (const auto& v : el) {
        const auto uv = k1_compose(u, v);
        const auto left = su ? k1_compose(*su, v) : std::nullopt;
        const auto right = uv ? k1_compose(s, *uv) : std::nullopt;
        t.require(left.has_value() == right.has_value() && (!left || *left == *right),
                  "K1 associativity at " + to_string(s) + ", " + to_string(u) + ", " + to_string(v));
      }
    }
    const auto parts = k1_nuclear_decomposition(s);
    auto acc = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) acc = *k1_compose(acc, parts[i]);
    t.require(acc == s, "nuclear round trip of " + to_string(s));
  }

  const auto k1_report = validate_finite_psg(k1.psg);
  t.require(k1_report.associative && k1_report.directed, "K1 table");
  std::vector<std::size_t> identity(k1.psg.size());
  for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;
  t.require(check_causality(k1.psg, identity, k1.psg).ok(), "K1 causality");

  // K2 over up to four times with commuting and non-commuting alphabets.
  const auto z = spin_decomposition({0, 0, 1}).projectors;
  const auto x = spin_decomposition({1, 0, 0}).projectors;
  const std::vector<std::vector<Projector>> alphabets = {{z[0]}, z, {z[0], x[0]}, {z[0], z[1], x[0]}};
  for (std::size_t len = 1; len <= 4; ++len) {
    const std::vector<double> sub(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(len));
    for (const auto& alphabet : alphabets) {
      std::size_t count = 0;
      std::size_t power = 1;
      for (std::size_t i = 0; i < len; ++i) {
        power *= alphabet.size();
        count += power;
      }
      if (count > 200) continue;
      const auto k2 = finite_k2(sub, alphabet);
      const auto& q = k2.structure;
      const std::size_t cap = 256;
      const auto rep = validate_finite_psg(q.history_psg, cap);
      t.require(rep.associative, "K2 associativity");
      t.require(rep.directed, "K2 directedness");
      t.require(check_homomorphism(q.history_psg, q.sigma, q.support_psg).ok(), "K2 sigma homomorphism");
      // Over a single time the support table is {t} o {t} = {t}, whose only
      // element is a unit, so it has no nuclear elements to match.
      if (len > 1) t.require(validate_quasitemporal(q, cap).ok(), "K2 quasitemporal structure");
      t.require(check_causality(q.history_psg, q.sigma, q.support_psg, cap).ok(), "K2 causality");
    }
  }

  // Loop counterexample: a precedes both b and c, sigma(a) = sigma(b).
  const auto support = finite_k1(std::vector<double>{1, 2});
  const auto& tp = support.psg;
  const auto loop = FinitePsg::from_triples({"a", "b", "c", "ab", "ac"}, {{"a", "b", "ab"}, {"a", "c", "ac"}});
  const std::vector<std::size_t> sigma = {tp.index_of("{1}"), tp.index_of("{1}"), tp.index_of("{2}"),
                                          tp.index_of("{1}"), tp.index_of("{1,2}")};
  t.require(!check_causality(loop, sigma, tp).ok(), "loop not flagged");
  return t.outcome("K1 over " + std::to_string(el.size()) + " supports, K2 instances up to four times, loop flagged");
}

}  // namespace

int main() {
  const auto start = Clock::now();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"spin-half case (i) probabilities", criterion_1},
      {"consistency condition sweep", criterion_2},
      {"case (ii) complementarity", criterion_3},
      {"collapse oracle equivalence", criterion_4},
      {"decoherence functional axioms", criterion_5},
      {"OR-additivity", criterion_6},
      {"time-symmetric reduction", criterion_7},
      {"HPO negation identity", criterion_8},
      {"psg laws and causality", criterion_9},
  };
  int failed = 0;
  int index = 1;
  for (const auto& [name, run] : criteria) {
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %d: %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", index, name.c_str(), seconds_since(t0),
                o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
    ++index;
  }
  const double total = seconds_since(start);
  const bool fast = total < 60.0;
  std::printf("%s 10: total runtime (%.2f s, limit 60 s)\n", fast ? "PASS" : "FAIL", total);
  failed += fast ? 0 : 1;
  return failed == 0 ? 0 : 1;
}
