#include "pimsner/suites.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace pimsner {

namespace {

struct Ctx {
  const Instance& in;
  int n = 0;
  double tol = kDefaultTol;
  std::uint64_t seed = 0;
  int max_len = 0;
  long cap = kDefaultDimCap;
};

Rng suite_rng(std::uint64_t seed, unsigned salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), salt};
  return Rng(seq);
}

// Runs f and merges its report; domain and cap violations become markers.
void guard(VerificationReport& rep, const std::string& prefix, const std::function<VerificationReport()>& f) {
  try {
    rep.merge(f(), prefix);
  } catch (const ValidationError& e) {
    rep.merge(e.report(), prefix);
  } catch (const PreconditionError& e) {
    rep.precondition(prefix, "operation domain", e.what());
  } catch (const ResourceError& e) {
    rep.skipped(prefix, "dimension cap", e.what());
  }
}

bool need_truncation(VerificationReport& rep, const Ctx& c) {
  if (c.n > 0) return true;
  rep.precondition("truncation", "N >= 1", "no truncation in the instance parameters or on the command line");
  return false;
}

bool need_word_length(VerificationReport& rep, const Ctx& c) {
  if (c.max_len > 0) return true;
  rep.precondition("max_word_length", "word-length budget >= 1",
                   "no max_word_length in the instance parameters or on the command line");
  return false;
}

const ModuleEntry* use_module(VerificationReport& rep, const Ctx& c, const std::string& name) {
  const ModuleEntry& m = c.in.modules.at(name);
  if (m.map) rep.merge(validate_cp(*m.map), "map");
  if (!m.valid) {
    rep.merge(m.construction, "module");
    return nullptr;
  }
  return &m;
}

FockPtr build_fock(VerificationReport& rep, const HilbertBimodule& h, int n, long cap, const std::string& what) {
  try {
    return FockSpace::build(h, n, cap);
  } catch (const ResourceError& e) {
    rep.skipped(what, "dimension cap", e.what());
    return nullptr;
  }
}

// ---------------------------------------------------------------------------

void fock_suite(VerificationReport& rep, const Ctx& c) {
  const FockSection& s = *c.in.fock;
  if (!need_truncation(rep, c)) return;
  const ModuleEntry* m = use_module(rep, c, s.module);
  if (!m) return;
  Rng rng = suite_rng(c.seed, 1);
  const HilbertBimodule& h = m->module;
  rep.merge(m->construction, "module");
  std::vector<Vector> hs;
  for (int i = 0; i < s.samples; ++i) hs.push_back(h.random_vector(rng));
  guard(rep, "gram_schmidt", [&] { return gram_schmidt_check(h, hs); });
  FockPtr f = build_fock(rep, h, c.n, c.cap, "fock space");
  if (!f) return;
  rep.parameters()["fock_dimension"] = f->dimension();
  guard(rep, "creation", [&] { return creation_relations_check(f, hs, rng); });
  guard(rep, "expectation", [&] { return expectation_check(f, rng, s.samples); });
  for (const auto& [name, w] : c.in.words) {
    if (w.module != s.module) continue;
    guard(rep, "word/" + name, [&] {
      VerificationReport r("word");
      FockOperator t = word(f, w.spec);
      const int deg = w.spec.degree();
      FockOperator g = gauge_expectation(t);
      const double res = deg == 0 ? (g - t).frobenius() : g.frobenius();
      r.check("gauge expectation keeps exactly the degree-zero words", "Phi(x) = x if deg x = 0, 0 otherwise", res,
              kDefaultTol);
      std::set<int> ds = t.degrees();
      r.check_true("word is homogeneous", "gauge action z^deg on words", ds.empty() || ds == std::set<int>{deg});
      return r;
    });
  }
}

void ideal_suite(VerificationReport& rep, const Ctx& c) {
  const IdealSection& s = *c.in.ideal;
  if (!need_truncation(rep, c)) return;
  const ModuleEntry* m = use_module(rep, c, s.module);
  if (!m) return;
  Rng rng = suite_rng(c.seed, 2);
  FockPtr f = build_fock(rep, m->module, c.n, c.cap, "fock space");
  if (!f) return;
  for (int n : s.levels) {
    const std::string p = "n=" + std::to_string(n);
    if (n > c.n) {
      rep.precondition(p, "1 <= n <= N", "level exceeds the truncation");
      continue;
    }
    guard(rep, p, [&] { return ideal_structure_check(f, n, rng); });
  }
}

void factorization_suite(VerificationReport& rep, const Ctx& c) {
  const FactorizationSection& s = *c.in.factorization;
  const ModuleEntry* m = use_module(rep, c, s.module);
  if (!m) return;
  Rng rng = suite_rng(c.seed, 3);
  const HilbertBimodule ht = augment(m->module).sum.module;
  for (int n = 0; n <= s.max_total; ++n)
    for (int k = 0; k * (n + 1) <= s.max_total; ++k)
      for (int j = 0; j <= n && k * (n + 1) + j <= s.max_total; ++j) {
        const std::string p = "n=" + std::to_string(n) + ",k=" + std::to_string(k) + ",j=" + std::to_string(j);
        guard(rep, p, [&] { return fock_factorization_check(ht, n, k, j, rng); });
      }
}

void toeplitz_suite(VerificationReport& rep, const Ctx& c) {
  const ToeplitzSection& s = *c.in.toeplitz;
  if (!need_truncation(rep, c)) return;
  const ModuleEntry* m = use_module(rep, c, s.module);
  if (!m) return;
  Rng rng = suite_rng(c.seed, 4);
  Augmented a = augment(m->module);
  FockPtr f = build_fock(rep, a.sum.module, c.n, c.cap, "augmented fock space");
  if (f) {
    guard(rep, "expectation", [&] { return expectation_check(f, rng, 3, &a.xi); });
    guard(rep, "endomorphism", [&] { return toeplitz_endomorphism_check(f, a.xi, rng); });
  }
  if (s.state) {
    const StateFunctional& rho = c.in.states.at(*s.state);
    guard(rep, "state", [&] { return toeplitz_state_check(rho.algebra(), rho, c.n, rng); });
  }
}

void free_suite(VerificationReport& rep, const Ctx& c) {
  const FreeSection& s = *c.in.free;
  guard(rep, "semicircular", [&] { return semicircular_check(s.semicircular_truncation); });
  guard(rep, "haar", [&] { return haar_decay_report(s.haar_truncations); });
  if (!need_word_length(rep, c)) return;
  guard(rep, "semicircular_pair", [&] {
    // two orthogonal semicirculars over C, words of length <= max_word_length
    auto f = FockSpace::build(scalar_bimodule(2), s.semicircular_truncation, c.cap);
    Vector e1 = Vector::Zero(2), e2 = Vector::Zero(2);
    e1(0) = e2(1) = 1.0;
    FockOperator l1 = FockOperator::creation(f, e1), l2 = FockOperator::creation(f, e2);
    FockOperator s1 = l1 + l1.adjoint(), s2 = l2 + l2.adjoint();
    std::vector<MomentFamily> fam{{"s1", {{s1}, {s1, s1}}, 2}, {"s2", {{s2}, {s2, s2}}, 2}};
    const int len = std::max(1, std::min(c.max_len, s.semicircular_truncation / 2));
    Rng rng = suite_rng(c.seed, 5);
    return freeness_check(f, fam, [](const AlgebraElement& x) { return x; }, len, rng);
  });
}

void crossed_suite(VerificationReport& rep, const Ctx& c) {
  Rng rng = suite_rng(c.seed, 6);
  for (std::size_t i = 0; i < c.in.crossed.size(); ++i) {
    const CrossedSection& s = c.in.crossed[i];
    const std::string p = "crossed[" + std::to_string(i) + "]";
    const CStarAlgebra& a = c.in.algebras.at(s.algebra);
    const GroupAction& act = c.in.actions.at(s.action);
    if (act.alpha.empty() || !(act.alpha.front().algebra() == a)) {
      rep.check_true(p + "/action acts on the algebra", "alpha: G -> Aut(A)", false, "action on another algebra");
      continue;
    }
    std::optional<CrossedProduct> cp;
    try {
      cp.emplace(a, act);
    } catch (const StructuralError& e) {
      rep.check(p + "/action is a homomorphism", "alpha_g alpha_h = alpha_gh", action_defect(act), kDefaultTol,
                e.what());
      continue;
    }
    rep.parameters()[p + ".dimension"] = cp->dimension();
    guard(rep, p + "/construction", [&] { return validate_crossed_product(*cp); });
    if (s.automorphism) {
      guard(rep, p + "/lift", [&] {
        LiftedAutomorphism l = lift_automorphism(*cp, c.in.automorphisms.at(*s.automorphism));
        return lift_check(*cp, l, rng);
      });
    }
    std::vector<int> f = s.folner;
    if (f.empty())
      for (int g = 0; g < cp->group().order(); ++g) f.push_back(g);
    std::vector<AlgebraElement> test;
    for (int t = 0; t < 3; ++t) test.push_back(a.random(rng));
    guard(rep, p + "/folner", [&] { return folner_average(*cp, f, CPLinearMap::identity(a), test); });
    if (s.defect_map) {
      const CPLinearMap& m = c.in.maps.at(*s.defect_map);
      guard(rep, p + "/defect", [&] { return folner_average(*cp, f, m, test); });
    }
  }
}

void amalg_suite(VerificationReport& rep, const Ctx& c) {
  const AmalgSection& s = *c.in.amalg;
  if (!need_truncation(rep, c) || !need_word_length(rep, c)) return;
  AmalgSpec spec = s.spec;
  spec.truncation = c.n;
  std::optional<AmalgSetup> setup;
  try {
    setup.emplace(spec, c.cap);
  } catch (const ValidationError& e) {
    rep.merge(e.report(), "setup");
    return;
  } catch (const PreconditionError& e) {
    rep.precondition("setup", "faithful GNS representations", e.what());
    return;
  } catch (const ResourceError& e) {
    rep.skipped("setup", "dimension cap", e.what());
    return;
  }
  Rng rng = suite_rng(c.seed, 7);
  rep.parameters()["module_dimension"] = setup->module().dimension();
  rep.parameters()["fock_dimension"] = setup->fock()->dimension();
  guard(rep, "setup", [&] { return amalg_setup_check(*setup, rng); });
  guard(rep, "build_W", [&] { return build_w_check(*setup); });
  guard(rep, "swap", [&] { return swap_commutation(*setup); });
  guard(rep, "vanishing", [&] { return wunitary_vanishing(*setup, s.vanishing_budget, rng); });
  guard(rep, "LA", [&] { return la_freeness(*setup, c.max_len, rng); });
  if (s.nonfree_control) guard(rep, "nonfree_control", [&] { return nonfree_control(*setup, rng); });
}

void bog_suite(VerificationReport& rep, const Ctx& c) {
  if (!need_truncation(rep, c)) return;
  Rng rng = suite_rng(c.seed, 8);
  for (std::size_t i = 0; i < c.in.bog.size(); ++i) {
    const BogSection& s = c.in.bog[i];
    const std::string p = "bog[" + std::to_string(i) + "]";
    VerificationReport sub("bog");
    const ModuleEntry* m = use_module(sub, c, s.module);
    if (!m) {
      rep.merge(sub, p);
      continue;
    }
    const HilbertBimodule& h = m->module;
    const AlgebraAutomorphism& beta = c.in.automorphisms.at(s.automorphism);
    std::optional<BogoliubovMap> u;
    try {
      if (s.u) {
        BogoliubovMap cand{h, *s.u, beta};
        VerificationReport v = validate_bogoliubov(cand);
        sub.merge(v, "definition");
        if (v.passed()) u = cand;
      } else {
        u = permutation_twist(h, beta, rng);
        sub.merge(validate_bogoliubov(*u), "definition");
      }
    } catch (const StructuralError& e) {
      sub.check_true("definition/shapes", "U: H -> H, beta in Aut(B)", false, e.what());
    } catch (const PreconditionError& e) {
      sub.precondition("definition", "permutation twist", e.what());
    }
    if (!u) {
      rep.merge(sub, p);
      continue;
    }
    AugmentedBogoliubov aug = augment_bogoliubov(*u);
    if (FockPtr ft = build_fock(sub, aug.map.h, c.n, c.cap, "augmented fock space"))
      guard(sub, "extension", [&] { return fock_extension(ft, aug.map, &aug.xi).report; });
    FockPtr f = build_fock(sub, h, c.n, c.cap, "fock space");
    if (f) {
      for (int n = 1; n <= s.n_max; ++n) {
        const std::string q = "n=" + std::to_string(n);
        if (n > c.n) {
          sub.precondition(q, "1 <= n <= N", "n exceeds the truncation");
          continue;
        }
        guard(sub, q, [&] { return entropy_bound_report(f, *u, s.k_generators, n, s.p_max, rng).report; });
      }
    }
    rep.merge(sub, p);
  }
}

using Runner = void (*)(VerificationReport&, const Ctx&);

struct SuiteDef {
  const char* name;
  Runner run;
  bool (*present)(const Instance&);
};

const std::vector<SuiteDef>& defs() {
  static const std::vector<SuiteDef> d = {
      {"fock", fock_suite, [](const Instance& i) { return i.fock.has_value(); }},
      {"ideal", ideal_suite, [](const Instance& i) { return i.ideal.has_value(); }},
      {"factorization", factorization_suite, [](const Instance& i) { return i.factorization.has_value(); }},
      {"toeplitz", toeplitz_suite, [](const Instance& i) { return i.toeplitz.has_value(); }},
      {"crossed", crossed_suite, [](const Instance& i) { return !i.crossed.empty(); }},
      {"free", free_suite, [](const Instance& i) { return i.free.has_value(); }},
      {"amalg", amalg_suite, [](const Instance& i) { return i.amalg.has_value(); }},
      {"bog", bog_suite, [](const Instance& i) { return !i.bog.empty(); }},
  };
  return d;
}

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& d : defs()) n.push_back(d.name);
    n.push_back("all");
    return n;
  }();
  return names;
}

VerificationReport run_suite(const Instance& in, const std::string& suite, const SuiteOptions& opt) {
  const auto& names = suite_names();
  if (std::find(names.begin(), names.end(), suite) == names.end())
    throw PreconditionError("unknown suite '" + suite + "'");
  Ctx c{in};
  c.n = opt.truncation.value_or(in.params.truncation);
  c.tol = opt.tolerance.value_or(in.params.tolerance);
  c.seed = opt.seed.value_or(in.params.seed);
  c.max_len = opt.max_word_length.value_or(in.params.max_word_length);
  c.cap = in.params.dimension_cap;
  if (opt.truncation && *opt.truncation < 1) throw PreconditionError("truncation must be at least 1");
  if (!(c.tol > 0)) throw PreconditionError("tolerance must be positive");

  VerificationReport rep(suite);
  rep.set_seed(c.seed);
  if (!in.name.empty()) rep.parameters()["instance"] = in.name;
  rep.parameters()["truncation"] = c.n;
  rep.parameters()["tolerance"] = c.tol;
  rep.parameters()["seed"] = c.seed;
  rep.parameters()["max_word_length"] = c.max_len;
  rep.parameters()["dimension_cap"] = c.cap;

  if (suite == "all") {
    Json ran = Json::array();
    for (const auto& d : defs()) {
      if (!d.present(in)) continue;
      VerificationReport sub(d.name);
      d.run(sub, c);
      rep.merge(sub, d.name);
      ran.push_back(d.name);
    }
    rep.parameters()["suites"] = ran;
    if (ran.empty()) rep.precondition("sections", "at least one suite section", "the instance declares no suite sections");
  } else {
    for (const auto& d : defs()) {
      if (suite != d.name) continue;
      if (!d.present(in))
        rep.precondition("section", "instance section '" + suite + "'", "the instance has no '" + suite + "' section");
      else
        d.run(rep, c);
    }
  }
  rep.rejudge(kDefaultTol, c.tol);
  return rep;
}

}  // namespace pimsner
