#include "pimsner/freeprod.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pimsner {

namespace {

std::size_t z(int i) { return static_cast<std::size_t>(i); }

double catalan(int k) {
  double c = 1.0;
  for (int i = 0; i < k; ++i) c = c * 2.0 * (2.0 * i + 1.0) / (i + 2.0);
  return c;
}

// ---- B (x) C block bookkeeping: block (k, l) has index k |C| + l and size n_k m_l ----

CStarAlgebra tensor_algebra(const CStarAlgebra& b, const CStarAlgebra& c) {
  std::vector<int> blocks;
  for (int k = 0; k < b.block_count(); ++k)
    for (int l = 0; l < c.block_count(); ++l) blocks.push_back(b.block_size(k) * c.block_size(l));
  return CStarAlgebra(blocks);
}

AlgebraElement embed_tensor(const CStarAlgebra& a, const CStarAlgebra& c, const AlgebraElement& b) {
  std::vector<Matrix> blocks;
  for (int k = 0; k < b.algebra().block_count(); ++k)
    for (int l = 0; l < c.block_count(); ++l) {
      const int m = c.block_size(l);
      const Matrix& bk = b.block(k);
      Matrix x = Matrix::Zero(bk.rows() * m, bk.cols() * m);
      for (Index i = 0; i < bk.rows(); ++i)
        for (Index j = 0; j < bk.cols(); ++j) x.block(i * m, j * m, m, m) = bk(i, j) * Matrix::Identity(m, m);
      blocks.push_back(std::move(x));
    }
  return {a, std::move(blocks)};
}

// (id (x) omega)(a), summed over the blocks of C
AlgebraElement slice(const CStarAlgebra& b, const CStarAlgebra& c, const std::vector<Matrix>& omega,
                     const AlgebraElement& a) {
  std::vector<Matrix> out;
  for (int k = 0; k < b.block_count(); ++k) {
    const int n = b.block_size(k);
    Matrix y = Matrix::Zero(n, n);
    for (int l = 0; l < c.block_count(); ++l) {
      const int m = c.block_size(l);
      const Matrix& x = a.block(k * c.block_count() + l);
      const Matrix& w = omega[z(l)];
      for (int i = 0; i < n; ++i)
        for (int ii = 0; ii < n; ++ii) y(i, ii) += (x.block(i * m, ii * m, m, m) * w).trace();
    }
    out.push_back(std::move(y));
  }
  return {b, std::move(out)};
}

std::vector<Matrix> validated_density(const CStarAlgebra& c, const std::vector<Matrix>& omega, const char* which) {
  StateFunctional s = state_from_density(c, omega);
  if (!s.faithful_gns())
    throw PreconditionError(std::string("the expectation onto B from ") + which + " does not have a faithful GNS representation");
  return s.densities();
}

Vector apply_right_to_left(const std::vector<const FockOperator*>& ops, Vector v) {
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) v = (*it)->apply(v);
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Toeplitz algebra of a state

VerificationReport toeplitz_state_check(const CStarAlgebra& b, const StateFunctional& rho, int truncation, Rng& rng,
                                        int samples) {
  if (!rho.faithful_gns()) throw PreconditionError("the GNS representation of rho is not faithful");
  if (truncation < 2) throw PreconditionError("truncation must be at least 2");
  VerificationReport rep("toeplitz_state");
  rep.parameters()["truncation"] = truncation;
  PointedBimodule g = gns_bimodule(b, rho);
  auto f = FockSpace::build(g.module, truncation);
  FockOperator l = FockOperator::creation(f, g.xi), ls = l.adjoint();
  const int n = truncation;

  double comp = 0.0;
  for (const auto& e : b.basis()) {
    FockOperator lhs = ls * FockOperator::left(f, e) * l;
    comp = std::max(comp, (lhs - FockOperator::left(f, rho(e) * b.identity())).restricted_frobenius(n - 1));
  }
  rep.check("compression by l(xi)", "l(xi)* b l(xi) = rho(b)", comp, kDefaultTol, "levels <= N - 1");
  rep.check("l(xi) is an isometry", "l(xi)* l(xi) = 1",
            (ls * l - FockOperator::identity(f)).restricted_frobenius(n - 1), kDefaultTol, "levels <= N - 1");

  auto tau_scalar = [&](const AlgebraElement& x) { return x.trace() / b.identity().trace(); };
  double scalar = 0.0, support = 0.0, degree = 0.0;
  std::uniform_int_distribution<int> len(1, 6);
  std::bernoulli_distribution coin(0.5);
  Vector vac = f->vacuum(b.identity());
  FockOperator q = FockOperator::identity(f) - l * ls;
  for (int s = 0; s < samples; ++s) {
    // word in l(xi), l(xi)* with at most N creations
    std::vector<const FockOperator*> w;
    int creations = 0, deg = 0;
    for (int i = len(rng); i > 0; --i) {
      bool c = coin(rng) && creations < n;
      w.push_back(c ? &l : &ls);
      creations += c ? 1 : 0;
      deg += c ? 1 : -1;
    }
    Vector out = apply_right_to_left(w, vac);
    AlgebraElement e = b.from_flat(f->level_part(out, 0));
    scalar = std::max(scalar, distance(e, tau_scalar(e) * b.identity()));
    if (deg != 0) degree = std::max(degree, e.norm());
    std::vector<const FockOperator*> qwq{&q};
    qwq.insert(qwq.end(), w.begin(), w.end());
    qwq.push_back(&q);
    AlgebraElement e2 = b.from_flat(f->level_part(apply_right_to_left(qwq, vac), 0));
    support = std::max(support, distance(e2, e));
  }
  rep.check("vacuum expectation is scalar on C*(l(xi))", "E(w) in C 1 for words w in l(xi), l(xi)*", scalar,
            kDefaultTol);
  rep.check("unbalanced words have zero expectation", "E(l(xi)) = 0 and E(w) = 0 for degree(w) != 0", degree,
            kDefaultTol);
  rep.check("support of the expectation", "psi(1 - l(xi) l(xi)*) = 1", distance(vacuum_expectation(q), b.identity()),
            kDefaultTol);
  rep.check("expectation lives on the support", "psi(Q w Q) = psi(w), Q = 1 - l(xi) l(xi)*", support, kDefaultTol);

  double toeplitz = 0.0;
  FockOperator lk = FockOperator::identity(f);
  for (int k = 1; k <= n; ++k) {
    lk = lk * l;
    toeplitz = std::max(toeplitz, vacuum_expectation(lk * lk.adjoint()).norm());
  }
  rep.check("Toeplitz word form", "psi(l(xi)^k l(xi)*^k) = 0 for k >= 1", toeplitz, kDefaultTol);
  rep.data()["module_dimension"] = g.module.dimension();
  rep.data()["fock_dimension"] = f->dimension();
  if (g.report.data().contains("warning")) rep.data()["warning"] = g.report.data()["warning"];
  return rep;
}

// ---------------------------------------------------------------------------
// semicircular and Haar unitary elements

namespace {

struct ScalarFock {
  FockPtr f;
  FockOperator s;
};

ScalarFock scalar_fock(int n) {
  auto f = FockSpace::build(scalar_bimodule(1), n);
  FockOperator l = FockOperator::creation(f, Vector::Ones(1));
  return {f, l + l.adjoint()};
}

}  // namespace

std::vector<double> semicircular_moments(int truncation, int max_order) {
  if (max_order > truncation) throw PreconditionError("moment order exceeds the truncation");
  if (truncation < 0 || max_order < 0) throw StructuralError("orders must be nonnegative");
  auto sf = scalar_fock(truncation);
  Vector v = sf.f->vacuum(sf.f->base().identity());
  std::vector<double> m;
  for (int k = 0; k <= max_order; ++k) {
    m.push_back(v(0).real());
    v = sf.s.apply(v);
  }
  return m;
}

VerificationReport semicircular_check(int truncation) {
  VerificationReport rep("semicircular");
  rep.parameters()["truncation"] = truncation;
  auto m = semicircular_moments(truncation);
  double even = 0.0, odd = 0.0;
  for (int k = 0; k < static_cast<int>(m.size()); ++k) {
    if (k % 2 == 0) even = std::max(even, std::abs(m[z(k)] - catalan(k / 2)));
    else odd = std::max(odd, std::abs(m[z(k)]));
  }
  rep.check("even moments are Catalan numbers", "psi(s^2k) = C_k", even, kDefaultTol);
  rep.check("odd moments vanish", "psi(s^(2k+1)) = 0", odd, 1e-12);
  auto sf = scalar_fock(truncation);
  rep.check("s is self-adjoint", "s = l(xi) + l(xi)* = s*", (sf.s - sf.s.adjoint()).frobenius(), 1e-15);
  rep.data()["moments"] = m;
  return rep;
}

double semicircle_cdf(double t) {
  if (t <= -2.0) return 0.0;
  if (t >= 2.0) return 1.0;
  return 0.5 + t * std::sqrt(4.0 - t * t) / (4.0 * std::numbers::pi) + std::asin(t / 2.0) / std::numbers::pi;
}

HaarUnitary haar_unitary(int truncation, int k_max) {
  auto sf = scalar_fock(truncation);
  Matrix s = sf.s.dense();
  Eigen::SelfAdjointEigenSolver<Matrix> es(s);
  const Index d = s.rows();
  Vector ph(d);
  for (Index i = 0; i < d; ++i)
    ph(i) = std::exp(cplx(0.0, 2.0 * std::numbers::pi * semicircle_cdf(es.eigenvalues()(i))));
  Matrix u = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  HaarUnitary out{FockOperator::from_dense(sf.f, u), {}, VerificationReport("haar_unitary")};
  out.report.parameters()["truncation"] = truncation;
  Vector v = Vector::Zero(d);
  v(0) = 1.0;
  for (int k = 0; k <= k_max; ++k) {
    out.moduli.push_back(std::abs(v(0)));
    v = u * v;
  }
  out.report.check("u is unitary", "u* u = 1", (u.adjoint() * u - Matrix::Identity(d, d)).norm(), 1e-12);
  out.report.check("psi(u^0) = 1", "psi(1) = 1", std::abs(out.moduli[0] - 1.0), 1e-15);
  out.report.data()["moduli"] = out.moduli;
  return out;
}

VerificationReport haar_decay_report(const std::vector<int>& ns, int k_max) {
  VerificationReport rep("haar_decay");
  rep.parameters()["truncations"] = ns;
  constexpr double kFloor = 1e-13;
  std::vector<std::vector<double>> table;
  for (int n : ns) {
    auto h = haar_unitary(n, k_max);
    rep.merge(h.report, "N=" + std::to_string(n));
    table.push_back(h.moduli);
  }
  double increase = 0.0;
  for (std::size_t i = 1; i < table.size(); ++i)
    for (int k = 1; k <= k_max; ++k)
      increase = std::max(increase, table[i][z(k)] - std::max(table[i - 1][z(k)], kFloor));
  rep.check("moments decay with the truncation", "|psi(u^k)| non-increasing in N, k != 0", std::max(0.0, increase),
            0.0, "differences below 1e-13 count as round-off");
  for (std::size_t i = 0; i < ns.size(); ++i)
    if (ns[i] == 16) rep.check("first moment at N = 16", "|psi(u)| <= 0.1", table[i][1], 0.1);
  nlohmann::ordered_json t = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < ns.size(); ++i) t.push_back({{"N", ns[i]}, {"moduli", table[i]}});
  rep.data()["table"] = t;
  return rep;
}


// ---------------------------------------------------------------------------
// alternating moments

namespace {

Vector apply_factors(const FactoredElement& x, Vector v) {
  for (auto it = x.rbegin(); it != x.rend(); ++it) v = it->apply(v);
  return v;
}

struct Centred {
  FactoredElement factors;
  FockOperator shift;  // left action of psi(x)
  Vector apply(const Vector& v) const { return apply_factors(factors, v) - shift.apply(v); }
};

FactoredElement adjoints(const FactoredElement& x) {
  FactoredElement out;
  for (auto it = x.rbegin(); it != x.rend(); ++it) out.push_back(it->adjoint());
  return out;
}

// Power iteration on x* x; x is never formed.
double centred_norm(const Centred& c, int dim) {
  Rng rng(7);
  std::normal_distribution<double> nd;
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v(i) = cplx(nd(rng), nd(rng));
  double s = 0.0;
  const FactoredElement adj = adjoints(c.factors);
  const FockOperator shift_adj = c.shift.adjoint();
  for (int it = 0; it < 80; ++it) {
    v /= v.norm();
    Vector w = c.apply(v);
    s = w.norm();
    if (s < 1e-300) return 0.0;
    v = apply_factors(adj, w) - shift_adj.apply(w);
  }
  return s;
}

}  // namespace

VerificationReport freeness_check(const FockPtr& f, const std::vector<MomentFamily>& families,
                                  const ExpectationMap& psi, int max_length, Rng& rng, int samples,
                                  const std::string& anchor) {
  VerificationReport rep("freeness");
  rep.parameters()["max_length"] = max_length;
  const std::string name = "alternating centred moments vanish";
  if (families.size() < 2) {
    rep.check(name, anchor, 0.0, kDefaultTol, "single family: no alternating words");
    return rep;
  }
  const int n = f->truncation();
  const CStarAlgebra& b = f->base();
  const Vector vac = f->vacuum(b.identity());
  auto value = [&](const Vector& v) { return psi(b.from_flat(f->level_part(v, 0))); };

  std::vector<std::vector<Centred>> pool(families.size());
  std::vector<std::vector<double>> norms(families.size());
  for (std::size_t i = 0; i < families.size(); ++i) {
    if (families[i].elements.empty()) throw StructuralError("empty moment family");
    for (const auto& x : families[i].elements) {
      if (x.empty()) throw StructuralError("empty factored element");
      Centred c{x, FockOperator::left(f, value(apply_factors(x, vac)))};
      norms[i].push_back(std::max(centred_norm(c, f->dimension()), 1e-300));
      pool[i].push_back(std::move(c));
    }
  }

  std::vector<std::vector<int>> patterns, frontier;
  for (std::size_t i = 0; i < families.size(); ++i) frontier.push_back({static_cast<int>(i)});
  for (int len = 1; len <= max_length; ++len) {
    patterns.insert(patterns.end(), frontier.begin(), frontier.end());
    std::vector<std::vector<int>> next;
    for (const auto& p : frontier)
      for (std::size_t i = 0; i < families.size(); ++i)
        if (static_cast<int>(i) != p.back()) {
          auto q = p;
          q.push_back(static_cast<int>(i));
          next.push_back(std::move(q));
        }
    frontier = std::move(next);
  }
  double total = 0.0;
  for (const auto& p : patterns) {
    int raise = 0;
    double count = 1.0;
    for (int i : p) {
      raise += families[z(i)].raise;
      count *= static_cast<double>(pool[z(i)].size());
    }
    if (raise > n)
      throw PreconditionError("word budget " + std::to_string(raise) + " exceeds the truncation " +
                              std::to_string(n));
    total += count;
  }
  const bool exhaustive = total <= 1e4;

  double worst = 0.0;
  long evaluated = 0;
  nlohmann::ordered_json table = nlohmann::ordered_json::object();
  for (const auto& p : patterns) {
    std::string key;
    for (int i : p)
      key += (key.empty() ? "" : " ") + (families[z(i)].name.empty() ? std::to_string(i + 1) : families[z(i)].name);
    double pmax = 0.0;
    auto eval = [&](const std::vector<int>& choice) {
      Vector v = vac;
      double sc = 1.0;
      for (std::size_t t = p.size(); t-- > 0;) {
        v = pool[z(p[t])][z(choice[t])].apply(v);
        sc *= norms[z(p[t])][z(choice[t])];
      }
      pmax = std::max(pmax, value(v).norm() / sc);
      ++evaluated;
    };
    std::vector<int> choice(p.size(), 0);
    if (exhaustive) {
      while (true) {
        eval(choice);
        std::size_t pos = 0;
        while (pos < p.size() && ++choice[pos] == static_cast<int>(pool[z(p[pos])].size())) choice[pos++] = 0;
        if (pos == p.size()) break;
      }
    } else {
      for (int s = 0; s < samples; ++s) {
        for (std::size_t t = 0; t < p.size(); ++t)
          choice[t] = std::uniform_int_distribution<int>(0, static_cast<int>(pool[z(p[t])].size()) - 1)(rng);
        eval(choice);
      }
    }
    table[key] = pmax;
    worst = std::max(worst, pmax);
  }
  rep.check(name, anchor, worst, kDefaultTol);
  rep.data()["exhaustive"] = exhaustive;
  rep.data()["word_count"] = evaluated;
  rep.data()["moments"] = table;
  return rep;
}

// ---------------------------------------------------------------------------
// amalgamated free products

AlgebraElement AmalgSetup::embed_b(int iota, const AlgebraElement& b) const {
  return embed_tensor(a(iota), iota == 1 ? c1_ : c2_, b);
}

AlgebraElement AmalgSetup::phi_iota(int iota, const AlgebraElement& x) const {
  return slice(b_, iota == 1 ? c1_ : c2_, iota == 1 ? spec_.omega1 : spec_.omega2, x);
}

AlgebraElement AmalgSetup::pair(const AlgebraElement& a1, const AlgebraElement& a2) const {
  if (!(a1.algebra() == a1_) || !(a2.algebra() == a2_)) throw StructuralError("pair components in the wrong algebras");
  std::vector<Matrix> blocks = a1.blocks();
  blocks.insert(blocks.end(), a2.blocks().begin(), a2.blocks().end());
  return {a_, std::move(blocks)};
}

AlgebraElement AmalgSetup::component(int iota, const AlgebraElement& x) const {
  if (!(x.algebra() == a_)) throw StructuralError("element is not in A_1 (+) A_2");
  const auto& bl = x.blocks();
  const auto split = bl.begin() + a1_.block_count();
  return iota == 1 ? AlgebraElement(a1_, std::vector<Matrix>(bl.begin(), split))
                   : AlgebraElement(a2_, std::vector<Matrix>(split, bl.end()));
}

AlgebraElement AmalgSetup::d(const AlgebraElement& b1, const AlgebraElement& b2) const {
  return pair(embed_b(1, b1), embed_b(2, b2));
}

AlgebraElement AmalgSetup::alpha(const AlgebraElement& x) const {
  return d(phi_iota(2, component(2, x)), phi_iota(1, component(1, x)));
}

std::vector<AlgebraElement> AmalgSetup::d_basis() const {
  std::vector<AlgebraElement> out;
  for (const auto& e : b_.basis()) {
    out.push_back(d(e, b_.zero()));
    out.push_back(d(b_.zero(), e));
  }
  return out;
}

AlgebraElement AmalgSetup::psi(const FockOperator& t) const { return phi_(vacuum_expectation(t)); }

AlgebraElement AmalgSetup::psi_vector(const Vector& v) const { return phi_(a_.from_flat(f_->level_part(v, 0))); }

AlgebraElement AmalgSetup::random_centered(int iota, Rng& rng) const {
  AlgebraElement x = a(iota).random(rng);
  return x - embed_b(iota, phi_iota(iota, x));
}

namespace {

CPLinearMap amalg_map(const AmalgSetup& s, bool swap) {
  return CPLinearMap::from_function(s.a(), s.a(), [&s, swap](const AlgebraElement& x) {
    AlgebraElement b1 = s.phi_iota(1, s.component(1, x)), b2 = s.phi_iota(2, s.component(2, x));
    return swap ? s.d(b2, b1) : s.d(b1, b2);
  });
}

}  // namespace

AmalgSetup::AmalgSetup(const AmalgSpec& spec, long dim_cap)
    : spec_(spec), b_(spec.b_blocks), c1_(spec.c1_blocks), c2_(spec.c2_blocks), a1_(tensor_algebra(b_, c1_)),
      a2_(tensor_algebra(b_, c2_)), a_(direct_sum(a1_, a2_)),
      phi_(CPLinearMap::identity(a_)), eta_(CPLinearMap::identity(a_)), report_("amalg_setup") {
  if (spec.truncation < 1) throw StructuralError("truncation must be positive");
  spec_.omega1 = validated_density(c1_, spec.omega1, "A_1");
  spec_.omega2 = validated_density(c2_, spec.omega2, "A_2");
  phi_ = amalg_map(*this, false);
  eta_ = amalg_map(*this, true);

  Rng rng(0);
  for (int iota = 1; iota <= 2; ++iota) {
    const std::string tag = "A_" + std::to_string(iota);
    double fix = 0.0, bimod = 0.0;
    for (const auto& e : b_.basis()) fix = std::max(fix, distance(phi_iota(iota, embed_b(iota, e)), e));
    for (int t = 0; t < 3; ++t) {
      AlgebraElement x = a(iota).random(rng), b1 = b_.random(rng), b2 = b_.random(rng);
      bimod = std::max(bimod, distance(phi_iota(iota, embed_b(iota, b1) * x * embed_b(iota, b2)),
                                       b1 * phi_iota(iota, x) * b2));
    }
    report_.check("expectation fixes B in " + tag, "phi_iota(b (x) 1) = b", fix, kDefaultTol);
    report_.check("expectation is B-bimodular in " + tag, "phi_iota(b x b') = b phi_iota(x) b'", bimod, kDefaultTol);
    const AmalgSetup& self = *this;
    CPLinearMap e = CPLinearMap::from_function(a(iota), a(iota), [&self, iota](const AlgebraElement& x) {
      return self.embed_b(iota, self.phi_iota(iota, x));
    });
    report_.merge(validate_cp(e), tag);
  }
  report_.merge(validate_cp(eta_), "eta");
  if (!report_.passed()) throw ValidationError("amalgamation data failed validation", report_);

  PointedBimodule pb = cp_bimodule(a_, eta_);
  h_ = pb.module;
  xi_ = pb.xi;
  report_.merge(pb.report, "H");
  report_.check("xi is a unit vector", "<xi, xi> = eta(1) = 1", distance(h_.inner(xi_, xi_), a_.identity()),
                kDefaultTol);
  f_ = FockSpace::build(h_, spec.truncation, dim_cap);
  FockOperator l = FockOperator::creation(f_, xi_), ls = l.adjoint();
  FockOperator p = FockOperator::identity(f_) - l * l * ls * ls;
  FockOperator w = p * (l + ls) * p;
  ops_ = {l, ls, p, w};
  report_.parameters()["truncation"] = spec.truncation;
  report_.data()["module_dimension"] = h_.dimension();
  report_.data()["fock_dimension"] = f_->dimension();
}

namespace {

// Test columns supported on the levels <= m: the identity columns when there are
// at most 256 of them, otherwise 24 seeded Gaussian vectors scaled so that
// ||T G||_F estimates the Frobenius norm of T restricted to those levels.
Matrix domain_probe(const FockPtr& f, int m) {
  const int d = f->domain_dimension(m);
  if (d <= 256) return f->domain_columns(m);
  constexpr int kProbes = 24;
  Rng rng(0x5eed);
  std::normal_distribution<double> nd(0.0, std::sqrt(0.5 / kProbes));
  Matrix g = Matrix::Zero(f->dimension(), kProbes);
  for (int j = 0; j < kProbes; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = cplx(nd(rng), nd(rng));
  return g;
}

// Columns pushed through a product of operators (product order).
Matrix chain(const Matrix& cols, std::initializer_list<const FockOperator*> ops) {
  Matrix x = cols;
  for (auto it = std::rbegin(ops); it != std::rend(ops); ++it) x = (*it)->apply(x);
  return x;
}

}  // namespace

VerificationReport amalg_setup_check(const AmalgSetup& s, Rng& rng) {
  VerificationReport rep("amalg_setup");
  rep.parameters()["truncation"] = s.truncation();
  rep.merge(s.report());
  const CStarAlgebra& a = s.a();
  double eta_phi = 0.0, eta_d = 0.0, phi_idem = 0.0;
  for (const auto& e : a.basis()) {
    eta_phi = std::max(eta_phi, distance(s.eta()(s.phi()(e)), s.eta()(e)));
    eta_d = std::max(eta_d, distance(s.phi()(s.eta()(e)), s.eta()(e)));
    phi_idem = std::max(phi_idem, distance(s.phi()(s.phi()(e)), s.phi()(e)));
  }
  rep.check("phi is idempotent onto D", "phi o phi = phi", phi_idem, kDefaultTol);
  rep.check("eta factors through phi", "eta o phi = eta", eta_phi, kDefaultTol);
  rep.check("eta takes values in D", "phi o eta = eta", eta_d, kDefaultTol);
  double alpha = 0.0;
  for (const auto& d : s.d_basis()) alpha = std::max(alpha, distance(s.eta()(d), s.alpha(d)));
  rep.check("eta swaps the copies of B", "eta(d) = alpha(d) for d in D", alpha, kDefaultTol);
  const int n = s.truncation();
  const Matrix cols = domain_probe(s.fock(), n - 1);
  double comp = 0.0;
  for (int t = 0; t < 3; ++t) {
    AlgebraElement x = a.random(rng);
    FockOperator fx = s.left(x), fe = s.left(s.eta()(x));
    comp = std::max(comp, (chain(cols, {&s.Ls(), &fx, &s.L()}) - chain(cols, {&fe})).norm() / x.norm());
  }
  rep.check("compression by L", "L* a L = eta(a)", comp, kDefaultTol, "levels <= N - 1");
  rep.check("L is an isometry", "L* L = 1", (chain(cols, {&s.Ls(), &s.L()}) - cols).norm(), kDefaultTol,
            "levels <= N - 1");
  return rep;
}

VerificationReport build_w_check(const AmalgSetup& s) {
  const int n = s.truncation();
  if (n < 3) throw PreconditionError("W identities need truncation at least 3");
  VerificationReport rep("build_w");
  rep.parameters()["truncation"] = n;
  const FockOperator &l = s.L(), &ls = s.Ls(), &p = s.P(), &w = s.W();
  const Matrix cols = domain_probe(s.fock(), n - 2);
  const std::string note = "levels <= N - 2";
  rep.check("P is idempotent", "P^2 = P", (chain(cols, {&p, &p}) - chain(cols, {&p})).norm(), kDefaultTol, note);
  rep.check("P is self-adjoint", "P = P*", (p - p.adjoint()).frobenius(), kDefaultTol);
  rep.check("W is self-adjoint", "W = W*", (w - w.adjoint()).frobenius(), kDefaultTol);
  rep.check("W squares to P", "W^2 = P", (chain(cols, {&w, &w}) - chain(cols, {&p})).norm(), kDefaultTol, note);
  Matrix expansion = chain(cols, {&l}) + chain(cols, {&ls}) - chain(cols, {&l, &ls, &ls}) - chain(cols, {&l, &l, &ls});
  rep.check("expansion of W", "W = L + L* - L L*^2 - L^2 L*", (chain(cols, {&w}) - expansion).norm(), kDefaultTol,
            note);
  const Matrix low = domain_probe(s.fock(), n - 3);
  rep.check("W is a partial isometry", "W W* W = W", (chain(low, {&w, &w, &w}) - chain(low, {&w})).norm(),
            kDefaultTol, "levels <= N - 3, W* = W");
  rep.check("psi(W) = 0", "psi(W) = 0", s.psi(w).norm(), kDefaultTol);
  return rep;
}

VerificationReport swap_commutation(const AmalgSetup& s) {
  VerificationReport rep("swap_commutation");
  const int n = s.truncation();
  const FockOperator &l = s.L(), &ls = s.Ls(), &p = s.P(), &w = s.W();
  const Matrix all = domain_probe(s.fock(), n), low = domain_probe(s.fock(), n - 1);
  double rl = 0.0, rls = 0.0, rp = 0.0, rw = 0.0;
  for (const auto& d : s.d_basis()) {
    FockOperator fd = s.left(d), fa = s.left(s.alpha(d));
    rl = std::max(rl, (chain(low, {&l, &fd}) - chain(low, {&fa, &l})).norm());
    rls = std::max(rls, (chain(all, {&ls, &fd}) - chain(all, {&fa, &ls})).norm());
    rp = std::max(rp, (chain(all, {&p, &fd}) - chain(all, {&fd, &p})).norm());
    rw = std::max(rw, (chain(low, {&w, &fd}) - chain(low, {&fa, &w})).norm());
  }
  rep.check("L intertwines alpha", "L d = alpha(d) L", rl, kDefaultTol, "levels <= N - 1");
  rep.check("L* intertwines alpha", "L* d = alpha(d) L*", rls, kDefaultTol);
  rep.check("P commutes with D", "P d = d P", rp, kDefaultTol);
  rep.check("W intertwines alpha", "W d = alpha(d) W", rw, kDefaultTol, "levels <= N - 1");
  rep.check("W kills the complement of P", "W (1 - P) = 0", (chain(all, {&w}) - chain(all, {&w, &p})).norm(),
            kDefaultTol);
  if (n >= 2) {
    const CStarAlgebra& b = s.b();
    FockOperator q = s.left(s.d(b.identity(), b.zero()));
    FockOperator qc = s.left(s.d(b.zero(), b.identity()));
    const Matrix cols = domain_probe(s.fock(), n - 2);
    rep.check("W exchanges q and 1 - q", "W q W = (1 - q) P",
              (chain(cols, {&w, &q, &w}) - chain(cols, {&qc, &p})).norm(), kDefaultTol, "levels <= N - 2");
  }
  return rep;
}

VerificationReport wunitary_vanishing(const AmalgSetup& s, int budget, Rng& rng, int samples) {
  const int n = s.truncation();
  if (2 * budget > n)
    throw PreconditionError("vanishing family with k + l <= " + std::to_string(budget) +
                            " needs truncation at least " + std::to_string(2 * budget));
  VerificationReport rep("wunitary");
  rep.parameters()["budget"] = budget;
  rep.parameters()["truncation"] = n;
  const CStarAlgebra& a = s.a();
  const FockOperator& w = s.W();
  const FockOperator comp = FockOperator::identity(s.fock()) - s.P();
  const Vector vac = s.fock()->vacuum(a.identity());
  std::uniform_int_distribution<int> qd(1, 2);

  double worst = 0.0;
  nlohmann::ordered_json table = nlohmann::ordered_json::object();
  for (int k = 0; k <= budget; ++k)
    for (int l = 0; k + l <= budget; ++l) {
      double m = 0.0;
      for (int t = 0; t < samples; ++t) {
        // product order: a_1 W^q_1 ... a_k W^q_k a_{k+1} (1-P) a'_{l+1} W^q'_l ... a'_2 W^q'_1 a'_1
        FactoredElement word;
        double sc = 1.0;
        auto coef = [&] {
          AlgebraElement x = a.random(rng);
          sc *= x.norm();
          word.push_back(s.left(x));
        };
        auto wpow = [&] {
          for (int q = qd(rng); q > 0; --q) word.push_back(w);
        };
        for (int j = 0; j < k; ++j) {
          coef();
          wpow();
        }
        coef();
        word.push_back(comp);
        coef();
        for (int j = 0; j < l; ++j) {
          wpow();
          coef();
        }
        m = std::max(m, s.psi_vector(apply_factors(word, vac)).norm() / sc);
      }
      table[std::to_string(k) + "," + std::to_string(l)] = m;
      worst = std::max(worst, m);
    }
  rep.check("complement of P is invisible to psi", "psi(a_1 W^q_1 ... a_{k+1} (1 - P) a'_{l+1} ... W^q'_1 a'_1) = 0",
            worst, kDefaultTol, "k + l <= " + std::to_string(budget) + ", q in {1, 2}");
  rep.data()["vanishing"] = table;

  // the expectation on M_2
  double cent = 0.0, base = 0.0;
  for (int t = 0; t < samples; ++t) {
    AlgebraElement a2 = s.a(2).random(rng);
    AlgebraElement p2 = s.embed_b(2, s.phi_iota(2, a2));
    AlgebraElement c = s.second(a2 - p2);
    FockOperator fc = s.left(c), fp = s.left(s.second(p2));
    cent = std::max(cent, s.psi_vector(apply_factors({w, fc, w}, vac)).norm() / std::max(c.norm(), 1e-300));
    AlgebraElement target = s.first(s.embed_b(1, s.phi_iota(2, a2)));
    base = std::max(base, distance(s.psi_vector(apply_factors({w, fp, w}, vac)), target) / a2.norm());
  }
  rep.check("centred part of M_2 has zero expectation", "psi(W (0, a_2 - phi_2(a_2)) W) = 0", cent, kDefaultTol);
  rep.check("B part of M_2 is conjugated to the first copy", "psi(W (0, phi_2(a_2)) W) = (phi_2(a_2), 0)", base,
            kDefaultTol);

  const CStarAlgebra& b = s.b();
  FockOperator q = s.left(s.d(b.identity(), b.zero()));
  FockOperator qc = s.left(s.d(b.zero(), b.identity()));
  const Matrix cols = domain_probe(s.fock(), n - 2);
  double m2 = 0.0;
  for (int t = 0; t < std::max(1, samples / 2); ++t) {
    AlgebraElement x = a.random(rng);
    FockOperator fx = s.left(x);
    m2 = std::max(m2, (chain(cols, {&q, &w, &fx, &w, &q}) - chain(cols, {&w, &qc, &fx, &qc, &w})).norm() / x.norm());
  }
  rep.check("two descriptions of M_2 agree", "q W a W q = W (1 - q) a (1 - q) W", m2, kDefaultTol, "levels <= N - 2");

  // M_1 = q A q and M_2 = q W A W q are free over D
  std::vector<FactoredElement> e1, e2;
  for (int t = 0; t < 3; ++t) {
    e1.push_back({s.left(s.first(s.random_centered(1, rng)))});
    e2.push_back({w, s.left(s.second(s.random_centered(2, rng))), w});
  }
  std::vector<MomentFamily> fam{{"M1", e1, 0}, {"M2", e2, 2}};
  int len = 4;
  while (len > 1 && 2 * ((len + 1) / 2) > n) --len;
  rep.merge(freeness_check(s.fock(), fam, s.phi_map(), len, rng, samples,
                           "psi(x_1 ... x_n) = 0, x_j alternately in M_1 and M_2, centred"),
            "M1/M2");
  rep.data()["M1/M2"]["word_length"] = len;
  return rep;
}

VerificationReport la_freeness(const AmalgSetup& s, int max_length, Rng& rng, int samples) {
  const int n = s.truncation();
  VerificationReport rep("la_freeness");
  rep.parameters()["max_length"] = max_length;
  rep.parameters()["truncation"] = n;
  const CStarAlgebra& a = s.a();
  const FockOperator &l = s.L(), &ls = s.Ls();
  const Vector vac = s.fock()->vacuum(a.identity());

  // (alpha)
  double alpha = 0.0;
  for (int k = 0; k <= std::min(n, max_length); ++k)
    for (int m = 0; k + m <= max_length; ++m) {
      if (k + m == 0) continue;
      for (int t = 0; t < samples; ++t) {
        FactoredElement word;
        double sc = 1.0;
        auto coef = [&] {
          AlgebraElement x = a.random(rng);
          sc *= x.norm();
          word.push_back(s.left(x));
        };
        for (int j = 0; j < k; ++j) {
          coef();
          word.push_back(l);
        }
        coef();
        for (int j = 0; j < m; ++j) {
          word.push_back(ls);
          coef();
        }
        alpha = std::max(alpha, s.psi_vector(apply_factors(word, vac)).norm() / sc);
      }
    }
  rep.check("creation words have zero expectation", "psi(a_1 L ... a_k L a'_1 L* ... L* a'_{l+1}) = 0, k + l > 0",
            alpha, kDefaultTol);

  // (beta)
  const Matrix cols = domain_probe(s.fock(), n - 1);
  double beta = 0.0;
  for (int t = 0; t < samples; ++t) {
    AlgebraElement x = a.random(rng);
    FockOperator fx = s.left(x), fe = s.left(s.eta()(s.phi()(x)));
    beta = std::max(beta, (chain(cols, {&ls, &fx, &l}) - chain(cols, {&fe})).norm() / x.norm());
  }
  rep.check("L is an eta-creation operator over D", "L* a L = eta(psi(a))", beta, kDefaultTol, "levels <= N - 1");

  // words d_0 L^e_1 d_1 (L^e_2 d_2) against A
  std::vector<FactoredElement> pool_l, pool_a;
  std::bernoulli_distribution coin(0.5);
  auto rand_d = [&] { return s.left(s.d(s.b().random(rng), s.b().random(rng))); };
  int raise = 0;
  for (int t = 0; t < samples; ++t) {
    const int letters = 1 + (t % 2);
    FactoredElement x{rand_d()};
    int r = 0;
    for (int j = 0; j < letters; ++j) {
      bool c = coin(rng);
      x.push_back(c ? l : ls);
      x.push_back(rand_d());
      r += c ? 1 : 0;
    }
    raise = std::max(raise, r);
    pool_l.push_back(std::move(x));
    pool_a.push_back({s.left(a.random(rng))});
  }
  int len = max_length;
  while (len > 1 && raise * ((len + 1) / 2) > n) --len;
  std::vector<MomentFamily> fam{{"L", pool_l, raise}, {"A", pool_a, 0}};
  rep.merge(freeness_check(s.fock(), fam, s.phi_map(), len, rng, samples, "{L, L*} and A are free over D"), "LA");
  rep.data()["word_length"] = len;
  return rep;
}

VerificationReport nonfree_control(const AmalgSetup& s, Rng& rng) {
  const int iota = s.a(1).dimension() > s.b().dimension() ? 1 : 2;
  if (s.a(iota).dimension() == s.b().dimension()) throw PreconditionError("A = D: no non-free pair to test");
  std::vector<FactoredElement> pool;
  for (int t = 0; t < 3; ++t) {
    AlgebraElement c = s.random_centered(iota, rng);
    AlgebraElement x = iota == 1 ? s.first(c) : s.second(c);
    pool.push_back({s.left(x * x.adjoint())});
  }
  std::vector<MomentFamily> fam{{"A", pool, 0}, {"A'", pool, 0}};
  VerificationReport rep = freeness_check(s.fock(), fam, s.phi_map(), 2, rng, 4, "A_iota is free from itself over D");
  rep.data()["negative_control"] = true;
  rep.data()["iota"] = iota;
  return rep;
}

}  // namespace pimsner
