#include "pimsner/bogoliubov.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace pimsner {

namespace {

std::size_t z(int i) { return static_cast<std::size_t>(i); }

double relative(const Matrix& a, const Matrix& b) {
  const double s = std::max({a.norm(), b.norm(), 1e-300});
  return (a - b).norm() / s;
}

// Worst residual per check name across several reports, in first-seen order.
void merge_worst(VerificationReport& dst, const std::vector<VerificationReport>& reps, const std::string& note) {
  std::vector<std::string> order;
  std::map<std::string, CheckResult> worst;
  for (const auto& r : reps)
    for (const auto& c : r.checks()) {
      auto it = worst.find(c.name);
      if (it == worst.end()) {
        order.push_back(c.name);
        worst.emplace(c.name, c);
      } else {
        if (c.status != CheckStatus::pass) it->second.status = c.status;
        it->second.residual = std::max(it->second.residual, c.residual);
      }
    }
  for (const auto& name : order) {
    const CheckResult& c = worst.at(name);
    if (c.status == CheckStatus::precondition) dst.precondition(c.name, c.anchor, c.note);
    else if (c.status == CheckStatus::skipped) dst.skipped(c.name, c.anchor, c.note);
    else dst.check(c.name, c.anchor, c.residual, c.threshold, note.empty() ? c.note : note);
  }
}

Matrix ipow(const Matrix& u, int j) {
  Matrix out = Matrix::Identity(u.rows(), u.cols());
  for (int i = 0; i < j; ++i) out = u * out;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Bogoliubov maps

VerificationReport validate_bogoliubov(const BogoliubovMap& m) {
  const HilbertBimodule& h = m.h;
  const CStarAlgebra& b = h.base();
  const int d = h.dimension();
  if (m.u.rows() != d || m.u.cols() != d) throw StructuralError("U must be a square matrix on the module coordinates");
  if (!(m.beta.algebra() == b)) throw StructuralError("beta acts on another algebra");
  VerificationReport rep("bogoliubov");
  rep.parameters()["module_dimension"] = d;

  std::vector<Vector> e, ue;
  for (int i = 0; i < d; ++i) {
    e.push_back(h.unit_vector(i));
    ue.push_back(m.u * e.back());
  }
  double inner = 0.0, left = 0.0, right = 0.0;
  Matrix spans(b.dimension(), static_cast<Index>(d) * d);
  Index col = 0;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      AlgebraElement g = h.inner(e[z(i)], e[z(j)]);
      spans.col(col++) = g.flat();
      inner = std::max(inner, distance(h.inner(ue[z(i)], ue[z(j)]), m.beta(g)));
    }
  for (const auto& x : b.basis()) {
    AlgebraElement bx = m.beta(x);
    for (int i = 0; i < d; ++i) {
      left = std::max(left, (m.u * h.left_act(x, e[z(i)]) - h.left_act(bx, ue[z(i)])).norm());
      right = std::max(right, (m.u * h.right_act(e[z(i)], x) - h.right_act(ue[z(i)], bx)).norm());
    }
  }
  rep.check("inner products twisted by beta", "<U h1, U h2> = beta(<h1, h2>)", inner, kDefaultTol);
  rep.check("left action twisted by beta", "U(b h) = beta(b) U(h)", left, kDefaultTol);
  rep.check("right action twisted by beta", "U(h b) = U(h) beta(b)", right, kDefaultTol);
  rep.check_true("inner products generate B", "span <H, H> = B",
                 d > 0 && numerical_rank(spans) == static_cast<Index>(b.dimension()),
                 "beta is determined by U only when this holds");
  return rep;
}

BogoliubovMap make_bogoliubov(HilbertBimodule h, Matrix u, AlgebraAutomorphism beta) {
  BogoliubovMap m{std::move(h), std::move(u), std::move(beta)};
  VerificationReport rep = validate_bogoliubov(m);
  if (!rep.passed()) throw ValidationError("U is not a Bogoliubov map for the given beta", rep);
  return m;
}

AugmentedBogoliubov augment_bogoliubov(const BogoliubovMap& m) {
  Augmented a = augment(m.h);
  const DirectSum& s = a.sum;
  Matrix ut = s.embed_first * m.u * s.embed_first.adjoint() +
              s.embed_second * m.beta.flat_matrix() * s.embed_second.adjoint();
  return {BogoliubovMap{s.module, std::move(ut), m.beta}, a.xi, s.embed_first};
}

BogoliubovMap permutation_twist(const HilbertBimodule& h, const AlgebraAutomorphism& beta, Rng& rng) {
  const CStarAlgebra& b = h.base();
  const int nb = b.block_count();
  for (int j = 0; j < nb; ++j)
    if (b.block_size(j) != 1) throw PreconditionError("permutation twists need one-dimensional blocks");
  const auto& perm = beta.permutation();
  std::vector<int> inv(z(nb));
  for (int j = 0; j < nb; ++j) inv[z(perm[z(j)])] = j;
  for (int j = 0; j < nb; ++j)
    for (int k = 0; k < nb; ++k)
      if (h.left_multiplicity(inv[z(j)], inv[z(k)]) != h.left_multiplicity(j, k))
        throw PreconditionError("left multiplicities are not invariant under the block permutation");
  // in coordinates where the left action is diagonal
  const int d = h.dimension();
  Matrix t = Matrix::Zero(d, d);
  for (int j = 0; j < nb; ++j)
    for (int k = 0; k < nb; ++k) {
      const int c = h.left_multiplicity(j, k);
      if (c == 0) continue;
      Matrix w = random_unitary(c, rng);
      const int src = h.component_offset(j) + h.segment_offset(j, k);
      const int dst = h.component_offset(inv[z(j)]) + h.segment_offset(inv[z(j)], inv[z(k)]);
      t.block(dst, src, c, c) = w;
    }
  Matrix rot = h.rotation_adjoint();
  return make_bogoliubov(h, rot.adjoint() * t * rot, beta);
}

// ---------------------------------------------------------------------------
// Fock extension

FockExtension fock_extension(const FockPtr& f, const BogoliubovMap& m, const Vector* xi) {
  if (!(f->module() == m.h)) throw StructuralError("Fock space is built over another module");
  VerificationReport valid = validate_bogoliubov(m);
  if (!valid.passed()) throw ValidationError("U is not a validated Bogoliubov map", valid);
  const int n = f->truncation();
  const int d = m.h.dimension();
  FockExtension out{FockOperator(f), VerificationReport("fock_extension")};
  VerificationReport& rep = out.report;
  rep.parameters()["truncation"] = n;

  std::vector<Matrix> lv{m.beta.flat_matrix()};
  if (n >= 1) lv.push_back(m.u);
  double fit = 0.0;
  for (int k = 1; k < n; ++k) {
    const InteriorTensor& t = f->tensor(k);
    const int dk = f->level_dimension(k), dn = f->level_dimension(k + 1);
    Matrix x(dn, static_cast<Index>(d) * dk), y(dn, static_cast<Index>(d) * dk);
    for (int i = 0; i < d; ++i) {
      Vector e = m.h.unit_vector(i);
      x.middleCols(static_cast<Index>(i) * dk, dk) = t.left_factor_matrix(e);
      y.middleCols(static_cast<Index>(i) * dk, dk) = t.left_factor_matrix(m.u * e) * lv[z(k)];
    }
    // M X = Y with X of full row rank
    Eigen::LLT<Matrix> llt(x * x.adjoint());
    Matrix mk = llt.solve(x * y.adjoint()).adjoint();
    fit = std::max(fit, (mk * x - y).norm() / std::max(1.0, y.norm()));
    lv.push_back(std::move(mk));
  }
  for (int k = 0; k <= n; ++k) out.op.add_block(k, k, lv[z(k)]);
  rep.check("F(U) is well defined on tensor powers", "F(U)(h (x) y) = U h (x) F(U) y", fit, kDefaultTol,
            "least-squares fit on elementary tensors");

  const FockOperator& fu = out.op;
  double cre = 0.0, ann = 0.0;
  for (int i = 0; i < d; ++i) {
    Vector e = m.h.unit_vector(i);
    FockOperator l = FockOperator::creation(f, e), lu = FockOperator::creation(f, m.u * e);
    cre = std::max(cre, (fu * l - lu * fu).frobenius());
    ann = std::max(ann, (fu * l.adjoint() - lu.adjoint() * fu).frobenius());
  }
  rep.check("F(U) intertwines creation", "E(U)(l(h)) = l(Uh): F(U) l(h) = l(Uh) F(U)", cre, kDefaultTol,
            "basis vectors h");
  rep.check("F(U) intertwines annihilation", "F(U) l(h)* = l(Uh)* F(U)", ann, kDefaultTol, "basis vectors h");
  double la = 0.0, ra = 0.0;
  for (const auto& x : m.h.base().basis()) {
    AlgebraElement bx = m.beta(x);
    la = std::max(la, (fu * FockOperator::left(f, x) - FockOperator::left(f, bx) * fu).frobenius());
    ra = std::max(ra, (fu * FockOperator::right(f, x) - FockOperator::right(f, bx) * fu).frobenius());
  }
  rep.check("F(U) twists the left action", "E(U)(b) = beta(b)", la, kDefaultTol);
  rep.check("F(U) twists the right action", "F(U)(y b) = F(U)(y) beta(b)", ra, kDefaultTol);
  if (xi) {
    rep.check("U fixes xi", "U~(xi) = xi", (m.u * *xi - *xi).norm(), kDefaultTol);
    FockOperator l = FockOperator::creation(f, *xi);
    rep.check("F(U) commutes with L", "E(U~) L = L", (fu * l - l * fu).frobenius(), kDefaultTol);
  }
  return out;
}

// ---------------------------------------------------------------------------
// K_p

KpSubspace kp_subspace(const HilbertBimodule& h, const std::vector<Vector>& k_generators, const Matrix& u, int p) {
  if (p < 1) throw PreconditionError("p must be at least 1");
  if (u.rows() != h.dimension() || u.cols() != h.dimension()) throw StructuralError("U does not act on H");
  for (const auto& g : k_generators)
    if (g.size() != h.dimension()) throw StructuralError("generator is not a vector of H");
  std::vector<Vector> base = bimodule_generators(h, k_generators), gens;
  Matrix ui = Matrix::Identity(h.dimension(), h.dimension());
  for (int i = 0; i < p; ++i) {
    for (const auto& g : base) gens.push_back(ui * g);
    ui = u * ui;
  }
  KpSubspace out{p, submodule_projection(h, gens), 0, VerificationReport("kp_subspace")};
  out.dimension = out.span.complex_dimension();
  const int dim_k = p == 1 ? out.dimension : submodule_projection(h, base).complex_dimension();
  VerificationReport& rep = out.report;
  rep.parameters()["p"] = p;
  const Matrix comp = Matrix::Identity(h.dimension(), h.dimension()) - out.span.projection;
  double gen = 0.0, inv = 0.0;
  for (const auto& g : gens) gen = std::max(gen, (comp * g).norm() / std::max(g.norm(), 1e-300));
  for (const auto& v : out.span.basis)
    for (const auto& x : h.base().basis()) {
      inv = std::max(inv, (comp * h.left_act(x, v)).norm());
      inv = std::max(inv, (comp * h.right_act(v, x)).norm());
    }
  rep.check("K_p contains U^i K for i < p", "K_p = K + U K + ... + U^{p-1} K", gen, kDefaultTol);
  rep.check("K_p is a sub-bimodule", "B K_p B = K_p", inv, kDefaultTol);
  rep.check_true("K_p dimension bound", "dim_C(K_p) <= p dim_C(K)", out.dimension <= p * dim_k,
                 std::to_string(out.dimension) + " <= " + std::to_string(p) + " * " + std::to_string(dim_k));
  rep.data()["dim_k"] = dim_k;
  rep.data()["dim_kp"] = out.dimension;
  return out;
}

// ---------------------------------------------------------------------------
// compressions

CompressionChannels::CompressionChannels(FockPtr f, int n, FockOperator q, std::vector<Matrix> level_bases)
    : f_(std::move(f)), n_(n), q_(std::move(q)), pn_(FockOperator::lower_projection(f_, n)),
      bases_(std::move(level_bases)) {}

int CompressionChannels::level_localized_dimension(int k) const {
  const Matrix& b = level_basis(k);
  return localized_dimension(f_->level(k), b * b.adjoint());
}

FockOperator CompressionChannels::upsilon(const FockOperator& y) const {
  return q_ * y * q_ + FockOperator::left(f_, vacuum_expectation(y)) * (pn_ - q_);
}

CompressionResult compression_channels(const FockPtr& f, int n, const SubmoduleSpan& kp, Rng& rng, int samples) {
  if (n < 1 || n > f->truncation()) throw PreconditionError("compression level n must satisfy 1 <= n <= N");
  if (!(kp.parent == f->module())) throw StructuralError("K_p lives in another module");
  const CStarAlgebra& b = f->base();

  std::vector<Matrix> bases{Matrix::Identity(b.dimension(), b.dimension())};
  std::vector<Matrix> projections{bases[0]};
  const Matrix k1 = orthonormal_range(kp.projection);
  for (int k = 1; k <= n; ++k) {
    std::vector<Vector> gens;
    if (k == 1) {
      for (Index c = 0; c < k1.cols(); ++c) gens.push_back(k1.col(c));
    } else {
      const InteriorTensor& t = f->tensor(k - 1);
      for (Index c = 0; c < k1.cols(); ++c) {
        Matrix lf = t.left_factor_matrix(k1.col(c)) * bases[z(k - 1)];
        for (Index j = 0; j < lf.cols(); ++j) gens.push_back(lf.col(j));
      }
    }
    SubmoduleSpan s = submodule_projection(f->level(k), gens);
    projections.push_back(s.projection);
    bases.push_back(orthonormal_range(s.projection));
  }
  FockOperator q(f);
  for (int k = 0; k <= n; ++k) q.add_block(k, k, projections[z(k)]);
  CompressionResult out{CompressionChannels(f, n, q, bases), VerificationReport("compression")};
  const CompressionChannels& ch = out.channels;
  VerificationReport& rep = out.report;
  rep.parameters()["n"] = n;
  const FockOperator& pn = ch.pn();

  rep.check("Q is a projection", "Q^2 = Q = Q*", std::max((q * q - q).frobenius(), (q - q.adjoint()).frobenius()),
            kDefaultTol);
  double lc = 0.0, rc = 0.0;
  for (const auto& x : b.basis()) {
    FockOperator l = FockOperator::left(f, x), r = FockOperator::right(f, x);
    lc = std::max(lc, (q * l - l * q).frobenius());
    rc = std::max(rc, (q * r - r * q).frobenius());
  }
  rep.check("Q commutes with the left action of B", "Q b = b Q", lc, kDefaultTol);
  rep.check("Q is right B-linear", "Q(y b) = Q(y) b", rc, kDefaultTol);

  double ann = 0.0, literal = 0.0;
  for (Index c = 0; c < k1.cols(); ++c) {
    FockOperator ls = FockOperator::annihilation(f, k1.col(c));
    ann = std::max(ann, (q * ls * (pn - q)).restricted_frobenius(n));
    literal = std::max(literal, (ls * (pn - q)).restricted_frobenius(n));
  }
  rep.check("annihilation by K_p preserves the complement", "Q l(h)* (1 - Q) = 0 for h in K_p", ann, kDefaultTol,
            "levels <= n");
  rep.data()["literal_annihilation_residual"] = literal;
  rep.data()["literal_annihilation_note"] =
      "l(h)* (1 - Q) itself is nonzero on mixed tensors; only the compressed form vanishes";
  rep.check("Upsilon is unital", "Upsilon(1) = Q + V* Q V (1 - Q) = 1", (ch.upsilon(q) - pn).frobenius(), kDefaultTol);

  // words of Omega(n, K_p) on vectors of F_{n-1}(K_p)
  std::normal_distribution<double> nd;
  auto random_kp = [&] {
    Vector c(k1.cols());
    for (Index i = 0; i < c.size(); ++i) c(i) = cplx(nd(rng), nd(rng));
    return Vector(k1 * c);
  };
  double theta_res = 0.0, ups_res = 0.0, stay = 0.0;
  const Matrix low = f->domain_columns(n - 1);
  for (int s = 0; s < samples; ++s) {
    for (int m = 0; m <= n; ++m) {
      FockOperator x(f);
      double scale = 1.0;
      if (m == 0) {
        AlgebraElement bb = b.random(rng);
        x = FockOperator::left(f, bb);
        scale = bb.norm();
      } else {
        if (k1.cols() == 0) continue;
        std::vector<Vector> cr, an;
        for (int i = 0; i < m; ++i) {
          cr.push_back(random_kp());
          an.push_back(random_kp());
          scale *= cr.back().norm() * an.back().norm();
        }
        x = word(f, normal_word(b, cr, an));
      }
      Vector g = low * Vector(random_matrix(low.cols(), 1, rng).col(0));
      Vector v = q.apply(g);
      if (v.norm() < 1e-12) continue;
      v /= v.norm();
      Vector xv = x.apply(v);
      FockOperator y = ch.theta(ch.phi_n(x));
      theta_res = std::max(theta_res, (y.apply(v) - xv).norm() / scale);
      ups_res = std::max(ups_res, (ch.upsilon(y).apply(v) - xv).norm() / scale);
      stay = std::max(stay, ((pn - q).apply(xv)).norm() / scale);
    }
  }
  rep.check("words of Omega(n, K_p) preserve F_n(K_p)", "x F_{n-1}(K_p) in F_n(K_p)", stay, kDefaultTol);
  rep.check("compression reconstructs words", "Theta(Phi_n(x)) v = x v on F_{n-1}(K_p)", theta_res, kDefaultTol);
  rep.check("Upsilon o Theta o Phi_n reconstructs words", "Upsilon(Theta(Phi_n(x))) v = x v on F_{n-1}(K_p)", ups_res,
            kDefaultTol);
  std::vector<int> dims;
  for (int k = 0; k <= n; ++k) dims.push_back(ch.level_localized_dimension(k));
  rep.data()["level_localized_dimensions"] = dims;
  return out;
}

// ---------------------------------------------------------------------------
// entropy bound

double entropy_bound(int n, int p, int dim_v, int dim_k) {
  return n * std::pow(static_cast<double>(p), n) * dim_v * std::pow(static_cast<double>(dim_k), n);
}

EntropyBoundReport entropy_bound_report(const FockPtr& f, const BogoliubovMap& m,
                                        const std::vector<Vector>& k_generators, int n, int p_max, Rng& rng,
                                        int samples) {
  if (n < 1 || n > f->truncation()) throw PreconditionError("n must satisfy 1 <= n <= N");
  if (p_max < 1) throw PreconditionError("p_max must be at least 1");
  if (!(f->module() == m.h)) throw StructuralError("Fock space is built over another module");
  const HilbertBimodule& h = m.h;
  const CStarAlgebra& b = h.base();

  EntropyBoundReport out;
  out.n = n;
  out.p_max = p_max;
  out.dim_v = b.rep_dimension();
  out.report = VerificationReport("entropy_bound");
  VerificationReport& rep = out.report;
  rep.parameters()["n"] = n;
  rep.parameters()["p_max"] = p_max;

  FockExtension fe = fock_extension(f, m);
  rep.merge(fe.report, "extension");
  KpSubspace k = kp_subspace(h, k_generators, m.u, 1);
  out.dim_k = k.dimension;
  const Matrix kb = orthonormal_range(k.span.projection);

  // sampled omega in Omega(n, K)
  std::normal_distribution<double> nd;
  auto random_k = [&] {
    Vector c(kb.cols());
    for (Index i = 0; i < c.size(); ++i) c(i) = cplx(nd(rng), nd(rng));
    return Vector(kb * c);
  };
  struct Omega {
    std::vector<Vector> cr, an;
  };
  std::vector<Omega> omega;
  for (int s = 0; s < samples && kb.cols() > 0; ++s) {
    Omega w;
    const int len = 1 + s % n;
    for (int i = 0; i < len; ++i) {
      w.cr.push_back(random_k());
      w.an.push_back(random_k());
    }
    omega.push_back(std::move(w));
  }

  std::vector<VerificationReport> kp_reports, comp_reports;
  double containment = 0.0, gamma = 0.0, worst_bound = 0.0, worst_crude = 0.0;
  Matrix fj = Matrix::Identity(f->dimension(), f->dimension());
  FockOperator fjop = FockOperator::identity(f);
  for (int p = 1; p <= p_max; ++p) {
    KpSubspace kp = kp_subspace(h, k_generators, m.u, p);
    CompressionResult cr = compression_channels(f, n, kp.span, rng, 2);
    EntropyRow row;
    row.p = p;
    row.dim_kp = kp.dimension;
    for (int lvl = 0; lvl <= n; ++lvl) row.measured += cr.channels.level_localized_dimension(lvl);
    double sum = 0.0;
    for (int lvl = 0; lvl <= n; ++lvl) sum += std::pow(static_cast<double>(kp.dimension), lvl);
    row.crude_bound = out.dim_v * sum;
    row.bound = entropy_bound(n, p, out.dim_v, out.dim_k);
    row.ratio = std::log(static_cast<double>(row.measured)) / p;
    worst_bound = std::max(worst_bound, row.measured / row.bound);
    worst_crude = std::max(worst_crude, row.measured / row.crude_bound);

    // gamma^{p-1}(omega) in Omega(n, K_p)
    const int j = p - 1;
    const Matrix uj = ipow(m.u, j);
    const Matrix comp = Matrix::Identity(h.dimension(), h.dimension()) - kp.span.projection;
    for (const auto& w : omega) {
      std::vector<Vector> cr2, an2;
      for (const auto& v : w.cr) {
        cr2.push_back(uj * v);
        containment = std::max(containment, (comp * cr2.back()).norm() / v.norm());
      }
      for (const auto& v : w.an) {
        an2.push_back(uj * v);
        containment = std::max(containment, (comp * an2.back()).norm() / v.norm());
      }
      FockOperator x = word(f, normal_word(b, w.cr, w.an)), gx = word(f, normal_word(b, cr2, an2));
      gamma = std::max(gamma, relative((fjop * x).dense(), (gx * fjop).dense()));
    }
    fjop = fe.op * fjop;

    kp_reports.push_back(kp.report);
    comp_reports.push_back(cr.report);
    out.rows.push_back(row);
  }
  merge_worst(rep, kp_reports, "worst over p");
  merge_worst(rep, comp_reports, "worst over p");
  rep.check("gamma^j(omega) lies in Omega(n, K_p)", "omega u gamma(omega) u ... u gamma^{p-1}(omega) in Omega(n, K_p)",
            containment, kDefaultTol, "letters projected into K_p");
  rep.check("gamma^j acts on words through F(U)^j", "F(U)^j x = gamma^j(x) F(U)^j", gamma, kDefaultTol);
  rep.check("measured dimension within the crude bound", "dim(F_n(K_p) (x)_B V) <= dim(V) sum_k dim_C(K_p)^k",
            worst_crude, 1.0, "max ratio measured / bound");
  rep.check("measured dimension within the stated bound", "dim(F_n(K_p) (x)_B V) <= n p^n dim(V) dim_C(K)^n",
            worst_bound, 1.0, "max ratio measured / bound");

  for (std::size_t i = 0; i + 1 < out.rows.size(); ++i)
    if (out.rows[i].dim_kp == out.rows[i + 1].dim_kp) {
      out.saturation = out.rows[i].p;
      break;
    }
  if (out.saturation == 0) {
    rep.skipped("log-dim/p non-increasing past saturation", "log dim / p decreasing once K_p = K_{p+1}",
                "K_p did not saturate for p <= p_max");
  } else {
    double inc = 0.0;
    for (std::size_t i = z(out.saturation - 1); i + 1 < out.rows.size(); ++i)
      inc = std::max(inc, out.rows[i + 1].ratio - out.rows[i].ratio);
    rep.check("log-dim/p non-increasing past saturation", "log dim / p decreasing once K_p = K_{p+1}", inc, 0.0,
              "saturation at p = " + std::to_string(out.saturation));
  }

  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  for (const auto& r : out.rows)
    table.push_back({{"p", r.p},
                     {"dim_Kp", r.dim_kp},
                     {"dim_FnKp_V", r.measured},
                     {"crude_bound", r.crude_bound},
                     {"bound", r.bound},
                     {"log_dim_over_p", r.ratio}});
  rep.data()["dim_K"] = out.dim_k;
  rep.data()["dim_V"] = out.dim_v;
  rep.data()["saturation"] = out.saturation;
  rep.data()["growth"] = table;
  return out;
}

}  // namespace pimsner
