#include "pimsner/crossed.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

namespace pimsner {

namespace {

std::size_t z(int i) { return static_cast<std::size_t>(i); }

Matrix kron_identity(int n, const Matrix& m) {
  Matrix out = Matrix::Zero(n * m.rows(), n * m.cols());
  for (int i = 0; i < n; ++i) out.block(i * m.rows(), i * m.cols(), m.rows(), m.cols()) = m;
  return out;
}

// sigma^-1 on block-diagonal matrices; rejects anything outside sigma(A).
AlgebraElement from_representation(const CStarAlgebra& a, const Matrix& m) {
  std::vector<Matrix> blocks;
  int off = 0;
  Matrix rest = m;
  for (int j = 0; j < a.block_count(); ++j) {
    const int n = a.block_size(j);
    blocks.push_back(m.block(off, off, n, n));
    rest.block(off, off, n, n).setZero();
    off += n;
  }
  if (rest.norm() > kDefaultTol * std::max(1.0, m.norm()))
    throw StructuralError("matrix does not lie in the defining representation");
  return {a, std::move(blocks)};
}

const std::array<std::array<int, 3>, 6> kS3 = {{{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

}  // namespace

// ---------------------------------------------------------------------------
// groups

GroupTable::GroupTable(std::vector<std::vector<int>> mult, int identity) : mult_(std::move(mult)), e_(identity) {
  const int n = order();
  if (n == 0) throw StructuralError("group table is empty");
  if (e_ < 0 || e_ >= n) throw StructuralError("identity index out of range");
  for (const auto& row : mult_) {
    if (static_cast<int>(row.size()) != n) throw StructuralError("group table is not square");
    std::vector<int> seen(z(n), 0);
    for (int x : row) {
      if (x < 0 || x >= n) throw StructuralError("group table entry out of range");
      if (seen[z(x)]++) throw StructuralError("group table row is not a permutation");
    }
  }
  for (int g = 0; g < n; ++g)
    if (this->mult(e_, g) != g || this->mult(g, e_) != g) throw StructuralError("identity element does not act trivially");
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h)
      for (int k = 0; k < n; ++k)
        if (this->mult(this->mult(g, h), k) != this->mult(g, this->mult(h, k)))
          throw StructuralError("group table is not associative");
  inv_.assign(z(n), -1);
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h)
      if (this->mult(g, h) == e_ && this->mult(h, g) == e_) inv_[z(g)] = h;
  for (int g = 0; g < n; ++g)
    if (inv_[z(g)] < 0) throw StructuralError("group element without inverse");
}

GroupTable GroupTable::cyclic(int n) {
  if (n < 1) throw StructuralError("cyclic group order must be >= 1");
  std::vector<std::vector<int>> t(z(n), std::vector<int>(z(n)));
  for (int g = 0; g < n; ++g)
    for (int h = 0; h < n; ++h) t[z(g)][z(h)] = (g + h) % n;
  return GroupTable(std::move(t), 0);
}

GroupTable GroupTable::symmetric3() {
  std::vector<std::vector<int>> t(6, std::vector<int>(6));
  for (int g = 0; g < 6; ++g)
    for (int h = 0; h < 6; ++h) {
      std::array<int, 3> gh{};
      for (int i = 0; i < 3; ++i) gh[z(i)] = kS3[z(g)][z(kS3[z(h)][z(i)])];
      t[z(g)][z(h)] = static_cast<int>(std::find(kS3.begin(), kS3.end(), gh) - kS3.begin());
    }
  return GroupTable(std::move(t), 0);
}

std::vector<int> GroupTable::permutation(int g) {
  const auto& p = kS3.at(z(g));
  return {p[0], p[1], p[2]};
}

double action_defect(const GroupAction& act) {
  const auto& g = act.group;
  double d = automorphism_distance(act.alpha[z(g.identity())], AlgebraAutomorphism::identity(act.alpha[0].algebra()));
  for (int x = 0; x < g.order(); ++x)
    for (int y = 0; y < g.order(); ++y)
      d = std::max(d, automorphism_distance(compose(act.alpha[z(x)], act.alpha[z(y)]), act.alpha[z(g.mult(x, y))]));
  return d;
}

GroupAction permutation_action(const CStarAlgebra& a, const GroupTable& g,
                               const std::vector<std::vector<int>>& images) {
  if (static_cast<int>(images.size()) != g.order()) throw StructuralError("one block map per group element is required");
  GroupAction act{g, {}};
  for (int x = 0; x < g.order(); ++x) {
    const auto& inv = images[z(g.inverse(x))];
    if (static_cast<int>(inv.size()) != a.block_count()) throw StructuralError("block map has the wrong length");
    act.alpha.emplace_back(a, inv);
  }
  return act;
}

// ---------------------------------------------------------------------------
// crossed product

CrossedProduct::CrossedProduct(CStarAlgebra a, GroupAction action) : a_(std::move(a)), act_(std::move(action)) {
  if (static_cast<int>(act_.alpha.size()) != act_.group.order())
    throw StructuralError("one automorphism per group element is required");
  for (const auto& al : act_.alpha)
    if (!(al.algebra() == a_)) throw StructuralError("action automorphism lives on another algebra");
  if (action_defect(act_) > kDefaultTol) throw StructuralError("alpha is not a homomorphism into Aut(A)");
}

Matrix CrossedProduct::pi(const AlgebraElement& a) const {
  const int dv = a_.rep_dimension(), n = group().order();
  Matrix m = Matrix::Zero(n * dv, n * dv);
  for (int h = 0; h < n; ++h) m.block(h * dv, h * dv, dv, dv) = act_.alpha[z(group().inverse(h))](a).block_diagonal();
  return m;
}

Matrix CrossedProduct::lambda(int g) const {
  const int dv = a_.rep_dimension(), n = group().order();
  Matrix m = Matrix::Zero(n * dv, n * dv);
  for (int k = 0; k < n; ++k) m.block(group().mult(g, k) * dv, k * dv, dv, dv).setIdentity();
  return m;
}

int CrossedProduct::algebra_dimension() const {
  auto basis = a_.basis();
  const int n = group().order();
  Matrix rows(static_cast<Index>(basis.size()) * n, static_cast<Index>(dimension()) * dimension());
  Index r = 0;
  for (int g = 0; g < n; ++g) {
    Matrix lg = lambda(g);
    for (const auto& e : basis) rows.row(r++) = (pi(e) * lg).reshaped().transpose();
  }
  return static_cast<int>(numerical_rank(rows, 1e-10));
}

VerificationReport validate_crossed_product(const CrossedProduct& c) {
  VerificationReport rep("crossed_product");
  const auto& g = c.group();
  const auto& a = c.algebra();
  rep.parameters()["group_order"] = g.order();
  rep.parameters()["algebra_blocks"] = a.blocks();
  double cov = 0.0, literal = 0.0, unit = 0.0, hom = 0.0;
  std::vector<Matrix> lam;
  for (int x = 0; x < g.order(); ++x) lam.push_back(c.lambda(x));
  for (const auto& e : a.basis()) {
    Matrix pe = c.pi(e);
    for (int x = 0; x < g.order(); ++x) {
      Matrix lhs = lam[z(g.inverse(x))] * pe * lam[z(x)];
      cov = std::max(cov, (lhs - c.pi(c.action().alpha[z(g.inverse(x))](e))).norm());
      literal = std::max(literal, (lhs - c.pi(c.action().alpha[z(x)](e))).norm());
    }
  }
  const int d = c.dimension();
  for (int x = 0; x < g.order(); ++x) {
    unit = std::max(unit, (lam[z(x)].adjoint() * lam[z(x)] - Matrix::Identity(d, d)).norm());
    for (int y = 0; y < g.order(); ++y) hom = std::max(hom, (lam[z(x)] * lam[z(y)] - lam[z(g.mult(x, y))]).norm());
  }
  rep.check("covariance", "lambda_g pi(a) lambda_g* = pi(alpha_g(a))", cov, kDefaultTol,
            "equivalently lambda_{g^-1} pi(a) lambda_g = pi(alpha_{g^-1}(a))");
  rep.data()["covariance_with_alpha_g_on_the_right"] = literal;
  rep.check("lambda unitary", "lambda_g* lambda_g = 1", unit, 1e-12);
  rep.check("lambda representation", "lambda_g lambda_h = lambda_gh", hom, 1e-12);

  Rng rng(1);
  double pih = 0.0;
  for (int s = 0; s < 6; ++s) {
    auto x = a.random(rng), y = a.random(rng);
    pih = std::max(pih, (c.pi(x * y) - c.pi(x) * c.pi(y)).norm() / (x.norm() * y.norm()));
    pih = std::max(pih, (c.pi(x.adjoint()) - c.pi(x).adjoint()).norm() / x.norm());
  }
  rep.check("pi is a *-representation", "pi(ab) = pi(a) pi(b), pi(a*) = pi(a)*", pih, kDefaultTol);
  rep.data()["algebra_dimension"] = c.algebra_dimension();
  rep.data()["hilbert_space_dimension"] = d;
  return rep;
}

// ---------------------------------------------------------------------------
// lifted automorphisms

LiftedAutomorphism::LiftedAutomorphism(const CrossedProduct& c, AlgebraAutomorphism beta)
    : beta_(std::move(beta)), w_(kron_identity(c.group().order(), beta_.spatial_implementation())) {}

LiftedAutomorphism lift_automorphism(const CrossedProduct& c, const AlgebraAutomorphism& beta) {
  if (!(beta.algebra() == c.algebra())) throw StructuralError("beta lives on another algebra");
  for (int g = 0; g < c.group().order(); ++g) {
    const auto& al = c.action().alpha[z(g)];
    if (automorphism_distance(compose(beta, al), compose(al, beta)) > kDefaultTol)
      throw PreconditionError("beta does not commute with alpha_g for g = " + std::to_string(g));
  }
  return LiftedAutomorphism(c, beta);
}

VerificationReport lift_check(const CrossedProduct& c, const LiftedAutomorphism& bhat, Rng& rng, int samples) {
  VerificationReport rep("lifted_automorphism");
  const auto& a = c.algebra();
  const auto& g = c.group();
  std::vector<Matrix> lam;
  for (int x = 0; x < g.order(); ++x) lam.push_back(c.lambda(x));
  double words = 0.0;
  for (const auto& e : a.basis())
    for (int x = 0; x < g.order(); ++x)
      words = std::max(words, (bhat(c.pi(e) * lam[z(x)]) - c.pi(bhat.base()(e)) * lam[z(x)]).norm());
  rep.check("beta-hat on spanning words", "beta^(pi(a) lambda_g) = pi(beta(a)) lambda_g", words, kDefaultTol);

  auto random_element = [&]() {
    Matrix m = Matrix::Zero(c.dimension(), c.dimension());
    for (int x = 0; x < g.order(); ++x) m += c.pi(a.random(rng)) * lam[z(x)];
    return m;
  };
  double mult = 0.0, star = 0.0;
  for (int s = 0; s < samples; ++s) {
    Matrix x = random_element(), y = random_element();
    double sc = operator_norm(x) * operator_norm(y);
    mult = std::max(mult, (bhat(x * y) - bhat(x) * bhat(y)).norm() / sc);
    star = std::max(star, (bhat(x.adjoint()) - bhat(x).adjoint()).norm() / operator_norm(x));
  }
  rep.check("beta-hat multiplicative", "beta^(xy) = beta^(x) beta^(y)", mult, kDefaultTol, "sampled span elements");
  rep.check("beta-hat preserves adjoints", "beta^(x*) = beta^(x)*", star, kDefaultTol);
  const Matrix& w = bhat.implementation();
  rep.check("implementing operator unitary", "(1 (x) V)* (1 (x) V) = 1",
            (w.adjoint() * w - Matrix::Identity(w.rows(), w.cols())).norm(), 1e-12);
  return rep;
}

// ---------------------------------------------------------------------------
// Folner averaging

Matrix folner_channel(const CrossedProduct& c, const std::vector<int>& f, const CPLinearMap& m,
                      const AlgebraElement& a, int g) {
  if (f.empty()) throw StructuralError("Folner set must be nonempty");
  const auto& A = c.algebra();
  const auto& G = c.group();
  const int dv = A.rep_dimension();
  Matrix x = c.word(a, g);
  Matrix out = Matrix::Zero(c.dimension(), c.dimension());
  const double w = 1.0 / static_cast<double>(f.size());
  for (int s : f)
    for (int t : f) {
      Matrix entry = x.block(s * dv, t * dv, dv, dv);
      if (entry.norm() == 0.0) continue;
      AlgebraElement y = m(from_representation(A, entry));
      out += w * c.pi(c.action().alpha[z(s)](y)) * c.lambda(G.mult(s, G.inverse(t)));
    }
  return out;
}

namespace {

std::vector<int> intersect_translate(const GroupTable& g, const std::vector<int>& f, int x) {
  // F cap xF: t in F with x^-1 t in F
  std::set<int> fs(f.begin(), f.end());
  std::vector<int> out;
  for (int t : fs)
    if (fs.count(g.mult(g.inverse(x), t))) out.push_back(t);
  return out;
}

}  // namespace

VerificationReport folner_average(const CrossedProduct& c, const std::vector<int>& f, const CPLinearMap& m,
                                  const std::vector<AlgebraElement>& test, const std::vector<int>& k_in) {
  VerificationReport rep("folner");
  if (f.empty()) {
    rep.precondition("Folner set nonempty", "F nonempty", "empty subset");
    return rep;
  }
  const auto& G = c.group();
  const auto& A = c.algebra();
  for (int t : f)
    if (t < 0 || t >= G.order()) throw StructuralError("Folner set element out of range");
  std::vector<int> k = k_in;
  if (k.empty())
    for (int x = 0; x < G.order(); ++x) k.push_back(x);
  std::set<int> fs(f.begin(), f.end());
  const double nf = static_cast<double>(fs.size());
  std::vector<int> fv(fs.begin(), fs.end());
  rep.parameters()["F"] = fv;
  rep.parameters()["K"] = k;

  const auto id = CPLinearMap::identity(A);
  double closed = 0.0, recovery = 0.0, invariant = 0.0;
  bool any_invariant = false;
  double eta_m = 0.0, eta_f = 0.0;
  for (int x : k) eta_f = std::max(eta_f, 1.0 - static_cast<double>(intersect_translate(G, fv, x).size()) / nf);
  for (const auto& a : test)
    for (int t : fv) {
      auto y = c.action().alpha[z(G.inverse(t))](a);
      eta_m = std::max(eta_m, distance(m(y), y));
    }
  const double eta = std::max(eta_m, eta_f);
  double bound_ratio = 0.0, dev_max = 0.0;
  for (const auto& a : test)
    for (int x : k) {
      Matrix word = c.word(a, x);
      Matrix ch = folner_channel(c, fv, m, a, x);
      // closed form: |F|^-1 sum_{t in F cap xF} pi(alpha_t m alpha_{t^-1}(a)) lambda_x
      auto inter = intersect_translate(G, fv, x);
      Matrix cf = Matrix::Zero(c.dimension(), c.dimension());
      for (int t : inter)
        cf += c.pi(c.action().alpha[z(t)](m(c.action().alpha[z(G.inverse(t))](a)))) * c.lambda(x) / nf;
      closed = std::max(closed, (ch - cf).norm() / (a.norm() + 1.0));
      const double dev = operator_norm(ch - word);
      dev_max = std::max(dev_max, dev);
      if (eta > 0.0) bound_ratio = std::max(bound_ratio, dev / (eta * (a.norm() + 1.0)));
      Matrix ci = folner_channel(c, fv, id, a, x);
      if (static_cast<int>(fs.size()) == G.order()) recovery = std::max(recovery, (ci - word).norm());
      if (inter.size() == fs.size()) {
        any_invariant = true;
        invariant = std::max(invariant, (ci - word).norm());
      }
    }
  rep.check("channel matches the averaged formula",
            "Psi o Phi(pi(a) lambda_g) = |F|^-1 sum_{t in F cap gF} pi(alpha_t m alpha_{t^-1}(a)) lambda_g", closed,
            1e-12);
  if (static_cast<int>(fs.size()) == G.order())
    rep.check("recovery with m = id and F = G", "Psi o Phi(pi(a) lambda_g) = pi(a) lambda_g", recovery, 1e-12);
  if (any_invariant)
    rep.check("recovery where F cap gF = F", "Psi o Phi(pi(a) lambda_g) = pi(a) lambda_g for m = id", invariant, 1e-12);
  if (eta > 0.0)
    rep.check("Folner estimate", "||Psi o Phi(pi(a) lambda_g) - pi(a) lambda_g|| < eta (||a|| + 1)", bound_ratio, 1.0,
              "residual is deviation / (eta (||a|| + 1))");
  else
    rep.check("Folner estimate", "||Psi o Phi(pi(a) lambda_g) - pi(a) lambda_g|| < eta (||a|| + 1)", dev_max, 1e-12,
              "eta = 0: exact recovery required");
  rep.data()["eta_map"] = eta_m;
  rep.data()["eta_folner"] = eta_f;
  rep.data()["eta"] = eta;
  rep.data()["max_deviation"] = dev_max;
  return rep;
}

CPLinearMap depolarizing(const CStarAlgebra& a, double eps) {
  StateFunctional tau = normalized_trace(a);
  return CPLinearMap::from_function(
      a, a, [tau, eps, a](const AlgebraElement& x) { return (1.0 - eps) * x + (eps * tau(x)) * a.identity(); }, true,
      true);
}

}  // namespace pimsner
