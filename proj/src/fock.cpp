#include "pimsner/fock.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pimsner {

namespace {

std::size_t z(int i) { return static_cast<std::size_t>(i); }

double nz(double x) { return std::max(x, 1e-300); }

Matrix stack_rows(const std::vector<Vector>& rows) {
  if (rows.empty()) return Matrix(0, 0);
  Matrix m(static_cast<Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Index>(i)) = rows[i].transpose();
  return m;
}

// Blocks with both levels <= n, concatenated.
Vector compressed_flat(const FockOperator& t, int n) {
  const auto& f = t.space();
  int total = 0;
  for (int r = 0; r <= n; ++r)
    for (int c = 0; c <= n; ++c) total += f.level_dimension(r) * f.level_dimension(c);
  Vector v = Vector::Zero(total);
  int off = 0;
  for (int r = 0; r <= n; ++r)
    for (int c = 0; c <= n; ++c) {
      const int sz = f.level_dimension(r) * f.level_dimension(c);
      auto it = t.blocks().find({r, c});
      if (it != t.blocks().end()) v.segment(off, sz) = Eigen::Map<const Vector>(it->second.data(), sz);
      off += sz;
    }
  return v;
}

bool is_identity(const AlgebraElement& b) {
  for (int j = 0; j < b.algebra().block_count(); ++j)
    if (!b.block(j).isIdentity(0.0)) return false;
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------
// FockSpace

std::vector<InteriorTensor> power_chain(const HilbertBimodule& h, int m) {
  std::vector<InteriorTensor> chain;
  HilbertBimodule cur = h;
  for (int t = 1; t < m; ++t) {
    chain.emplace_back(h, cur);
    cur = chain.back().module();
  }
  return chain;
}

Vector power_tensor(const std::vector<InteriorTensor>& chain, const HilbertBimodule& h,
                    const std::vector<Vector>& factors) {
  if (factors.empty()) throw StructuralError("power_tensor needs at least one factor");
  if (chain.size() + 1 < factors.size()) throw StructuralError("power chain too short");
  (void)h;
  Vector cur = factors.back();
  int p = 1;
  for (int i = static_cast<int>(factors.size()) - 2; i >= 0; --i) {
    cur = chain[z(p - 1)].tensor(factors[z(i)], cur);
    ++p;
  }
  return cur;
}

std::vector<long> FockSpace::predicted_level_dimensions(const HilbertBimodule& h, int truncation) {
  if (truncation < 0) throw StructuralError("truncation must be >= 0");
  std::vector<long> dims{h.base().dimension()};
  if (truncation == 0) return dims;
  HilbertBimodule shape(h.base(), h.right_multiplicities(), h.left_multiplicities());
  HilbertBimodule cur = shape;
  dims.push_back(cur.dimension());
  for (int k = 2; k <= truncation; ++k) {
    std::vector<int> r;
    std::vector<std::vector<int>> c;
    tensor_multiplicities(shape, cur, r, c);
    long d = 0;
    for (int j = 0; j < h.components(); ++j) d += static_cast<long>(r[z(j)]) * h.base().block_size(j);
    dims.push_back(d);
    if (d > (1L << 24)) {
      for (int t = k + 1; t <= truncation; ++t) dims.push_back(d);
      break;
    }
    cur = HilbertBimodule(h.base(), r, c);
  }
  return dims;
}

FockPtr FockSpace::build(const HilbertBimodule& h, int truncation, long dim_cap) {
  auto dims = predicted_level_dimensions(h, truncation);
  long total = std::accumulate(dims.begin(), dims.end(), 0L);
  if (total > dim_cap)
    throw ResourceError("Fock space of dimension " + std::to_string(total) + " exceeds the cap " +
                        std::to_string(dim_cap));
  std::shared_ptr<FockSpace> f(new FockSpace());
  f->h_ = h;
  f->n_ = truncation;
  f->levels_.push_back(trivial_bimodule(h.base()));
  if (truncation >= 1) f->levels_.push_back(h);
  f->tensors_ = power_chain(h, truncation);
  for (const auto& t : f->tensors_) f->levels_.push_back(t.module());
  int off = 0;
  for (const auto& l : f->levels_) {
    f->offsets_.push_back(off);
    off += l.dimension();
  }
  f->dim_ = off;
  return f;
}

std::vector<int> FockSpace::level_dimensions() const {
  std::vector<int> d;
  for (const auto& l : levels_) d.push_back(l.dimension());
  return d;
}

Vector FockSpace::vacuum(const AlgebraElement& b) const { return embed(b.flat(), 0); }

Vector FockSpace::embed(const Vector& lv, int k) const {
  if (lv.size() != level_dimension(k)) throw StructuralError("level vector has the wrong length");
  Vector v = Vector::Zero(dim_);
  v.segment(offset(k), lv.size()) = lv;
  return v;
}

Vector FockSpace::level_part(const Vector& v, int k) const { return v.segment(offset(k), level_dimension(k)); }

Matrix FockSpace::creation_block(const Vector& h, int k) const {
  if (h.size() != h_.dimension()) throw StructuralError("creation vector does not belong to the base bimodule");
  if (k == 0) {
    auto basis = base().basis();
    Matrix m(h_.dimension(), static_cast<Index>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) m.col(static_cast<Index>(i)) = h_.right_act(h, basis[i]);
    return m;
  }
  return tensor(k).left_factor_matrix(h);
}

int FockSpace::domain_dimension(int max_level) const {
  if (max_level < 0) return 0;
  max_level = std::min(max_level, n_);
  return offset(max_level) + level_dimension(max_level);
}

Matrix FockSpace::domain_columns(int max_level) const {
  const int c = domain_dimension(max_level);
  Matrix m = Matrix::Zero(dim_, c);
  for (int i = 0; i < c; ++i) m(i, i) = 1.0;
  return m;
}

// ---------------------------------------------------------------------------
// FockOperator

FockOperator::FockOperator(FockPtr space) : f_(std::move(space)) {
  if (!f_) throw StructuralError("operator needs a Fock space");
}

FockOperator FockOperator::identity(FockPtr f) {
  FockOperator t(f);
  for (int k = 0; k <= f->truncation(); ++k)
    t.blocks_[{k, k}] = Matrix::Identity(f->level_dimension(k), f->level_dimension(k));
  return t;
}

FockOperator FockOperator::creation(FockPtr f, const Vector& h) {
  FockOperator t(f);
  for (int k = 0; k < f->truncation(); ++k) t.blocks_[{k + 1, k}] = f->creation_block(h, k);
  return t;
}

FockOperator FockOperator::left(FockPtr f, const AlgebraElement& b) {
  FockOperator t(f);
  for (int k = 0; k <= f->truncation(); ++k) t.blocks_[{k, k}] = f->level(k).left_matrix(b);
  return t;
}

FockOperator FockOperator::right(FockPtr f, const AlgebraElement& b) {
  FockOperator t(f);
  for (int k = 0; k <= f->truncation(); ++k) t.blocks_[{k, k}] = f->level(k).right_matrix(b);
  return t;
}

FockOperator FockOperator::level_projection(FockPtr f, int k) {
  FockOperator t(f);
  t.blocks_[{k, k}] = Matrix::Identity(f->level_dimension(k), f->level_dimension(k));
  return t;
}

FockOperator FockOperator::lower_projection(FockPtr f, int k) {
  FockOperator t(f);
  for (int i = 0; i <= std::min(k, f->truncation()); ++i)
    t.blocks_[{i, i}] = Matrix::Identity(f->level_dimension(i), f->level_dimension(i));
  return t;
}

FockOperator FockOperator::from_dense(FockPtr f, const Matrix& m) {
  if (m.rows() != f->dimension() || m.cols() != f->dimension()) throw StructuralError("dense operator has wrong shape");
  FockOperator t(f);
  for (int r = 0; r <= f->truncation(); ++r)
    for (int c = 0; c <= f->truncation(); ++c) {
      Matrix b = m.block(f->offset(r), f->offset(c), f->level_dimension(r), f->level_dimension(c));
      if (b.norm() > 0.0) t.blocks_[{r, c}] = std::move(b);
    }
  return t;
}

Matrix FockOperator::block(int r, int c) const {
  auto it = blocks_.find({r, c});
  if (it != blocks_.end()) return it->second;
  return Matrix::Zero(f_->level_dimension(r), f_->level_dimension(c));
}

void FockOperator::add_block(int r, int c, const Matrix& m) {
  if (m.rows() != f_->level_dimension(r) || m.cols() != f_->level_dimension(c))
    throw StructuralError("block shape does not match levels");
  auto it = blocks_.find({r, c});
  if (it == blocks_.end()) blocks_[{r, c}] = m;
  else it->second += m;
}

void FockOperator::require_same(const FockOperator& o) const {
  if (f_ != o.f_) throw StructuralError("operators act on different Fock spaces");
}

FockOperator FockOperator::adjoint() const {
  FockOperator t(f_);
  for (const auto& [k, m] : blocks_) t.blocks_[{k.second, k.first}] = m.adjoint();
  return t;
}

FockOperator& FockOperator::operator+=(const FockOperator& o) {
  require_same(o);
  for (const auto& [k, m] : o.blocks_) add_block(k.first, k.second, m);
  return *this;
}

FockOperator& FockOperator::operator-=(const FockOperator& o) {
  require_same(o);
  for (const auto& [k, m] : o.blocks_) add_block(k.first, k.second, -m);
  return *this;
}

FockOperator& FockOperator::operator*=(cplx s) {
  for (auto& [k, m] : blocks_) m *= s;
  return *this;
}

FockOperator operator*(const FockOperator& a, const FockOperator& b) {
  a.require_same(b);
  FockOperator t(a.f_);
  std::map<int, std::vector<std::pair<int, const Matrix*>>> by_row;  // b blocks by row level
  for (const auto& [k, m] : b.blocks_) by_row[k.first].emplace_back(k.second, &m);
  for (const auto& [ka, ma] : a.blocks_) {
    auto it = by_row.find(ka.second);
    if (it == by_row.end()) continue;
    for (const auto& [c, mb] : it->second) {
      Matrix p = ma * (*mb);
      t.add_block(ka.first, c, p);
    }
  }
  return t;
}

Vector FockOperator::apply(const Vector& v) const {
  if (v.size() != f_->dimension()) throw StructuralError("vector length does not match the Fock space");
  Vector out = Vector::Zero(v.size());
  for (const auto& [k, m] : blocks_) {
    auto src = v.segment(f_->offset(k.second), m.cols());
    if (src.isZero(0.0)) continue;
    out.segment(f_->offset(k.first), m.rows()).noalias() += m * src;
  }
  return out;
}

Matrix FockOperator::apply(const Matrix& in) const {
  if (in.rows() != f_->dimension()) throw StructuralError("matrix rows do not match the Fock space");
  Matrix out = Matrix::Zero(in.rows(), in.cols());
  for (const auto& [k, m] : blocks_) {
    auto src = in.middleRows(f_->offset(k.second), m.cols());
    if (src.isZero(0.0)) continue;
    out.middleRows(f_->offset(k.first), m.rows()).noalias() += m * src;
  }
  return out;
}

Matrix FockOperator::dense() const {
  Matrix d = Matrix::Zero(f_->dimension(), f_->dimension());
  for (const auto& [k, m] : blocks_) d.block(f_->offset(k.first), f_->offset(k.second), m.rows(), m.cols()) = m;
  return d;
}

double FockOperator::frobenius() const {
  double s = 0.0;
  for (const auto& [k, m] : blocks_) s += m.squaredNorm();
  return std::sqrt(s);
}

double FockOperator::restricted_frobenius(int max_level) const {
  double s = 0.0;
  for (const auto& [k, m] : blocks_)
    if (k.second <= max_level) s += m.squaredNorm();
  return std::sqrt(s);
}

double FockOperator::norm() const {
  if (blocks_.empty()) return 0.0;
  if (f_->dimension() <= 1500) return operator_norm(dense());
  Rng rng(7);
  Vector v = random_matrix(f_->dimension(), 1, rng).col(0);
  v.normalize();
  FockOperator adj = adjoint();
  double est = 0.0;
  for (int it = 0; it < 300; ++it) {
    Vector w = adj.apply(apply(v));
    double nw = w.norm();
    if (nw == 0.0) return 0.0;
    double next = std::sqrt(nw);
    v = w / nw;
    if (std::abs(next - est) <= 1e-13 * next) {
      est = next;
      break;
    }
    est = next;
  }
  return est;
}

std::set<int> FockOperator::degrees() const {
  std::set<int> d;
  for (const auto& [k, m] : blocks_)
    if (m.norm() > 0.0) d.insert(k.first - k.second);
  return d;
}

AlgebraElement vacuum_expectation(const FockOperator& t) {
  const auto& f = t.space();
  const auto& b = f.base();
  Vector v = t.block(0, 0) * b.identity().flat();
  return b.from_flat(v);
}

FockOperator gauge_expectation(const FockOperator& t) {
  FockOperator out(t.space_ptr());
  for (const auto& [k, m] : t.blocks())
    if (k.first == k.second) out.add_block(k.first, k.second, m);
  return out;
}

// ---------------------------------------------------------------------------
// words

int WordSpec::degree() const {
  int d = 0;
  for (const auto& l : letters) d += l.create ? 1 : -1;
  return d;
}

FockOperator word(const FockPtr& f, const WordSpec& spec) {
  if (spec.coefficients.size() != spec.letters.size() + 1)
    throw StructuralError("word needs one more coefficient than letters");
  FockOperator t = is_identity(spec.coefficients[0]) ? FockOperator::identity(f)
                                                      : FockOperator::left(f, spec.coefficients[0]);
  for (std::size_t i = 0; i < spec.letters.size(); ++i) {
    const auto& l = spec.letters[i];
    t = t * (l.create ? FockOperator::creation(f, l.h) : FockOperator::annihilation(f, l.h));
    if (!is_identity(spec.coefficients[i + 1])) t = t * FockOperator::left(f, spec.coefficients[i + 1]);
  }
  return t;
}

Matrix apply_word(const FockPtr& f, const WordSpec& spec, const Matrix& cols) {
  if (spec.coefficients.size() != spec.letters.size() + 1)
    throw StructuralError("word needs one more coefficient than letters");
  Matrix m = cols;
  for (int i = static_cast<int>(spec.letters.size()); i >= 0; --i) {
    if (!is_identity(spec.coefficients[z(i)])) m = FockOperator::left(f, spec.coefficients[z(i)]).apply(m);
    if (i == 0) break;
    const auto& l = spec.letters[z(i - 1)];
    m = (l.create ? FockOperator::creation(f, l.h) : FockOperator::annihilation(f, l.h)).apply(m);
  }
  return m;
}

int overflow_free_level(const std::vector<int>& deg, int truncation) {
  int suffix = 0, raise = 0;
  for (int i = static_cast<int>(deg.size()) - 1; i >= 0; --i) {
    suffix += deg[z(i)];
    raise = std::max(raise, suffix);
  }
  return truncation - raise;
}

int overflow_free_level(const WordSpec& spec, int truncation) {
  std::vector<int> d;
  for (const auto& l : spec.letters) d.push_back(l.create ? 1 : -1);
  return overflow_free_level(d, truncation);
}

WordSpec normal_word(const CStarAlgebra& b, const std::vector<Vector>& creates, const std::vector<Vector>& annihilates) {
  WordSpec w;
  for (const auto& h : creates) w.letters.push_back({h, true});
  for (const auto& g : annihilates) w.letters.push_back({g, false});
  w.coefficients.assign(w.letters.size() + 1, b.identity());
  return w;
}

// ---------------------------------------------------------------------------
// creation relations

VerificationReport creation_relations_check(const FockPtr& f, const std::vector<Vector>& hs, Rng& rng) {
  VerificationReport rep("creation_relations");
  const auto& h = f->module();
  const auto& B = f->base();
  const int n = f->truncation();
  std::vector<FockOperator> ls;
  for (const auto& v : hs) ls.push_back(FockOperator::creation(f, v));
  FockOperator not_top = FockOperator::identity(f) - FockOperator::top_projection(f);

  double rel = 0.0, vac = 0.0, bim = 0.0, lin = 0.0;
  for (std::size_t p = 0; p < hs.size(); ++p) {
    for (std::size_t q = 0; q < hs.size(); ++q) {
      AlgebraElement ip = h.inner(hs[p], hs[q]);
      FockOperator lhs = ls[p].adjoint() * ls[q];
      FockOperator rhs = FockOperator::left(f, ip) * not_top;
      double sc = nz(h.norm(hs[p]) * h.norm(hs[q]));
      rel = std::max(rel, (lhs - rhs).frobenius() / sc);
      vac = std::max(vac, distance(vacuum_expectation(lhs), ip) / sc);
    }
    AlgebraElement b1 = B.random(rng), b2 = B.random(rng);
    Vector bhb = h.left_act(b1, h.right_act(hs[p], b2));
    FockOperator lhs = FockOperator::left(f, b1) * ls[p] * FockOperator::left(f, b2);
    double sc = nz(b1.norm() * h.norm(hs[p]) * b2.norm());
    bim = std::max(bim, (lhs - FockOperator::creation(f, bhb)).frobenius() / sc);
    for (const auto& e : B.basis()) {
      FockOperator r = FockOperator::right(f, e);
      lin = std::max(lin, (ls[p] * r - r * ls[p]).frobenius() / nz(h.norm(hs[p])));
    }
  }
  rep.check("truncated creation relation", "l(h)* l(g) = <h,g> (1 - E_N)", rel, kDefaultTol,
            "operator identity with the top-level correction");
  rep.check("creation relation on the vacuum", "l(h)* l(g) 1 = <h,g>", vac, kDefaultTol);
  rep.check("bimodularity of creation", "b1 l(h) b2 = l(b1 h b2)", bim, kDefaultTol, "operator identity");
  rep.check("creation operators are B-linear", "l(h)(x b) = (l(h) x) b", lin, kDefaultTol);
  rep.data()["truncation"] = n;
  rep.data()["level_dimensions"] = f->level_dimensions();
  return rep;
}

// ---------------------------------------------------------------------------
// expectations

namespace {

Vector random_module_vector(const HilbertBimodule& h, Rng& rng) { return h.random_vector(rng); }

WordSpec random_word(const FockPtr& f, Rng& rng, int length, bool coefficients) {
  const auto& B = f->base();
  WordSpec w;
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < length; ++i) w.letters.push_back({random_module_vector(f->module(), rng), coin(rng)});
  for (int i = 0; i <= length; ++i) w.coefficients.push_back(coefficients ? B.random(rng) : B.identity());
  return w;
}

WordSpec balanced_random_word(const FockPtr& f, Rng& rng, int m) {
  std::vector<Vector> c, a;
  for (int i = 0; i < m; ++i) c.push_back(random_module_vector(f->module(), rng));
  for (int i = 0; i < m; ++i) a.push_back(random_module_vector(f->module(), rng));
  WordSpec w = normal_word(f->base(), c, a);
  for (auto& co : w.coefficients) co = f->base().random(rng);
  return w;
}

}  // namespace

VerificationReport expectation_check(const FockPtr& f, Rng& rng, int samples, const Vector* xi) {
  VerificationReport rep("expectations");
  const auto& B = f->base();
  const auto& h = f->module();
  const int n = f->truncation();
  FockOperator one = FockOperator::identity(f);
  rep.check("E is unital", "E(1) = 1", distance(vacuum_expectation(one), B.identity()), kDefaultTol);

  double pos_e = 0.0, pos_phi = 0.0, bimod = 0.0, idem = 0.0, ephi = 0.0;
  for (int s = 0; s < samples; ++s) {
    FockOperator t = word(f, random_word(f, rng, 1 + s % 3, true)) + word(f, random_word(f, rng, 2, true));
    double tn = nz(t.frobenius());
    FockOperator tt = t.adjoint() * t;
    AlgebraElement e = vacuum_expectation(tt);
    pos_e = std::max(pos_e, std::max(0.0, -e.min_eigenvalue()) / (tn * tn));
    FockOperator ph = gauge_expectation(tt);
    for (const auto& [k, m] : ph.blocks()) {
      Matrix hm = (m + m.adjoint()) * 0.5;
      if (hm.rows() > 0) pos_phi = std::max(pos_phi, std::max(0.0, -hermitian_eigenvalues(hm).minCoeff()) / (tn * tn));
    }
    AlgebraElement b1 = B.random(rng), b2 = B.random(rng);
    AlgebraElement lhs = vacuum_expectation(FockOperator::left(f, b1) * t * FockOperator::left(f, b2));
    bimod = std::max(bimod, distance(lhs, b1 * vacuum_expectation(t) * b2) / (tn * b1.norm() * b2.norm()));
    FockOperator pt = gauge_expectation(t);
    idem = std::max(idem, (gauge_expectation(pt) - pt).frobenius() / tn);
    ephi = std::max(ephi, distance(vacuum_expectation(pt), vacuum_expectation(t)) / tn);
  }
  rep.check("E is positive", "E(T* T) >= 0", pos_e, kPsdTol);
  rep.check("Phi is positive", "Phi(T* T) >= 0", pos_phi, kPsdTol);
  rep.check("E is B-bimodular", "E(b T b') = b E(T) b'", bimod, kDefaultTol);
  rep.check("Phi is idempotent", "Phi(Phi(T)) = Phi(T)", idem, 1e-12);
  rep.check("E factors through Phi", "E = E o Phi", ephi, kDefaultTol);

  // degree bookkeeping on words
  double e_l = 0.0, e_ll = 0.0, phi_bal = 0.0, phi_unbal = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vector a = h.random_vector(rng), c = h.random_vector(rng);
    FockOperator la = FockOperator::creation(f, a), lc = FockOperator::creation(f, c);
    double sc = nz(h.norm(a) * h.norm(c));
    e_l = std::max(e_l, vacuum_expectation(la).norm() / nz(h.norm(a)));
    if (n >= 1) e_ll = std::max(e_ll, distance(vacuum_expectation(la.adjoint() * lc), h.inner(a, c)) / sc);
    FockOperator bal = la * lc.adjoint();
    phi_bal = std::max(phi_bal, (gauge_expectation(bal) - bal).frobenius() / sc);
    phi_unbal = std::max(phi_unbal, gauge_expectation(la).frobenius() / nz(h.norm(a)));
    WordSpec w = random_word(f, rng, 3, true);
    FockOperator wo = word(f, w);
    double wn = nz(wo.frobenius());
    if (w.degree() == 0) phi_bal = std::max(phi_bal, (gauge_expectation(wo) - wo).frobenius() / wn);
    else phi_unbal = std::max(phi_unbal, gauge_expectation(wo).frobenius() / wn);
  }
  rep.check("E kills creation operators", "E(l(h)) = 0", e_l, kDefaultTol);
  rep.check("E on l(h)* l(g)", "E(l(h)* l(g)) = <h,g>", e_ll, kDefaultTol);
  rep.check("gauge expectation fixes balanced words", "Phi(W) = W when #create = #annihilate", phi_bal, 1e-12);
  rep.check("gauge expectation kills unbalanced words", "Phi(W) = 0 otherwise", phi_unbal, 1e-12);

  // span of Phi(words) against span of balanced words
  if (f->dimension() <= 120) {
    std::vector<Vector> phi_rows, bal_rows;
    for (int s = 0; s < 4 * samples; ++s) {
      WordSpec w = random_word(f, rng, 1 + s % 4, true);
      FockOperator wo = word(f, w);
      phi_rows.push_back(gauge_expectation(wo).dense().reshaped());
      if (w.degree() == 0) bal_rows.push_back(wo.dense().reshaped());
    }
    Index r1 = phi_rows.empty() ? 0 : numerical_rank(stack_rows(phi_rows), 1e-9);
    Index r2 = bal_rows.empty() ? 0 : numerical_rank(stack_rows(bal_rows), 1e-9);
    rep.check_true("degree-zero part of word span", "Phi(span words) = span balanced words", r1 == r2,
                   "ranks " + std::to_string(r1) + " and " + std::to_string(r2));
  }

  if (xi) {
    FockOperator l = FockOperator::creation(f, *xi);
    FockOperator ls = l.adjoint();
    double fac = 0.0, deg0 = 0.0;
    for (int s = 0; s < samples; ++s) {
      WordSpec w = random_word(f, rng, 2 + s % 2, true);
      int k = w.degree();
      if (k == 0) continue;
      FockOperator wo = word(f, w);
      std::vector<int> letters;
      for (const auto& lt : w.letters) letters.push_back(lt.create ? 1 : -1);
      const int ak = std::abs(k);
      FockOperator lk = FockOperator::identity(f), lsk = FockOperator::identity(f);
      for (int i = 0; i < ak; ++i) {
        lk = lk * l;
        lsk = lsk * ls;
      }
      if (k > 0) {
        // W = (W L*^k) L^k
        FockOperator wp = wo * lsk;
        std::vector<int> d = letters;
        d.insert(d.end(), z(ak), -1);
        d.insert(d.end(), z(ak), 1);
        int dom = std::min(overflow_free_level(d, n), overflow_free_level(letters, n));
        if (dom >= 0) fac = std::max(fac, (wo - wp * lk).restricted_frobenius(dom) / nz(wo.frobenius()));
        deg0 = std::max(deg0, (gauge_expectation(wp) - wp).frobenius() / nz(wp.frobenius()));
      } else {
        // W = L*^|k| (L^|k| W)
        FockOperator wp = lk * wo;
        std::vector<int> d(z(ak), -1);
        d.insert(d.end(), z(ak), 1);
        d.insert(d.end(), letters.begin(), letters.end());
        int dom = std::min(overflow_free_level(d, n), overflow_free_level(letters, n));
        if (dom >= 0) fac = std::max(fac, (wo - lsk * wp).restricted_frobenius(dom) / nz(wo.frobenius()));
        deg0 = std::max(deg0, (gauge_expectation(wp) - wp).frobenius() / nz(wp.frobenius()));
      }
    }
    rep.check("words factor through powers of L", "W = (L*)^k W' or W = W' L^k", fac, kDefaultTol,
              "overflow-free domain");
    rep.check("factor W' has degree zero", "Phi(W') = W'", deg0, 1e-12);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// ideal structure

VerificationReport ideal_structure_check(const FockPtr& f, int n, Rng& rng, int samples) {
  VerificationReport rep("ideal_structure");
  rep.parameters()["n"] = n;
  if (n < 1 || n > f->truncation()) {
    rep.precondition("ideal level in range", "1 <= n <= N", "n = " + std::to_string(n));
    return rep;
  }
  const auto& B = f->base();
  const auto& h = f->module();
  const auto& top = f->level(n);
  double vanish = 0.0, finite_rank = 0.0, prod_vanish = 0.0, prod_degree = 0.0;
  for (int s = 0; s < samples; ++s) {
    std::vector<AlgebraElement> b;
    std::vector<Vector> hh;
    for (int i = 0; i <= 2 * n; ++i) b.push_back(B.random(rng));
    for (int i = 0; i < 2 * n; ++i) hh.push_back(h.random_vector(rng));
    WordSpec w;
    w.coefficients = b;
    for (int i = 0; i < 2 * n; ++i) w.letters.push_back({hh[z(i)], i < n});
    FockOperator x = word(f, w);
    double sc = nz(x.frobenius());
    if (n >= 1) vanish = std::max(vanish, x.restricted_frobenius(n - 1) / sc);

    // u = b0 h1 (x) b1 h2 (x) ... (x) b_{n-1} h_n b_n,  v = b_2n* h_2n (x) ... (x) b_{n+1}* h_{n+1}
    std::vector<Vector> uf, vf;
    for (int i = 0; i < n; ++i) {
      Vector t = h.left_act(b[z(i)], hh[z(i)]);
      if (i == n - 1) t = h.right_act(t, b[z(n)]);
      uf.push_back(t);
    }
    for (int i = 2 * n - 1; i >= n; --i) vf.push_back(h.left_act(b[z(i + 1)].adjoint(), hh[z(i)]));
    std::vector<InteriorTensor> chain;
    for (int k = 1; k < n; ++k) chain.push_back(f->tensor(k));
    Vector u = power_tensor(chain, h, uf), v = power_tensor(chain, h, vf);
    Matrix rank_one(top.dimension(), top.dimension());
    for (int c = 0; c < top.dimension(); ++c)
      rank_one.col(c) = top.right_act(u, top.inner(v, top.unit_vector(c)));
    finite_rank = std::max(finite_rank, (x.block(n, n) - rank_one).norm() / sc);

    // two-sided products with words of A_n
    int m = 1 + s % n;
    FockOperator y = word(f, balanced_random_word(f, rng, m));
    for (const FockOperator& p : {FockOperator(y * x), FockOperator(x * y)}) {
      double pn = nz(p.frobenius());
      prod_vanish = std::max(prod_vanish, p.restricted_frobenius(n - 1) / pn);
      for (int d : p.degrees()) {
        double bn = 0.0;
        for (const auto& [k, mm] : p.blocks())
          if (k.first - k.second == d) bn += mm.squaredNorm();
        if (d != 0) prod_degree = std::max(prod_degree, std::sqrt(bn) / pn);
      }
    }
  }
  rep.check("generators vanish below level n", "pi_n(I_n) = 0 on F_{n-1}", vanish, kDefaultTol);
  rep.check("generators are finite rank on level n", "x = u <v, .> on H^(x)n", finite_rank, kDefaultTol);
  rep.check("ideal products vanish below level n", "A_n I_n + I_n A_n in I_n: zero on F_{n-1}", prod_vanish,
            kDefaultTol);
  rep.check("ideal products have degree zero", "degree(A_n I_n) = 0", prod_degree, 1e-12);

  // rank splitting under pi_n, with basis vectors and absorbed coefficients
  const int dh = h.dimension();
  long count = B.dimension();
  long p = 1;
  for (int m = 1; m <= n; ++m) {
    p *= static_cast<long>(dh) * dh;
    count += p;
  }
  long dn = f->domain_dimension(n);
  if (count * dn * dn > 4000000L) {
    rep.skipped("rank splitting", "A_n / I_n = A_{n-1}", "word span too large for this instance");
    return rep;
  }
  std::vector<FockOperator> cre;
  for (int i = 0; i < dh; ++i) cre.push_back(FockOperator::creation(f, h.unit_vector(i)));
  // all products of m creations, indexed by tuples
  std::vector<std::vector<FockOperator>> monomials(z(n + 1));
  monomials[0].push_back(FockOperator::identity(f));
  for (int m = 1; m <= n; ++m)
    for (const auto& prev : monomials[z(m - 1)])
      for (const auto& c : cre) monomials[z(m)].push_back(prev * c);
  std::vector<Vector> lower, ideal;
  for (const auto& e : B.basis()) lower.push_back(compressed_flat(FockOperator::left(f, e), n));
  for (int m = 1; m <= n; ++m)
    for (const auto& a : monomials[z(m)])
      for (const auto& c : monomials[z(m)]) {
        Vector row = compressed_flat(a * c.adjoint(), n);
        (m < n ? lower : ideal).push_back(std::move(row));
      }
  std::vector<Vector> all = lower;
  all.insert(all.end(), ideal.begin(), ideal.end());
  Index ra = numerical_rank(stack_rows(all), 1e-9);
  Index rl = numerical_rank(stack_rows(lower), 1e-9);
  Index ri = numerical_rank(stack_rows(ideal), 1e-9);
  rep.data()["rank_A_n"] = ra;
  rep.data()["rank_A_n_minus_1"] = rl;
  rep.data()["rank_I_n"] = ri;
  rep.check_true("rank splitting", "A_n / I_n = A_{n-1}: rank A_n = rank A_{n-1} + rank I_n", ra == rl + ri,
                 std::to_string(ra) + " = " + std::to_string(rl) + " + " + std::to_string(ri));
  return rep;
}

// ---------------------------------------------------------------------------
// factorisation

VerificationReport fock_factorization_check(const HilbertBimodule& h, int n, int k, int j, Rng& rng) {
  VerificationReport rep("factorization");
  rep.parameters()["n"] = n;
  rep.parameters()["k"] = k;
  rep.parameters()["j"] = j;
  const std::string anchor = "H^(k(n+1)+j) = H^j (x) (H^(n+1))^(x)k";
  if (n < 0 || k < 0 || j < 0 || j > n) {
    rep.precondition("parameters in range", "0 <= j <= n, k >= 0", "out of range");
    return rep;
  }
  const int m = k * (n + 1) + j;
  if (m == 0) {
    rep.check_true("dimension equality", anchor, true, "both sides are B");
    return rep;
  }
  auto chain = power_chain(h, std::max(m, n + 1));
  auto power = [&](int t) { return t == 1 ? h : chain[z(t - 2)].module(); };
  HilbertBimodule left = power(m);
  HilbertBimodule y = power(n + 1);
  std::vector<InteriorTensor> ychain = k >= 2 ? power_chain(y, k) : std::vector<InteriorTensor>{};
  HilbertBimodule qk = k == 0 ? HilbertBimodule() : (k == 1 ? y : ychain[z(k - 2)].module());
  std::unique_ptr<InteriorTensor> joint;
  HilbertBimodule right;
  if (k == 0) right = power(j);
  else if (j == 0) right = qk;
  else {
    joint = std::make_unique<InteriorTensor>(power(j), qk);
    right = joint->module();
  }
  rep.data()["left_dimension"] = left.dimension();
  rep.data()["right_dimension"] = right.dimension();
  rep.check_true("dimension equality", anchor, left.dimension() == right.dimension(),
                 std::to_string(left.dimension()) + " vs " + std::to_string(right.dimension()));
  if (left.dimension() != right.dimension()) return rep;

  const int samples = left.dimension() + 8;
  Matrix ls(left.dimension(), samples), rs(right.dimension(), samples);
  for (int s = 0; s < samples; ++s) {
    std::vector<Vector> fac;
    for (int t = 0; t < m; ++t) fac.push_back(h.random_vector(rng));
    ls.col(s) = power_tensor(chain, h, fac);
    std::vector<Vector> ygroups;
    for (int g = 0; g < k; ++g)
      ygroups.push_back(power_tensor(chain, h, std::vector<Vector>(fac.begin() + j + g * (n + 1),
                                                                   fac.begin() + j + (g + 1) * (n + 1))));
    Vector q = k == 0 ? Vector() : power_tensor(ychain, y, ygroups);
    if (k == 0) rs.col(s) = power_tensor(chain, h, std::vector<Vector>(fac.begin(), fac.begin() + j));
    else if (j == 0) rs.col(s) = q;
    else rs.col(s) = joint->tensor(power_tensor(chain, h, std::vector<Vector>(fac.begin(), fac.begin() + j)), q);
  }
  double iso = 0.0;
  for (int s = 0; s < samples; ++s)
    for (int t = s; t < std::min(samples, s + 12); ++t) {
      double sc = nz(left.norm(ls.col(s)) * left.norm(ls.col(t)));
      iso = std::max(iso, distance(left.inner(ls.col(s), ls.col(t)), right.inner(rs.col(s), rs.col(t))) / sc);
    }
  rep.check("regrouping preserves inner products", anchor + ": <x, y> preserved", iso, kDefaultTol);

  Matrix reg = rs * ls.completeOrthogonalDecomposition().pseudoInverse();
  double fit = (reg * ls - rs).norm() / nz(rs.norm());
  rep.check("regrouping is well defined", anchor + ": linear on elementary tensors", fit, kDefaultTol);
  Index rk = numerical_rank(reg, 1e-9);
  rep.check_true("regrouping is bijective", anchor, rk == right.dimension(), "rank " + std::to_string(rk));
  double lin = 0.0;
  for (const auto& e : h.base().basis())
    lin = std::max(lin, (reg * left.right_matrix(e) - right.right_matrix(e) * reg).norm() / nz(reg.norm()));
  rep.check("regrouping is B-linear", anchor + ": W(x b) = W(x) b", lin, kDefaultTol);
  return rep;
}

// ---------------------------------------------------------------------------
// Toeplitz endomorphism

FockOperator toeplitz_endomorphism(const FockOperator& l, const FockOperator& a) {
  for (const auto& [k, m] : a.blocks())
    if (k.first != k.second && m.norm() > 0.0)
      throw PreconditionError("Psi is defined on degree-zero operators only");
  return l * a * l.adjoint();
}

VerificationReport toeplitz_endomorphism_check(const FockPtr& f, const Vector& xi, Rng& rng, int samples) {
  VerificationReport rep("toeplitz_endomorphism");
  const int n = f->truncation();
  FockOperator l = FockOperator::creation(f, xi);
  FockOperator q = toeplitz_endomorphism(l, FockOperator::identity(f));
  double proj = std::max((q * q - q).frobenius(), (q - q.adjoint()).frobenius());
  rep.check("Psi(1) is a projection", "Psi(1) = L L* = (L L*)^2 = (L L*)*", proj, kDefaultTol);

  double mult = 0.0, star = 0.0, vac = 0.0;
  for (int s = 0; s < samples; ++s) {
    int m1 = 1 + s % std::max(1, n - 1), m2 = 1 + (s + 1) % std::max(1, n - 1);
    FockOperator a = word(f, balanced_random_word(f, rng, std::min(m1, n)));
    FockOperator b = word(f, balanced_random_word(f, rng, std::min(m2, n)));
    FockOperator pa = toeplitz_endomorphism(l, a), pb = toeplitz_endomorphism(l, b);
    double sc = nz(a.frobenius() * b.frobenius());
    mult = std::max(mult, (pa * pb - toeplitz_endomorphism(l, a * b)).frobenius() / sc);
    star = std::max(star, (toeplitz_endomorphism(l, a.adjoint()) - pa.adjoint()).frobenius() / nz(a.frobenius()));
    vac = std::max(vac, vacuum_expectation(pa).norm() / nz(a.frobenius()));
  }
  rep.check("Psi is multiplicative", "L a L* L b L* = L a b L*", mult, kDefaultTol, "uses L*L = 1 below level N");
  rep.check("Psi preserves adjoints", "Psi(a*) = Psi(a)*", star, kDefaultTol);
  rep.check("Psi lands in the kernel of E", "E(Psi(a)) = 0", vac, kDefaultTol);

  // injectivity on the span of Omega(m, H) words, m <= N - 1
  const auto& h = f->module();
  const auto& B = f->base();
  const int dh = h.dimension();
  int top = 0;
  long count = B.dimension(), p = 1;
  for (int m = 1; m <= n - 1; ++m) {
    long next = p * dh * dh;
    if ((count + next) * static_cast<long>(f->dimension()) * f->dimension() > 6000000L) break;
    p = next;
    count += p;
    top = m;
  }
  if (count * static_cast<long>(f->dimension()) * f->dimension() > 6000000L) {
    rep.skipped("Psi injective on word span", "Psi(x) = 0 implies x = 0", "word span too large for this instance");
    return rep;
  }
  std::vector<FockOperator> cre;
  for (int i = 0; i < dh; ++i) cre.push_back(FockOperator::creation(f, h.unit_vector(i)));
  std::vector<std::vector<FockOperator>> mono(z(top + 1));
  mono[0].push_back(FockOperator::identity(f));
  for (int m = 1; m <= top; ++m)
    for (const auto& prev : mono[z(m - 1)])
      for (const auto& c : cre) mono[z(m)].push_back(prev * c);
  std::vector<Vector> xs, ps;
  for (const auto& e : B.basis()) {
    FockOperator x = FockOperator::left(f, e);
    xs.push_back(x.dense().reshaped());
    ps.push_back(toeplitz_endomorphism(l, x).dense().reshaped());
  }
  for (int m = 1; m <= top; ++m)
    for (const auto& a : mono[z(m)])
      for (const auto& c : mono[z(m)]) {
        FockOperator x = a * c.adjoint();
        xs.push_back(x.dense().reshaped());
        ps.push_back(toeplitz_endomorphism(l, x).dense().reshaped());
      }
  Index r1 = numerical_rank(stack_rows(xs), 1e-9), r2 = numerical_rank(stack_rows(ps), 1e-9);
  rep.data()["injectivity_word_level"] = top;
  rep.check_true("Psi injective on word span", "rank span Psi(x) = rank span x", r1 == r2,
                 std::to_string(r2) + " vs " + std::to_string(r1));
  return rep;
}

}  // namespace pimsner
