#include "pimsner/hilbmod.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>

namespace pimsner {

namespace {

std::size_t z(int i) { return static_cast<std::size_t>(i); }

Matrix kron_identity_left(int n, const Matrix& m) {
  // I_n (x) m
  Matrix out = Matrix::Zero(n * m.rows(), n * m.cols());
  for (int i = 0; i < n; ++i) out.block(i * m.rows(), i * m.cols(), m.rows(), m.cols()) = m;
  return out;
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double scale_of(double x) { return std::max(1.0, x); }

}  // namespace

// ---------------------------------------------------------------------------
// HilbertBimodule

HilbertBimodule::HilbertBimodule(CStarAlgebra base, std::vector<int> r, std::vector<std::vector<int>> c,
                                 std::vector<Matrix> u) {
  auto d = std::make_shared<Data>();
  const int k = base.block_count();
  if (static_cast<int>(r.size()) != k) throw StructuralError("one right multiplicity per block is required");
  if (static_cast<int>(c.size()) != k) throw StructuralError("left multiplicity matrix must be k x k");
  for (int j = 0; j < k; ++j) {
    if (r[z(j)] < 0) throw StructuralError("right multiplicities must be >= 0");
    if (static_cast<int>(c[z(j)].size()) != k) throw StructuralError("left multiplicity matrix must be k x k");
    int sum = 0;
    for (int kk = 0; kk < k; ++kk) {
      if (c[z(j)][z(kk)] < 0) throw StructuralError("left multiplicities must be >= 0");
      sum += c[z(j)][z(kk)] * base.block_size(kk);
    }
    if (sum != r[z(j)])
      throw StructuralError("multiplicity equation sum_k c_jk n_k = r_j fails for component " + std::to_string(j));
  }
  if (u.empty()) u.resize(z(k));
  if (static_cast<int>(u.size()) != k) throw StructuralError("one basis change per component is required");
  for (int j = 0; j < k; ++j)
    if (u[z(j)].size() > 0 && (u[z(j)].rows() != r[z(j)] || u[z(j)].cols() != r[z(j)]))
      throw StructuralError("basis change of component " + std::to_string(j) + " must be r_j x r_j");
  d->base = std::move(base);
  d->r = std::move(r);
  d->c = std::move(c);
  d->u = std::move(u);
  int off = 0;
  for (int j = 0; j < k; ++j) {
    d->off.push_back(off);
    off += d->r[z(j)] * d->base.block_size(j);
    std::vector<int> seg;
    int s = 0;
    for (int kk = 0; kk < k; ++kk) {
      seg.push_back(s);
      s += d->c[z(j)][z(kk)] * d->base.block_size(kk);
    }
    d->seg.push_back(std::move(seg));
  }
  d->dim = off;
  d_ = std::move(d);
}

Matrix HilbertBimodule::unitary(int j) const {
  if (has_unitary(j)) return d_->u[z(j)];
  return Matrix::Identity(right_multiplicity(j), right_multiplicity(j));
}

std::vector<Matrix> HilbertBimodule::split(const Vector& x) const {
  if (x.size() != dimension()) throw StructuralError("vector length does not match bimodule dimension");
  std::vector<Matrix> out;
  for (int j = 0; j < components(); ++j)
    out.push_back(Eigen::Map<const Matrix>(x.data() + component_offset(j), right_multiplicity(j),
                                           base().block_size(j)));
  return out;
}

Vector HilbertBimodule::join(const std::vector<Matrix>& comps) const {
  if (static_cast<int>(comps.size()) != components()) throw StructuralError("component count mismatch");
  Vector v(dimension());
  for (int j = 0; j < components(); ++j) {
    const Matrix& m = comps[z(j)];
    if (m.rows() != right_multiplicity(j) || m.cols() != base().block_size(j))
      throw StructuralError("component shape mismatch");
    v.segment(component_offset(j), m.size()) = Eigen::Map<const Vector>(m.data(), m.size());
  }
  return v;
}

Matrix HilbertBimodule::rotated(const Vector& x, int j) const {
  Matrix xj = Eigen::Map<const Matrix>(x.data() + component_offset(j), right_multiplicity(j), base().block_size(j));
  if (has_unitary(j)) return d_->u[z(j)].adjoint() * xj;
  return xj;
}

AlgebraElement HilbertBimodule::inner(const Vector& x, const Vector& y) const {
  auto xs = split(x), ys = split(y);
  std::vector<Matrix> b;
  for (int j = 0; j < components(); ++j) b.push_back(xs[z(j)].adjoint() * ys[z(j)]);
  return {base(), std::move(b)};
}

Vector HilbertBimodule::right_act(const Vector& x, const AlgebraElement& b) const {
  if (!(b.algebra() == base())) throw StructuralError("coefficient from another algebra");
  auto xs = split(x);
  for (int j = 0; j < components(); ++j) xs[z(j)] = xs[z(j)] * b.block(j);
  return join(xs);
}

Matrix HilbertBimodule::left_block(int j, const AlgebraElement& b) const {
  if (!(b.algebra() == base())) throw StructuralError("coefficient from another algebra");
  const int r = right_multiplicity(j);
  Matrix dj = Matrix::Zero(r, r);
  for (int k = 0; k < components(); ++k) {
    const int n = base().block_size(k);
    for (int s = 0; s < left_multiplicity(j, k); ++s) {
      int row = segment_offset(j, k) + s * n;
      dj.block(row, row, n, n) = b.block(k);
    }
  }
  if (!has_unitary(j)) return dj;
  const Matrix& u = d_->u[z(j)];
  return u * dj * u.adjoint();
}

Vector HilbertBimodule::left_act(const AlgebraElement& b, const Vector& x) const {
  auto xs = split(x);
  for (int j = 0; j < components(); ++j) xs[z(j)] = left_block(j, b) * xs[z(j)];
  return join(xs);
}

double HilbertBimodule::norm(const Vector& x) const { return std::sqrt(inner(x, x).norm()); }

Matrix HilbertBimodule::left_matrix(const AlgebraElement& b) const {
  Matrix out = Matrix::Zero(dimension(), dimension());
  for (int j = 0; j < components(); ++j) {
    const int r = right_multiplicity(j), n = base().block_size(j);
    if (r == 0) continue;
    out.block(component_offset(j), component_offset(j), r * n, r * n) = kron_identity_left(n, left_block(j, b));
  }
  return out;
}

Matrix HilbertBimodule::right_matrix(const AlgebraElement& b) const {
  if (!(b.algebra() == base())) throw StructuralError("coefficient from another algebra");
  Matrix out = Matrix::Zero(dimension(), dimension());
  for (int j = 0; j < components(); ++j) {
    const int r = right_multiplicity(j), n = base().block_size(j);
    if (r == 0) continue;
    out.block(component_offset(j), component_offset(j), r * n, r * n) =
        kron(b.block(j).transpose(), Matrix::Identity(r, r));
  }
  return out;
}

Matrix HilbertBimodule::rotation_adjoint() const {
  Matrix out = Matrix::Zero(dimension(), dimension());
  for (int j = 0; j < components(); ++j) {
    const int r = right_multiplicity(j), n = base().block_size(j);
    if (r == 0) continue;
    out.block(component_offset(j), component_offset(j), r * n, r * n) = kron_identity_left(n, unitary(j).adjoint());
  }
  return out;
}

Vector HilbertBimodule::random_vector(Rng& rng) const {
  Matrix m = random_matrix(dimension(), 1, rng);
  return m.col(0);
}

Vector HilbertBimodule::unit_vector(int flat) const {
  Vector v = Vector::Zero(dimension());
  v(flat) = 1.0;
  return v;
}

std::vector<int> HilbertBimodule::left_kernel_blocks() const {
  std::vector<int> out;
  for (int k = 0; k < components(); ++k) {
    int total = 0;
    for (int j = 0; j < components(); ++j) total += left_multiplicity(j, k) * (right_multiplicity(j) > 0 ? 1 : 0);
    if (total == 0) out.push_back(k);
  }
  return out;
}

bool operator==(const HilbertBimodule& a, const HilbertBimodule& b) {
  if (a.d_ == b.d_) return true;
  if (!a.d_ || !b.d_) return false;
  if (!(a.base() == b.base()) || a.d_->r != b.d_->r || a.d_->c != b.d_->c) return false;
  for (int j = 0; j < a.components(); ++j) {
    if (a.has_unitary(j) != b.has_unitary(j)) {
      if ((a.unitary(j) - b.unitary(j)).norm() > 1e-12) return false;
      continue;
    }
    if (a.has_unitary(j) && (a.d_->u[z(j)] - b.d_->u[z(j)]).norm() > 1e-12) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// ModuleVector / ModuleOperator

ModuleVector::ModuleVector(HilbertBimodule parent, Vector flat) : parent_(std::move(parent)), flat_(std::move(flat)) {
  if (flat_.size() != parent_.dimension()) throw StructuralError("vector length does not match bimodule");
}

ModuleVector ModuleVector::zero(const HilbertBimodule& h) { return {h, Vector::Zero(h.dimension())}; }

ModuleVector ModuleVector::from_components(const HilbertBimodule& h, const std::vector<Matrix>& comps) {
  return {h, h.join(comps)};
}

Matrix ModuleVector::component(int j) const { return parent_.split(flat_)[z(j)]; }

ModuleVector& ModuleVector::operator+=(const ModuleVector& o) {
  if (!(parent_ == o.parent_)) throw StructuralError("vectors belong to different bimodules");
  flat_ += o.flat_;
  return *this;
}

ModuleVector& ModuleVector::operator-=(const ModuleVector& o) {
  if (!(parent_ == o.parent_)) throw StructuralError("vectors belong to different bimodules");
  flat_ -= o.flat_;
  return *this;
}

ModuleVector operator*(const ModuleVector& x, const AlgebraElement& b) {
  return {x.parent_, x.parent_.right_act(x.flat_, b)};
}

ModuleVector operator*(const AlgebraElement& b, const ModuleVector& x) {
  return {x.parent_, x.parent_.left_act(b, x.flat_)};
}

AlgebraElement inner(const ModuleVector& x, const ModuleVector& y) {
  if (!(x.parent() == y.parent())) throw StructuralError("vectors belong to different bimodules");
  return x.parent().inner(x.flat(), y.flat());
}

ModuleOperator::ModuleOperator(HilbertBimodule parent, Matrix m) : parent_(std::move(parent)), m_(std::move(m)) {
  if (m_.rows() != parent_.dimension() || m_.cols() != parent_.dimension())
    throw StructuralError("operator shape does not match bimodule");
}

ModuleVector ModuleOperator::operator()(const ModuleVector& x) const {
  if (!(x.parent() == parent_)) throw StructuralError("operator applied to a foreign vector");
  return {parent_, m_ * x.flat()};
}

double ModuleOperator::right_linearity_defect() const {
  double d = 0.0;
  for (const auto& e : parent_.base().basis()) {
    Matrix r = parent_.right_matrix(e);
    d = std::max(d, (m_ * r - r * m_).norm());
  }
  return d;
}

double ModuleOperator::left_commutation_defect() const {
  double d = 0.0;
  for (const auto& e : parent_.base().basis()) {
    Matrix l = parent_.left_matrix(e);
    d = std::max(d, (m_ * l - l * m_).norm());
  }
  return d;
}

// ---------------------------------------------------------------------------
// validation

VerificationReport validate_bimodule(const HilbertBimodule& h, Rng& rng, int samples) {
  VerificationReport rep("validate_bimodule");
  const auto& b = h.base();
  rep.check_true("multiplicity equation", "sum_k c_jk n_k = r_j", true);

  double unit_def = 0.0;
  for (int j = 0; j < h.components(); ++j) {
    Matrix u = h.unitary(j);
    unit_def = std::max(unit_def, (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).norm());
  }
  rep.check("basis change unitary", "U_j* U_j = 1", unit_def, kDefaultTol);

  // *-homomorphism on matrix units, component by component
  auto basis = b.basis();
  double hom = 0.0;
  for (int j = 0; j < h.components(); ++j) {
    if (h.right_multiplicity(j) == 0) continue;
    std::vector<Matrix> img;
    for (const auto& e : basis) img.push_back(h.left_block(j, e));
    for (std::size_t p = 0; p < basis.size(); ++p) {
      hom = std::max(hom, (h.left_block(j, basis[p].adjoint()) - img[p].adjoint()).norm());
      for (std::size_t q = 0; q < basis.size(); ++q)
        hom = std::max(hom, (h.left_block(j, basis[p] * basis[q]) - img[p] * img[q]).norm());
    }
    Matrix one = h.left_block(j, b.identity());
    hom = std::max(hom, (one - Matrix::Identity(one.rows(), one.cols())).norm());
  }
  rep.check("left action is a unital *-homomorphism", "(b1 b2) x = b1 (b2 x), 1 x = x, b* acts as the adjoint", hom,
            kDefaultTol);

  double adj = 0.0, pos = 0.0, rl = 0.0;
  for (int s = 0; s < samples; ++s) {
    Vector x = h.random_vector(rng), y = h.random_vector(rng);
    AlgebraElement c = b.random(rng);
    double sc = h.norm(x) * h.norm(y) * c.norm();
    adj = std::max(adj, distance(h.inner(h.left_act(c, x), y), h.inner(x, h.left_act(c.adjoint(), y))) / scale_of(sc));
    rl = std::max(rl, distance(h.inner(x, h.right_act(y, c)), h.inner(x, y) * c) / scale_of(sc));
    AlgebraElement xx = h.inner(x, x);
    pos = std::max(pos, std::max(0.0, -xx.min_eigenvalue()) / scale_of(xx.norm()));
  }
  rep.check("left action adjointable", "<b x, y> = <x, b* y>", adj, kDefaultTol);
  rep.check("inner product right linear", "<x, y b> = <x, y> b", rl, kDefaultTol);
  rep.check("inner product positive", "<x, x> >= 0", pos, kPsdTol);

  auto ker = h.left_kernel_blocks();
  rep.data()["left_kernel_blocks"] = ker;
  rep.data()["left_injective"] = ker.empty();
  rep.data()["dimension"] = h.dimension();
  return rep;
}

HilbertBimodule make_bimodule(const CStarAlgebra& base, std::vector<int> r, std::vector<std::vector<int>> c,
                              std::vector<Matrix> u, std::uint64_t seed) {
  HilbertBimodule h(base, std::move(r), std::move(c), std::move(u));
  Rng rng(seed);
  VerificationReport rep = validate_bimodule(h, rng);
  if (!rep.passed()) throw ValidationError("bimodule failed validation", rep);
  return h;
}

HilbertBimodule trivial_bimodule(const CStarAlgebra& b) {
  const int k = b.block_count();
  std::vector<std::vector<int>> c(z(k), std::vector<int>(z(k), 0));
  for (int j = 0; j < k; ++j) c[z(j)][z(j)] = 1;
  return HilbertBimodule(b, b.blocks(), c);
}

HilbertBimodule scalar_bimodule(int m) { return HilbertBimodule(CStarAlgebra({1}), {m}, {{m}}); }

// ---------------------------------------------------------------------------
// interior tensor

void tensor_multiplicities(const HilbertBimodule& h, const HilbertBimodule& k, std::vector<int>& r,
                           std::vector<std::vector<int>>& c) {
  if (!(h.base() == k.base())) throw StructuralError("interior tensor needs a common base algebra");
  const int nb = h.components();
  r.assign(z(nb), 0);
  c.assign(z(nb), std::vector<int>(z(nb), 0));
  for (int m = 0; m < nb; ++m)
    for (int kp = 0; kp < nb; ++kp) {
      int s = 0;
      for (int j = 0; j < nb; ++j) s += k.left_multiplicity(m, j) * h.left_multiplicity(j, kp);
      c[z(m)][z(kp)] = s;
      r[z(m)] += s * h.base().block_size(kp);
    }
}

InteriorTensor::InteriorTensor(HilbertBimodule left, HilbertBimodule right) : h_(std::move(left)), k_(std::move(right)) {
  std::vector<int> r;
  std::vector<std::vector<int>> c;
  tensor_multiplicities(h_, k_, r, c);
  out_ = HilbertBimodule(h_.base(), r, c);
  const int nb = h_.components();
  const auto& B = h_.base();
  for (int m = 0; m < nb; ++m)
    for (int kp = 0; kp < nb; ++kp) {
      int copy = 0;
      for (int j = 0; j < nb; ++j)
        for (int s = 0; s < h_.left_multiplicity(j, kp); ++s)
          for (int t = 0; t < k_.left_multiplicity(m, j); ++t) {
            Piece p{m, kp, j, s, t, out_.segment_offset(m, kp) + copy * B.block_size(kp),
                    h_.segment_offset(j, kp) + s * B.block_size(kp), k_.segment_offset(m, j) + t * B.block_size(j)};
            pieces_.push_back(p);
            ++copy;
          }
    }
}

Vector InteriorTensor::tensor(const Vector& h, const Vector& k) const {
  const auto& B = h_.base();
  const int nb = h_.components();
  std::vector<Matrix> hr, kr, out;
  for (int j = 0; j < nb; ++j) {
    hr.push_back(h_.rotated(h, j));
    kr.push_back(k_.rotated(k, j));
    out.push_back(Matrix::Zero(out_.right_multiplicity(j), B.block_size(j)));
  }
  for (const auto& p : pieces_) {
    const int nkp = B.block_size(p.kp), nj = B.block_size(p.j), nm = B.block_size(p.m);
    out[z(p.m)].block(p.out_row, 0, nkp, nm) =
        hr[z(p.j)].block(p.h_row, 0, nkp, nj) * kr[z(p.m)].block(p.k_row, 0, nj, nm);
  }
  return out_.join(out);
}

Matrix InteriorTensor::left_factor_matrix(const Vector& h) const {
  const auto& B = h_.base();
  std::vector<Matrix> hr;
  for (int j = 0; j < h_.components(); ++j) hr.push_back(h_.rotated(h, j));
  Matrix mat = Matrix::Zero(out_.dimension(), k_.dimension());
  for (const auto& p : pieces_) {
    const int nkp = B.block_size(p.kp), nj = B.block_size(p.j), nm = B.block_size(p.m);
    for (int c = 0; c < nm; ++c)
      for (int a = 0; a < nkp; ++a) {
        const int row = out_.flat_index(p.m, p.out_row + a, c);
        for (int b = 0; b < nj; ++b) mat(row, k_.flat_index(p.m, p.k_row + b, c)) = hr[z(p.j)](p.h_row + a, b);
      }
  }
  bool rot = false;
  for (int j = 0; j < k_.components(); ++j) rot = rot || k_.has_unitary(j);
  if (rot) mat = mat * k_.rotation_adjoint();
  return mat;
}

Matrix InteriorTensor::right_factor_matrix(const Vector& k) const {
  const auto& B = h_.base();
  std::vector<Matrix> kr;
  for (int j = 0; j < k_.components(); ++j) kr.push_back(k_.rotated(k, j));
  Matrix mat = Matrix::Zero(out_.dimension(), h_.dimension());
  for (const auto& p : pieces_) {
    const int nkp = B.block_size(p.kp), nj = B.block_size(p.j), nm = B.block_size(p.m);
    Matrix kb = kr[z(p.m)].block(p.k_row, 0, nj, nm);
    for (int c = 0; c < nm; ++c)
      for (int a = 0; a < nkp; ++a) {
        const int row = out_.flat_index(p.m, p.out_row + a, c);
        for (int b = 0; b < nj; ++b) mat(row, h_.flat_index(p.j, p.h_row + a, b)) += kb(b, c);
      }
  }
  bool rot = false;
  for (int j = 0; j < h_.components(); ++j) rot = rot || h_.has_unitary(j);
  if (rot) mat = mat * h_.rotation_adjoint();
  return mat;
}

InteriorTensor interior_tensor(const HilbertBimodule& h, const HilbertBimodule& k) { return InteriorTensor(h, k); }

// ---------------------------------------------------------------------------
// direct sums

DirectSum direct_sum(const HilbertBimodule& h, const HilbertBimodule& k) {
  if (!(h.base() == k.base())) throw StructuralError("direct sum needs a common base algebra");
  const auto& B = h.base();
  const int nb = B.block_count();
  std::vector<int> r(z(nb));
  std::vector<std::vector<int>> c(z(nb), std::vector<int>(z(nb)));
  for (int j = 0; j < nb; ++j) {
    r[z(j)] = h.right_multiplicity(j) + k.right_multiplicity(j);
    for (int kk = 0; kk < nb; ++kk) c[z(j)][z(kk)] = h.left_multiplicity(j, kk) + k.left_multiplicity(j, kk);
  }
  // stacked component [x_H; x_K]; U_j = diag(U^H_j, U^K_j) * perm
  std::vector<Matrix> u;
  HilbertBimodule probe(B, r, c);
  for (int j = 0; j < nb; ++j) {
    const int rj = r[z(j)], rh = h.right_multiplicity(j);
    Matrix perm = Matrix::Zero(rj, rj);
    for (int kk = 0; kk < nb; ++kk) {
      const int n = B.block_size(kk);
      for (int s = 0; s < h.left_multiplicity(j, kk); ++s)
        for (int a = 0; a < n; ++a)
          perm(h.segment_offset(j, kk) + s * n + a, probe.segment_offset(j, kk) + s * n + a) = 1.0;
      for (int s = 0; s < k.left_multiplicity(j, kk); ++s)
        for (int a = 0; a < n; ++a)
          perm(rh + k.segment_offset(j, kk) + s * n + a,
               probe.segment_offset(j, kk) + (h.left_multiplicity(j, kk) + s) * n + a) = 1.0;
    }
    Matrix diag = Matrix::Zero(rj, rj);
    diag.topLeftCorner(rh, rh) = h.unitary(j);
    diag.bottomRightCorner(rj - rh, rj - rh) = k.unitary(j);
    u.push_back(diag * perm);
  }
  DirectSum out{HilbertBimodule(B, r, c, u), Matrix(), Matrix()};
  const auto& m = out.module;
  out.embed_first = Matrix::Zero(m.dimension(), h.dimension());
  out.embed_second = Matrix::Zero(m.dimension(), k.dimension());
  for (int j = 0; j < nb; ++j) {
    const int rh = h.right_multiplicity(j);
    for (int col = 0; col < B.block_size(j); ++col) {
      for (int a = 0; a < rh; ++a) out.embed_first(m.flat_index(j, a, col), h.flat_index(j, a, col)) = 1.0;
      for (int a = 0; a < k.right_multiplicity(j); ++a)
        out.embed_second(m.flat_index(j, rh + a, col), k.flat_index(j, a, col)) = 1.0;
    }
  }
  return out;
}

Augmented augment(const HilbertBimodule& h) {
  const auto& B = h.base();
  DirectSum s = direct_sum(h, trivial_bimodule(B));
  Vector xi = s.embed_second * B.identity().flat();
  return {std::move(s), std::move(xi)};
}

// ---------------------------------------------------------------------------
// quotients

void canonicalize_left_action(const CStarAlgebra& B, const std::vector<int>& r,
                              const std::function<Matrix(int, const AlgebraElement&)>& left_block,
                              std::vector<std::vector<int>>& c, std::vector<Matrix>& u) {
  const int nb = B.block_count();
  c.assign(z(nb), std::vector<int>(z(nb), 0));
  u.assign(z(nb), Matrix());
  for (int j = 0; j < nb; ++j) {
    const int rj = r[z(j)];
    if (rj == 0) continue;
    std::vector<Matrix> projections;
    int total = 0;
    for (int k = 0; k < nb; ++k) {
      Matrix p = left_block(j, B.matrix_unit(k, 0, 0));
      int ck = static_cast<int>(std::lround(p.trace().real()));
      if (ck < 0) throw StructuralError("left action trace is negative");
      c[z(j)][z(k)] = ck;
      total += ck * B.block_size(k);
      projections.push_back(std::move(p));
    }
    if (total != rj) throw StructuralError("left action is not a unital representation on component " + std::to_string(j));
    Matrix uj = Matrix::Zero(rj, rj);
    int seg = 0;
    for (int k = 0; k < nb; ++k) {
      const int n = B.block_size(k), ck = c[z(j)][z(k)];
      if (ck > 0) {
        Matrix p = (projections[z(k)] + projections[z(k)].adjoint()) * 0.5;
        Eigen::SelfAdjointEigenSolver<Matrix> es(p);
        Matrix f = es.eigenvectors().rightCols(ck);
        for (int a = 0; a < n; ++a) {
          Matrix ea = left_block(j, B.matrix_unit(k, a, 0));
          Matrix cols = ea * f;
          for (int s = 0; s < ck; ++s) uj.col(seg + s * n + a) = cols.col(s);
        }
      }
      seg += ck * n;
    }
    Eigen::JacobiSVD<Matrix> svd(uj, Eigen::ComputeFullU | Eigen::ComputeFullV);
    u[z(j)] = svd.matrixU() * svd.matrixV().adjoint();
  }
}

QuotientModule quotient_bimodule(const AlgebraicModule& am) {
  const auto& B = am.base;
  const int nb = B.block_count();
  const int X = am.size;
  QuotientModule out;
  out.report = VerificationReport("quotient");

  double scale = 0.0;
  for (const auto& g : am.gram) scale = std::max(scale, operator_norm(g));
  if (scale <= 0.0) scale = 1.0;

  double neg = 0.0;
  for (int j = 0; j < nb; ++j) {
    Matrix g = (am.gram[z(j)] + am.gram[z(j)].adjoint()) * 0.5;
    neg = std::max(neg, std::max(0.0, -hermitian_eigenvalues(g).minCoeff()));
  }
  out.report.check("B-valued Gram matrix positive", "[<e_p, e_q>]_{p,q} >= 0 in M_X(B)", neg / scale, kPsdTol);
  if (neg > kPsdTol * scale) throw ValidationError("semi-inner product is not positive", out.report);

  std::vector<int> r(z(nb));
  std::vector<Matrix> gamma_rows(z(nb));
  for (int j = 0; j < nb; ++j) {
    const int n = B.block_size(j);
    Matrix w = orthonormal_range(am.right(B.matrix_unit(j, 0, 0)));
    const Matrix& g = am.gram[z(j)];
    Matrix s = w.adjoint() * g.block(0, 0, X, X) * w;
    s = (s + s.adjoint()) * 0.5;
    Matrix v(X, 0);
    if (s.rows() > 0) {
      Eigen::SelfAdjointEigenSolver<Matrix> es(s);
      std::vector<Index> keep;
      for (Index i = 0; i < es.eigenvalues().size(); ++i)
        if (es.eigenvalues()(i) > kRankCutoff * scale) keep.push_back(i);
      v.resize(X, static_cast<Index>(keep.size()));
      for (std::size_t a = 0; a < keep.size(); ++a)
        v.col(static_cast<Index>(a)) = w * es.eigenvectors().col(keep[a]) / std::sqrt(es.eigenvalues()(keep[a]));
    }
    const int rj = static_cast<int>(v.cols());
    r[z(j)] = rj;
    Matrix rows(rj * n, X);
    for (int c = 0; c < n; ++c) {
      Matrix blk = v.adjoint() * g.block(0, c * X, X, X);
      for (int a = 0; a < rj; ++a) rows.row(a + c * rj) = blk.row(a);
    }
    gamma_rows[z(j)] = std::move(rows);
  }
  int d = 0;
  for (int j = 0; j < nb; ++j) d += r[z(j)] * B.block_size(j);
  Matrix gamma(d, X);
  {
    int off = 0;
    for (int j = 0; j < nb; ++j) {
      gamma.middleRows(off, gamma_rows[z(j)].rows()) = gamma_rows[z(j)];
      off += static_cast<int>(gamma_rows[z(j)].rows());
    }
  }

  std::vector<int> offs(z(nb));
  for (int j = 0, off = 0; j < nb; ++j) {
    offs[z(j)] = off;
    off += r[z(j)] * B.block_size(j);
  }

  Matrix pinv = gamma.completeOrthogonalDecomposition().pseudoInverse();
  auto canonical_left = [&](const AlgebraElement& b) { return Matrix(gamma * am.left(b) * pinv); };
  auto block_of = [&](const Matrix& l, int j) { return Matrix(l.block(offs[z(j)], offs[z(j)], r[z(j)], r[z(j)])); };

  // well-definedness on the quotient and compatibility of the actions
  double left_def = 0.0, right_def = 0.0;
  std::vector<Matrix> right_canon;
  for (const auto& e : B.basis()) {
    Matrix lx = am.left(e);
    Matrix lc = gamma * lx * pinv;
    left_def = std::max(left_def, (gamma * lx - lc * gamma).norm());
    Matrix rx = am.right(e);
    Matrix rc = Matrix::Zero(d, d);
    for (int j = 0; j < nb; ++j) {
      const int rj = r[z(j)], n = B.block_size(j);
      if (rj == 0) continue;
      rc.block(offs[z(j)], offs[z(j)], rj * n, rj * n) = kron(e.block(j).transpose(), Matrix::Identity(rj, rj));
    }
    right_def = std::max(right_def, (gamma * rx - rc * gamma).norm());
  }
  double gscale = std::max(1.0, gamma.norm());
  out.report.check("left action descends to the quotient", "b (null vector) is null", left_def / gscale, kDefaultTol);
  out.report.check("right action descends to the quotient", "(x b) maps to [x] b", right_def / gscale, kDefaultTol);

  std::vector<std::vector<int>> c;
  std::vector<Matrix> u;
  canonicalize_left_action(B, r, [&](int j, const AlgebraElement& b) { return block_of(canonical_left(b), j); }, c, u);
  out.module = HilbertBimodule(B, r, c, u);
  out.coords = gamma;

  // isometry: Gram of the classes equals the given Gram
  double iso = 0.0;
  for (int j = 0; j < nb; ++j) {
    const int n = B.block_size(j), rj = r[z(j)];
    Matrix zj(rj, X * n);
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < rj; ++i) zj.block(i, a * X, 1, X) = out.coords.row(out.module.flat_index(j, i, a));
    Matrix gg = zj.adjoint() * zj;
    iso = std::max(iso, (gg - am.gram[z(j)]).norm() / scale);
  }
  out.report.check("quotient map isometric", "<[x], [y]> = <x, y>", iso, kDefaultTol);

  double canon = 0.0;
  for (const auto& e : B.basis()) {
    Matrix lc = canonical_left(e);
    for (int j = 0; j < nb; ++j)
      if (r[z(j)] > 0) canon = std::max(canon, (block_of(lc, j) - out.module.left_block(j, e)).norm());
  }
  out.report.check("left action in canonical form", "M_j(b) = U_j D_j(b) U_j*", canon, kDefaultTol);
  return out;
}

namespace {

Matrix left_mult_matrix(const CStarAlgebra& a, const AlgebraElement& c) {
  Matrix m(a.dimension(), a.dimension());
  auto basis = a.basis();
  for (std::size_t i = 0; i < basis.size(); ++i) m.col(static_cast<Index>(i)) = (c * basis[i]).flat();
  return m;
}

Matrix right_mult_matrix(const CStarAlgebra& a, const AlgebraElement& c) {
  Matrix m(a.dimension(), a.dimension());
  auto basis = a.basis();
  for (std::size_t i = 0; i < basis.size(); ++i) m.col(static_cast<Index>(i)) = (basis[i] * c).flat();
  return m;
}

AlgebraicModule cp_algebraic_module(const CStarAlgebra& a, const CPLinearMap& eta) {
  if (!(eta.domain() == a) || !(eta.codomain() == a)) throw StructuralError("eta must map A to A");
  const int da = a.dimension();
  const int X = da * da;
  const int nb = a.block_count();
  // eta(E^k_{b b'}) for every block k
  std::vector<std::vector<AlgebraElement>> eta_units(z(nb));
  for (int k = 0; k < nb; ++k) {
    const int n = a.block_size(k);
    for (int bb = 0; bb < n * n; ++bb) eta_units[z(k)].push_back(eta(a.matrix_unit(k, bb % n, bb / n)));
  }
  AlgebraicModule am;
  am.base = a;
  am.size = X;
  for (int m = 0; m < nb; ++m) am.gram.push_back(Matrix::Zero(X * a.block_size(m), X * a.block_size(m)));
  std::vector<int> blk(z(da)), row(z(da)), col(z(da));
  for (int p = 0; p < da; ++p) a.unflatten(p, blk[z(p)], row[z(p)], col[z(p)]);
  for (int p = 0; p < da; ++p)
    for (int pp = 0; pp < da; ++pp) {
      // e_p* e_p' = delta(block) delta(row) E_{col, col'}
      if (blk[z(p)] != blk[z(pp)] || row[z(p)] != row[z(pp)]) continue;
      const int k = blk[z(p)], n = a.block_size(k);
      const AlgebraElement& y = eta_units[z(k)][z(col[z(p)] + n * col[z(pp)])];
      for (int q = 0; q < da; ++q)
        for (int qq = 0; qq < da; ++qq) {
          // e_q* y e_q' = delta(block m) y_m(row_q, row_q') E_{col_q, col_q'}
          if (blk[z(q)] != blk[z(qq)]) continue;
          const int m = blk[z(q)];
          cplx v = y.block(m)(row[z(q)], row[z(qq)]);
          if (v == cplx(0.0)) continue;
          const int x = p + da * q, xx = pp + da * qq;
          am.gram[z(m)](col[z(q)] * X + x, col[z(qq)] * X + xx) += v;
        }
    }
  am.left = [a, da](const AlgebraElement& c) { return kron_identity_left(da, left_mult_matrix(a, c)); };
  am.right = [a, da](const AlgebraElement& c) {
    return kron(right_mult_matrix(a, c), Matrix::Identity(da, da));
  };
  return am;
}

PointedBimodule finish_cp(const CStarAlgebra& a, const CPLinearMap& eta, QuotientModule q) {
  const int da = a.dimension();
  Vector one = a.identity().flat();
  Vector x(da * da);
  for (int qq = 0; qq < da; ++qq)
    for (int p = 0; p < da; ++p) x(p + da * qq) = one(p) * one(qq);
  PointedBimodule out{q.module, q.coords * x, q.report};
  double def = 0.0;
  for (const auto& e : a.basis())
    def = std::max(def, distance(out.module.inner(out.xi, out.module.left_act(e, out.xi)), eta(e)));
  out.report.check("vector state of xi", "<xi, a xi> = eta(a)", def, kDefaultTol);
  out.report.data()["dimension"] = out.module.dimension();
  return out;
}

}  // namespace

PointedBimodule cp_bimodule(const CStarAlgebra& a, const CPLinearMap& eta) {
  return finish_cp(a, eta, quotient_bimodule(cp_algebraic_module(a, eta)));
}

PointedBimodule cp_bimodule_checked(const CStarAlgebra& a, const CPLinearMap& eta, bool& ok) {
  try {
    ok = true;
    return cp_bimodule(a, eta);
  } catch (const ValidationError& e) {
    ok = false;
    return {HilbertBimodule(), Vector(), e.report()};
  }
}

PointedBimodule gns_bimodule(const CStarAlgebra& b, const StateFunctional& rho) {
  if (!(rho.algebra() == b)) throw StructuralError("state lives on another algebra");
  CPLinearMap eta = CPLinearMap::from_function(
      b, b, [&](const AlgebraElement& x) { return rho(x) * b.identity(); }, true, true);
  PointedBimodule out = cp_bimodule(b, eta);
  if (!rho.faithful_gns()) out.report.data()["warning"] = "GNS representation of the state is not faithful";
  return out;
}

// ---------------------------------------------------------------------------
// Gram-Schmidt

std::vector<Vector> gram_schmidt(const HilbertBimodule& h, const std::vector<Vector>& x) {
  const auto& B = h.base();
  auto mins = minimal_projections(B);
  std::vector<std::pair<int, int>> where;  // (block, diagonal index) of each minimal projection
  for (int j = 0; j < B.block_count(); ++j)
    for (int a = 0; a < B.block_size(j); ++a) where.emplace_back(j, a);

  double scale = 0.0;
  for (const auto& v : x) scale = std::max(scale, h.norm(v));
  std::vector<Vector> out;
  std::vector<std::size_t> out_proj;
  if (scale <= 0.0) return out;

  for (const auto& xi : x) {
    for (std::size_t l = 0; l < mins.size(); ++l) {
      Vector y = h.right_act(xi, mins[l]);
      if (h.norm(y) <= kRankCutoff * scale) continue;
      Vector w = y;
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t i = 0; i < out.size(); ++i) {
          if (where[out_proj[i]].first != where[l].first) continue;
          w -= h.right_act(out[i], h.inner(out[i], w));
        }
      // w = w e_l; <w, w> = lambda e_l
      const auto [j, a] = where[l];
      double lambda = h.inner(w, w).block(j)(a, a).real();
      if (lambda <= 0.0 || std::sqrt(lambda) <= kRankCutoff * scale) continue;
      out.push_back(w / std::sqrt(lambda));
      out_proj.push_back(l);
    }
  }
  return out;
}

int SubmoduleSpan::complex_dimension() const {
  int d = 0;
  for (const auto& v : basis) {
    for (int j = 0; j < parent.components(); ++j) {
      Matrix comp = Eigen::Map<const Matrix>(v.data() + parent.component_offset(j), parent.right_multiplicity(j),
                                             parent.base().block_size(j));
      if (comp.norm() > 0.5) d += parent.base().block_size(j);
    }
  }
  return d;
}

SubmoduleSpan submodule_projection(const HilbertBimodule& h, const std::vector<Vector>& x) {
  SubmoduleSpan s{h, x, gram_schmidt(h, x), Matrix::Zero(h.dimension(), h.dimension())};
  const auto& B = h.base();
  for (const auto& v : s.basis) {
    for (int j = 0; j < h.components(); ++j) {
      const int r = h.right_multiplicity(j), n = B.block_size(j);
      if (r == 0) continue;
      Matrix comp = Eigen::Map<const Matrix>(v.data() + h.component_offset(j), r, n);
      if (comp.norm() == 0.0) continue;
      // v = v e^j_aa: the nonzero column carries the range vector
      Index col = 0;
      comp.colwise().norm().maxCoeff(&col);
      Vector u = comp.col(col);
      Matrix uu = u * u.adjoint();
      for (int c = 0; c < n; ++c)
        s.projection.block(h.component_offset(j) + c * r, h.component_offset(j) + c * r, r, r) += uu;
    }
  }
  return s;
}

VerificationReport gram_schmidt_check(const HilbertBimodule& h, const std::vector<Vector>& x) {
  VerificationReport rep("gram_schmidt");
  rep.parameters()["inputs"] = x.size();
  SubmoduleSpan s = submodule_projection(h, x);
  const auto& v = s.basis;
  const auto mins = minimal_projections(h.base());
  double orth = 0.0, minimal = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    AlgebraElement p = h.inner(v[i], v[i]);
    for (const auto& m : mins) best = std::min(best, distance(p, m));
    minimal = std::max(minimal, best);
    for (std::size_t j = 0; j < v.size(); ++j)
      if (i != j) orth = std::max(orth, h.inner(v[i], v[j]).norm());
  }
  rep.check("outputs are pairwise orthogonal", "<v_i, v_j> = 0 for i != j", orth, kDefaultTol);
  rep.check("outputs have minimal projection inner products", "<v, v> is a minimal projection", minimal, kDefaultTol);

  const int d = h.dimension();
  const Matrix w = right_span_basis(h, x);
  const Matrix& p = s.projection;
  Matrix vm(d, static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) vm.col(static_cast<Index>(i)) = v[i];
  const Matrix one = Matrix::Identity(d, d);
  double span = 0.0;
  if (w.cols() > 0) span = std::max(span, ((one - p) * w).norm());
  if (vm.cols() > 0) span = std::max(span, ((one - w * w.adjoint()) * vm).norm());
  rep.check("span equality", "span_B {v} = span_B {x}", span, 1e-8, "mutual projection residual");
  rep.check("projection is idempotent and self-adjoint", "P^2 = P = P*",
            std::max((p * p - p).norm(), (p - p.adjoint()).norm()), kDefaultTol);
  rep.check("projection is a contraction", "||P|| <= 1", std::max(0.0, operator_norm(p) - 1.0), kDefaultTol);
  double fix = 0.0;
  for (const auto& g : x) fix = std::max(fix, (p * g - g).norm());
  rep.check("projection fixes the generators", "P x = x", fix, kDefaultTol);
  rep.data()["output_count"] = v.size();
  rep.data()["complex_dimension"] = s.complex_dimension();
  return rep;
}

std::vector<Vector> bimodule_generators(const HilbertBimodule& h, const std::vector<Vector>& x) {
  std::vector<Vector> out;
  auto basis = h.base().basis();
  for (const auto& v : x)
    for (const auto& e : basis) out.push_back(h.left_act(e, v));
  return out;
}

Matrix right_span_basis(const HilbertBimodule& h, const std::vector<Vector>& x) {
  auto basis = h.base().basis();
  Matrix cols(h.dimension(), static_cast<Index>(x.size() * basis.size()));
  Index c = 0;
  for (const auto& v : x)
    for (const auto& e : basis) cols.col(c++) = h.right_act(v, e);
  return orthonormal_range(cols);
}

// ---------------------------------------------------------------------------
// localization

Matrix Localization::adjoint(const Matrix& t) const {
  Eigen::LLT<Matrix> llt(gram);
  return llt.solve(t.adjoint() * gram);
}

Localization localize(const HilbertBimodule& h, const StateFunctional& tau) {
  if (!(tau.algebra() == h.base())) throw StructuralError("functional lives on another algebra");
  if (!tau.faithful()) throw PreconditionError("localization requires a faithful functional");
  Localization loc;
  loc.gram = Matrix::Zero(h.dimension(), h.dimension());
  for (int j = 0; j < h.components(); ++j) {
    const int r = h.right_multiplicity(j), n = h.base().block_size(j);
    if (r == 0) continue;
    loc.gram.block(h.component_offset(j), h.component_offset(j), r * n, r * n) =
        kron(tau.densities()[z(j)].transpose(), Matrix::Identity(r, r));
  }
  Eigen::LLT<Matrix> llt(loc.gram);
  loc.factor = llt.matrixL();
  return loc;
}

int localized_dimension(const HilbertBimodule& h, const Matrix& projection) {
  int total = 0;
  for (int j = 0; j < h.components(); ++j) {
    if (h.right_multiplicity(j) == 0) continue;
    Matrix pe = projection * h.right_matrix(h.base().matrix_unit(j, 0, 0));
    total += static_cast<int>(numerical_rank(pe, 1e-8));
  }
  return total;
}

}  // namespace pimsner
