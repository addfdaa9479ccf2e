#include "pimsner/cstar.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace pimsner {

// ---------------------------------------------------------------------------
// CStarAlgebra

CStarAlgebra::CStarAlgebra(std::vector<int> block_sizes) : blocks_(std::move(block_sizes)) {
  if (blocks_.empty()) throw StructuralError("algebra needs at least one block");
  int off = 0;
  for (int n : blocks_) {
    if (n < 1) throw StructuralError("block sizes must be >= 1");
    offsets_.push_back(off);
    off += n * n;
    rep_dim_ += n;
  }
  dim_ = off;
}

AlgebraElement CStarAlgebra::zero() const {
  std::vector<Matrix> b;
  for (int n : blocks_) b.push_back(Matrix::Zero(n, n));
  return {*this, std::move(b)};
}

AlgebraElement CStarAlgebra::identity() const {
  std::vector<Matrix> b;
  for (int n : blocks_) b.push_back(Matrix::Identity(n, n));
  return {*this, std::move(b)};
}

AlgebraElement CStarAlgebra::matrix_unit(int block, int row, int col) const {
  std::vector<Matrix> b;
  for (int n : blocks_) b.push_back(Matrix::Zero(n, n));
  b.at(static_cast<std::size_t>(block))(row, col) = 1.0;
  return {*this, std::move(b)};
}

AlgebraElement CStarAlgebra::central_projection(int block) const {
  std::vector<Matrix> b;
  for (int j = 0; j < block_count(); ++j) {
    int n = blocks_[static_cast<std::size_t>(j)];
    b.push_back(j == block ? Matrix(Matrix::Identity(n, n)) : Matrix(Matrix::Zero(n, n)));
  }
  return {*this, std::move(b)};
}

std::vector<AlgebraElement> CStarAlgebra::basis() const {
  std::vector<AlgebraElement> out;
  out.reserve(static_cast<std::size_t>(dim_));
  for (int j = 0; j < block_count(); ++j) {
    int n = block_size(j);
    for (int c = 0; c < n; ++c)
      for (int r = 0; r < n; ++r) out.push_back(matrix_unit(j, r, c));
  }
  return out;
}

void CStarAlgebra::unflatten(int flat, int& block, int& row, int& col) const {
  for (int j = block_count() - 1; j >= 0; --j) {
    if (flat >= offsets_[static_cast<std::size_t>(j)]) {
      int local = flat - offsets_[static_cast<std::size_t>(j)];
      int n = block_size(j);
      block = j;
      row = local % n;
      col = local / n;
      return;
    }
  }
  throw StructuralError("flat index out of range");
}

AlgebraElement CStarAlgebra::from_flat(const Vector& v) const {
  if (v.size() != dim_) throw StructuralError("flat vector has wrong length");
  std::vector<Matrix> b;
  for (int j = 0; j < block_count(); ++j) {
    int n = block_size(j);
    b.push_back(Eigen::Map<const Matrix>(v.data() + flat_offset(j), n, n));
  }
  return {*this, std::move(b)};
}

AlgebraElement CStarAlgebra::random(Rng& rng) const {
  std::vector<Matrix> b;
  for (int n : blocks_) b.push_back(random_matrix(n, n, rng));
  return {*this, std::move(b)};
}

AlgebraElement CStarAlgebra::random_hermitian(Rng& rng) const {
  std::vector<Matrix> b;
  for (int n : blocks_) {
    Matrix m = random_matrix(n, n, rng);
    b.push_back((m + m.adjoint()) * 0.5);
  }
  return {*this, std::move(b)};
}

AlgebraElement CStarAlgebra::random_unitary(Rng& rng) const {
  std::vector<Matrix> b;
  for (int n : blocks_) b.push_back(pimsner::random_unitary(n, rng));
  return {*this, std::move(b)};
}

CStarAlgebra direct_sum(const CStarAlgebra& a, const CStarAlgebra& b) {
  std::vector<int> blocks = a.blocks();
  blocks.insert(blocks.end(), b.blocks().begin(), b.blocks().end());
  return CStarAlgebra(std::move(blocks));
}

// ---------------------------------------------------------------------------
// AlgebraElement

AlgebraElement::AlgebraElement(CStarAlgebra algebra, std::vector<Matrix> blocks)
    : alg_(std::move(algebra)), blocks_(std::move(blocks)) {
  if (static_cast<int>(blocks_.size()) != alg_.block_count())
    throw StructuralError("element block count does not match algebra");
  for (int j = 0; j < alg_.block_count(); ++j) {
    const Matrix& m = blocks_[static_cast<std::size_t>(j)];
    if (m.rows() != alg_.block_size(j) || m.cols() != alg_.block_size(j))
      throw StructuralError("element block shape does not match algebra");
  }
}

void AlgebraElement::require_same(const AlgebraElement& o) const {
  if (!(alg_ == o.alg_)) throw StructuralError("operands belong to different algebras");
}

AlgebraElement AlgebraElement::adjoint() const {
  std::vector<Matrix> b;
  for (const auto& m : blocks_) b.push_back(m.adjoint());
  return {alg_, std::move(b)};
}

double AlgebraElement::norm() const {
  double n = 0.0;
  for (const auto& m : blocks_) n = std::max(n, operator_norm(m));
  return n;
}

bool AlgebraElement::is_hermitian(double tol) const {
  for (const auto& m : blocks_)
    if ((m - m.adjoint()).norm() > tol * std::max(1.0, m.norm())) return false;
  return true;
}

double AlgebraElement::min_eigenvalue() const {
  double e = std::numeric_limits<double>::infinity();
  for (const auto& m : blocks_) {
    Matrix h = (m + m.adjoint()) * 0.5;
    e = std::min(e, hermitian_eigenvalues(h).minCoeff());
  }
  return e;
}

bool AlgebraElement::is_positive(double tol) const {
  if (!is_hermitian(kDefaultTol)) return false;
  return min_eigenvalue() >= -tol * std::max(norm(), 1e-300);
}

cplx AlgebraElement::trace() const {
  cplx t = 0.0;
  for (const auto& m : blocks_) t += m.trace();
  return t;
}

Vector AlgebraElement::flat() const {
  Vector v(alg_.dimension());
  for (int j = 0; j < alg_.block_count(); ++j) {
    const Matrix& m = blocks_[static_cast<std::size_t>(j)];
    v.segment(alg_.flat_offset(j), m.size()) = Eigen::Map<const Vector>(m.data(), m.size());
  }
  return v;
}

Matrix AlgebraElement::block_diagonal() const {
  Matrix out = Matrix::Zero(alg_.rep_dimension(), alg_.rep_dimension());
  int off = 0;
  for (const auto& m : blocks_) {
    out.block(off, off, m.rows(), m.cols()) = m;
    off += static_cast<int>(m.rows());
  }
  return out;
}

AlgebraElement AlgebraElement::operator-() const {
  AlgebraElement r = *this;
  for (auto& m : r.blocks_) m = -m;
  return r;
}

AlgebraElement& AlgebraElement::operator+=(const AlgebraElement& o) {
  require_same(o);
  for (std::size_t j = 0; j < blocks_.size(); ++j) blocks_[j] += o.blocks_[j];
  return *this;
}

AlgebraElement& AlgebraElement::operator-=(const AlgebraElement& o) {
  require_same(o);
  for (std::size_t j = 0; j < blocks_.size(); ++j) blocks_[j] -= o.blocks_[j];
  return *this;
}

AlgebraElement& AlgebraElement::operator*=(cplx s) {
  for (auto& m : blocks_) m *= s;
  return *this;
}

AlgebraElement operator*(const AlgebraElement& a, const AlgebraElement& b) {
  a.require_same(b);
  std::vector<Matrix> out;
  for (std::size_t j = 0; j < a.blocks_.size(); ++j) out.push_back(a.blocks_[j] * b.blocks_[j]);
  return {a.alg_, std::move(out)};
}

double distance(const AlgebraElement& a, const AlgebraElement& b) { return (a - b).norm(); }

std::vector<AlgebraElement> minimal_projections(const CStarAlgebra& b) {
  std::vector<AlgebraElement> out;
  for (int j = 0; j < b.block_count(); ++j)
    for (int a = 0; a < b.block_size(j); ++a) out.push_back(b.matrix_unit(j, a, a));
  return out;
}

// ---------------------------------------------------------------------------
// StateFunctional

StateFunctional::StateFunctional(CStarAlgebra alg, std::vector<Matrix> d)
    : alg_(std::move(alg)), densities_(std::move(d)) {}

cplx StateFunctional::operator()(const AlgebraElement& x) const {
  if (!(x.algebra() == alg_)) throw StructuralError("state applied to element of another algebra");
  cplx s = 0.0;
  for (int j = 0; j < alg_.block_count(); ++j)
    s += (densities_[static_cast<std::size_t>(j)] * x.block(j)).trace();
  return s;
}

StateFunctional state_from_density(const CStarAlgebra& b, std::vector<Matrix> densities) {
  if (static_cast<int>(densities.size()) != b.block_count())
    throw StructuralError("one density per block is required");
  double total = 0.0;
  bool gns = true, faithful = true;
  for (int j = 0; j < b.block_count(); ++j) {
    const Matrix& d = densities[static_cast<std::size_t>(j)];
    if (d.rows() != b.block_size(j) || d.cols() != b.block_size(j))
      throw StructuralError("density shape does not match block");
    if (!is_psd(d)) throw StructuralError("density is not positive semidefinite");
    total += d.trace().real();
    double dn = operator_norm(d);
    if (dn <= 1e-12) gns = false;
    if (hermitian_eigenvalues((d + d.adjoint()) * 0.5).minCoeff() <= 1e-12) faithful = false;
  }
  if (std::abs(total - 1.0) > 1e-9) throw StructuralError("densities must have total trace 1");
  StateFunctional s(b, std::move(densities));
  s.faithful_gns_ = gns;
  s.faithful_ = faithful;
  return s;
}

StateFunctional normalized_trace(const CStarAlgebra& b) {
  std::vector<Matrix> d;
  double total = b.rep_dimension();
  for (int n : b.blocks()) d.push_back(Matrix::Identity(n, n) / total);
  return state_from_density(b, std::move(d));
}

// ---------------------------------------------------------------------------
// CPLinearMap

CPLinearMap::CPLinearMap(CStarAlgebra domain, CStarAlgebra codomain, Matrix action, bool claims_cp,
                         bool claims_unital)
    : dom_(std::move(domain)), cod_(std::move(codomain)), action_(std::move(action)),
      cp_(claims_cp), unital_(claims_unital) {
  if (action_.rows() != cod_.dimension() || action_.cols() != dom_.dimension())
    throw StructuralError("action matrix shape does not match domain/codomain");
}

CPLinearMap CPLinearMap::from_function(const CStarAlgebra& domain, const CStarAlgebra& codomain,
                                       const std::function<AlgebraElement(const AlgebraElement&)>& f,
                                       bool claims_cp, bool claims_unital) {
  Matrix act(codomain.dimension(), domain.dimension());
  auto basis = domain.basis();
  for (std::size_t i = 0; i < basis.size(); ++i) {
    AlgebraElement y = f(basis[i]);
    if (!(y.algebra() == codomain)) throw StructuralError("map output lies in the wrong algebra");
    act.col(static_cast<Index>(i)) = y.flat();
  }
  return {domain, codomain, std::move(act), claims_cp, claims_unital};
}

CPLinearMap CPLinearMap::identity(const CStarAlgebra& a) {
  return {a, a, Matrix::Identity(a.dimension(), a.dimension()), true, true};
}

CPLinearMap CPLinearMap::transpose(const CStarAlgebra& a) {
  return from_function(
      a, a,
      [&](const AlgebraElement& x) {
        std::vector<Matrix> b;
        for (const auto& m : x.blocks()) b.push_back(m.transpose());
        return AlgebraElement(a, std::move(b));
      },
      false, true);
}

AlgebraElement CPLinearMap::operator()(const AlgebraElement& x) const {
  if (!(x.algebra() == dom_)) throw StructuralError("map applied outside its domain");
  return cod_.from_flat(action_ * x.flat());
}

std::vector<Matrix> CPLinearMap::choi_blocks() const {
  std::vector<Matrix> out;
  const int m = cod_.rep_dimension();
  for (int k = 0; k < dom_.block_count(); ++k) {
    const int n = dom_.block_size(k);
    Matrix choi = Matrix::Zero(n * m, n * m);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        Matrix img = (*this)(dom_.matrix_unit(k, a, b)).block_diagonal();
        choi.block(a * m, b * m, m, m) = img;
      }
    out.push_back(std::move(choi));
  }
  return out;
}

CPLinearMap compose(const CPLinearMap& outer, const CPLinearMap& inner) {
  if (!(outer.domain() == inner.codomain())) throw StructuralError("maps are not composable");
  return {inner.domain(), outer.codomain(), outer.action() * inner.action(),
          outer.claims_cp() && inner.claims_cp(), outer.claims_unital() && inner.claims_unital()};
}

VerificationReport validate_cp(const CPLinearMap& map) {
  VerificationReport rep("validate_cp");
  double min_eig = std::numeric_limits<double>::infinity();
  double scale = 0.0;
  for (const auto& c : map.choi_blocks()) {
    Matrix h = (c + c.adjoint()) * 0.5;
    min_eig = std::min(min_eig, hermitian_eigenvalues(h).minCoeff());
    scale = std::max(scale, operator_norm(h));
  }
  rep.data()["choi_min_eigenvalue"] = min_eig;
  rep.check("choi matrix positive semidefinite", "complete positivity: Choi matrix >= 0",
            std::max(0.0, -min_eig), kPsdTol * std::max(scale, 1.0));
  if (map.claims_unital()) {
    AlgebraElement one = map(map.domain().identity());
    rep.check("unital", "map(1) = 1", distance(one, map.codomain().identity()), kDefaultTol);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// AlgebraAutomorphism

AlgebraAutomorphism::AlgebraAutomorphism(CStarAlgebra algebra, std::vector<int> permutation,
                                         std::vector<Matrix> unitaries)
    : alg_(std::move(algebra)), perm_(std::move(permutation)), units_(std::move(unitaries)) {
  const int k = alg_.block_count();
  if (static_cast<int>(perm_.size()) != k) throw StructuralError("permutation length mismatch");
  std::vector<int> seen(static_cast<std::size_t>(k), 0);
  for (int j = 0; j < k; ++j) {
    int p = perm_[static_cast<std::size_t>(j)];
    if (p < 0 || p >= k || seen[static_cast<std::size_t>(p)]++)
      throw StructuralError("block map is not a permutation");
    if (alg_.block_size(p) != alg_.block_size(j))
      throw StructuralError("permutation moves between blocks of unequal size");
  }
  if (units_.empty())
    for (int j = 0; j < k; ++j) units_.push_back(Matrix::Identity(alg_.block_size(j), alg_.block_size(j)));
  if (static_cast<int>(units_.size()) != k) throw StructuralError("one unitary per block is required");
  for (int j = 0; j < k; ++j) {
    const Matrix& u = units_[static_cast<std::size_t>(j)];
    const int n = alg_.block_size(j);
    if (u.rows() != n || u.cols() != n) throw StructuralError("unitary shape mismatch");
    if ((u.adjoint() * u - Matrix::Identity(n, n)).norm() > kDefaultTol)
      throw StructuralError("automorphism block matrix is not unitary");
  }
}

AlgebraAutomorphism AlgebraAutomorphism::identity(const CStarAlgebra& a) {
  std::vector<int> p(static_cast<std::size_t>(a.block_count()));
  std::iota(p.begin(), p.end(), 0);
  return {a, p};
}

AlgebraAutomorphism AlgebraAutomorphism::inner(const AlgebraElement& u) {
  std::vector<int> p(static_cast<std::size_t>(u.algebra().block_count()));
  std::iota(p.begin(), p.end(), 0);
  return {u.algebra(), p, u.blocks()};
}

AlgebraElement AlgebraAutomorphism::operator()(const AlgebraElement& x) const {
  if (!(x.algebra() == alg_)) throw StructuralError("automorphism applied to foreign element");
  std::vector<Matrix> out;
  for (int j = 0; j < alg_.block_count(); ++j) {
    const Matrix& u = units_[static_cast<std::size_t>(j)];
    out.push_back(u * x.block(perm_[static_cast<std::size_t>(j)]) * u.adjoint());
  }
  return {alg_, std::move(out)};
}

AlgebraAutomorphism AlgebraAutomorphism::inverse() const {
  // β(x)_j = u_j x_{p(j)} u_j*  =>  β⁻¹(y)_{p(j)} = u_j* y_j u_j
  const int k = alg_.block_count();
  std::vector<int> p(static_cast<std::size_t>(k));
  std::vector<Matrix> u(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) {
    int pj = perm_[static_cast<std::size_t>(j)];
    p[static_cast<std::size_t>(pj)] = j;
    u[static_cast<std::size_t>(pj)] = units_[static_cast<std::size_t>(j)].adjoint();
  }
  return {alg_, p, u};
}

Matrix AlgebraAutomorphism::spatial_implementation() const {
  // V = Σ_j ι_{p(j)} u_j* ι_j*
  const int d = alg_.rep_dimension();
  std::vector<int> off(static_cast<std::size_t>(alg_.block_count()), 0);
  for (int j = 1; j < alg_.block_count(); ++j)
    off[static_cast<std::size_t>(j)] = off[static_cast<std::size_t>(j - 1)] + alg_.block_size(j - 1);
  Matrix v = Matrix::Zero(d, d);
  for (int j = 0; j < alg_.block_count(); ++j) {
    int pj = perm_[static_cast<std::size_t>(j)];
    int n = alg_.block_size(j);
    v.block(off[static_cast<std::size_t>(pj)], off[static_cast<std::size_t>(j)], n, n) =
        units_[static_cast<std::size_t>(j)].adjoint();
  }
  return v;
}

Matrix AlgebraAutomorphism::flat_matrix() const {
  Matrix m(alg_.dimension(), alg_.dimension());
  auto basis = alg_.basis();
  for (std::size_t i = 0; i < basis.size(); ++i) m.col(static_cast<Index>(i)) = (*this)(basis[i]).flat();
  return m;
}

AlgebraAutomorphism compose(const AlgebraAutomorphism& outer, const AlgebraAutomorphism& inner) {
  if (!(outer.algebra() == inner.algebra())) throw StructuralError("automorphisms on different algebras");
  // (o∘i)(x)_j = uo_j (ui_{po(j)} x_{pi(po(j))} ui*) uo_j*
  const auto& a = outer.algebra();
  std::vector<int> p;
  std::vector<Matrix> u;
  for (int j = 0; j < a.block_count(); ++j) {
    int po = outer.permutation()[static_cast<std::size_t>(j)];
    p.push_back(inner.permutation()[static_cast<std::size_t>(po)]);
    u.push_back(outer.unitaries()[static_cast<std::size_t>(j)] * inner.unitaries()[static_cast<std::size_t>(po)]);
  }
  return {a, p, u};
}

double automorphism_distance(const AlgebraAutomorphism& f, const AlgebraAutomorphism& g) {
  double d = 0.0;
  for (const auto& e : f.algebra().basis()) d = std::max(d, distance(f(e), g(e)));
  return d;
}

// ---------------------------------------------------------------------------
// spectral tooling

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  // ||m||^2 is the top eigenvalue of the smaller Gram matrix
  Matrix g = m.rows() <= m.cols() ? Matrix(m * m.adjoint()) : Matrix(m.adjoint() * m);
  return std::sqrt(std::max(0.0, hermitian_eigenvalues(g).maxCoeff()));
}

Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
  if (m.size() == 0) return Eigen::VectorXd();
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

Index numerical_rank(const Matrix& m, double rel_cutoff) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix, Eigen::ColPivHouseholderQRPreconditioner> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) <= 1e-300) return 0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > rel_cutoff * s(0)) ++r;
  return r;
}

bool is_psd(const Matrix& m, double tol) {
  if (m.size() == 0) return true;
  if ((m - m.adjoint()).norm() > kDefaultTol * std::max(1.0, m.norm())) return false;
  Matrix h = (m + m.adjoint()) * 0.5;
  return hermitian_eigenvalues(h).minCoeff() >= -tol * std::max(operator_norm(h), 1e-300);
}

Matrix random_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) {
      double re = g(rng);
      double im = g(rng);
      m(r, c) = cplx(re, im);
    }
  return m;
}

Matrix random_unitary(Index n, Rng& rng) {
  Matrix z = random_matrix(n, n, rng);
  Eigen::HouseholderQR<Matrix> qr(z);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index i = 0; i < n; ++i) {
    cplx d = r(i, i);
    double a = std::abs(d);
    if (a > 0) q.col(i) *= d / a;
  }
  return q;
}

Matrix orthonormal_range(const Matrix& m, double rel_cutoff) {
  if (m.cols() == 0 || m.rows() == 0) return Matrix(m.rows(), 0);
  Eigen::JacobiSVD<Matrix, Eigen::ColPivHouseholderQRPreconditioner> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Index r = 0;
  if (s.size() > 0 && s(0) > 1e-300)
    for (Index i = 0; i < s.size(); ++i)
      if (s(i) > rel_cutoff * s(0)) ++r;
  return svd.matrixU().leftCols(r);
}

}  // namespace pimsner
