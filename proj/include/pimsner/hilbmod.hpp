#pragma once

// Hilbert B,B-bimodules in canonical finite-dimensional form.
//
// Component j of a vector is an r_j x n_j complex matrix; the flat vector
// stores the components column-major, one after another. The left action on
// component j is M_j(b) = U_j D_j(b) U_j*, where D_j(b) is block diagonal
// with c_jk copies of b_k for k ascending. Rows of the rotated component
// U_j* x_j come in segments by k, copy-major inside a segment.

#include <memory>
#include <vector>

#include "pimsner/cstar.hpp"

namespace pimsner {

class HilbertBimodule {
 public:
  HilbertBimodule() = default;
  // Checks shapes and the multiplicity equation sum_k c_jk n_k = r_j.
  // Unitarity of U_j is not assumed; see validate_bimodule.
  HilbertBimodule(CStarAlgebra base, std::vector<int> right_multiplicities,
                  std::vector<std::vector<int>> left_multiplicities, std::vector<Matrix> unitaries = {});

  const CStarAlgebra& base() const { return d_->base; }
  int components() const { return base().block_count(); }
  int right_multiplicity(int j) const { return d_->r[static_cast<std::size_t>(j)]; }
  const std::vector<int>& right_multiplicities() const { return d_->r; }
  const std::vector<std::vector<int>>& left_multiplicities() const { return d_->c; }
  int left_multiplicity(int j, int k) const {
    return d_->c[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
  }
  // An empty unitary stands for the identity.
  bool has_unitary(int j) const { return d_->u[static_cast<std::size_t>(j)].size() > 0; }
  Matrix unitary(int j) const;
  int dimension() const { return d_->dim; }
  int component_offset(int j) const { return d_->off[static_cast<std::size_t>(j)]; }
  int segment_offset(int j, int k) const {
    return d_->seg[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
  }
  // flat index of entry (row, col) of component j
  int flat_index(int j, int row, int col) const {
    return component_offset(j) + row + col * right_multiplicity(j);
  }

  std::vector<Matrix> split(const Vector& x) const;
  Vector join(const std::vector<Matrix>& comps) const;
  // U_j* x_j
  Matrix rotated(const Vector& x, int j) const;

  AlgebraElement inner(const Vector& x, const Vector& y) const;
  Vector right_act(const Vector& x, const AlgebraElement& b) const;
  Vector left_act(const AlgebraElement& b, const Vector& x) const;
  double norm(const Vector& x) const;
  Matrix left_block(int j, const AlgebraElement& b) const;  // M_j(b)
  Matrix left_matrix(const AlgebraElement& b) const;        // d x d
  Matrix right_matrix(const AlgebraElement& b) const;       // d x d
  // d x d: every component multiplied on the left by its U_j* (identity if absent)
  Matrix rotation_adjoint() const;

  Vector random_vector(Rng& rng) const;
  Vector unit_vector(int flat) const;

  // Blocks k whose central projection acts as zero.
  std::vector<int> left_kernel_blocks() const;
  bool left_injective() const { return left_kernel_blocks().empty(); }

  friend bool operator==(const HilbertBimodule& a, const HilbertBimodule& b);

 private:
  struct Data {
    CStarAlgebra base;
    std::vector<int> r;
    std::vector<std::vector<int>> c;
    std::vector<Matrix> u;
    std::vector<int> off;
    std::vector<std::vector<int>> seg;
    int dim = 0;
  };
  std::shared_ptr<const Data> d_;
};

/// A vector of a fixed bimodule.
class ModuleVector {
 public:
  ModuleVector(HilbertBimodule parent, Vector flat);
  static ModuleVector zero(const HilbertBimodule& h);
  static ModuleVector from_components(const HilbertBimodule& h, const std::vector<Matrix>& comps);

  const HilbertBimodule& parent() const { return parent_; }
  const Vector& flat() const { return flat_; }
  Matrix component(int j) const;
  double norm() const { return parent_.norm(flat_); }

  ModuleVector& operator+=(const ModuleVector& o);
  ModuleVector& operator-=(const ModuleVector& o);
  friend ModuleVector operator+(ModuleVector a, const ModuleVector& b) { return a += b; }
  friend ModuleVector operator-(ModuleVector a, const ModuleVector& b) { return a -= b; }
  friend ModuleVector operator*(cplx s, ModuleVector a) { a.flat_ *= s; return a; }
  friend ModuleVector operator*(const ModuleVector& x, const AlgebraElement& b);
  friend ModuleVector operator*(const AlgebraElement& b, const ModuleVector& x);

 private:
  HilbertBimodule parent_;
  Vector flat_;
};

AlgebraElement inner(const ModuleVector& x, const ModuleVector& y);

/// Complex-linear operator on the flat coordinates of a bimodule.
class ModuleOperator {
 public:
  ModuleOperator(HilbertBimodule parent, Matrix m);
  const HilbertBimodule& parent() const { return parent_; }
  const Matrix& matrix() const { return m_; }
  ModuleVector operator()(const ModuleVector& x) const;
  // With the unnormalised trace the localized adjoint is the conjugate transpose.
  ModuleOperator adjoint() const { return {parent_, m_.adjoint()}; }
  // max over matrix units b of ||T R(b) - R(b) T||
  double right_linearity_defect() const;
  // max over matrix units b of ||T L(b) - L(b) T||
  double left_commutation_defect() const;

 private:
  HilbertBimodule parent_;
  Matrix m_;
};

/// Runs the type invariants on the matrix units and `samples` random vectors.
VerificationReport validate_bimodule(const HilbertBimodule& h, Rng& rng, int samples = 4);

/// Validated construction; throws ValidationError when an invariant fails.
HilbertBimodule make_bimodule(const CStarAlgebra& base, std::vector<int> right_multiplicities,
                              std::vector<std::vector<int>> left_multiplicities,
                              std::vector<Matrix> unitaries = {}, std::uint64_t seed = 0);

/// B as a bimodule over itself.
HilbertBimodule trivial_bimodule(const CStarAlgebra& b);
/// B = C, H = C^m.
HilbertBimodule scalar_bimodule(int m);

// ---- interior tensor products ----

/// H (x)_B K realised structurally in canonical form (U = 1). The class of
/// h (x) k has, in output component m and copy (k', j, s, t), the piece
/// h'_j[copy (k',s)] * k'_m[copy (j,t)], with h' = U^H* h and k' = U^K* k.
class InteriorTensor {
 public:
  InteriorTensor(HilbertBimodule left, HilbertBimodule right);
  const HilbertBimodule& module() const { return out_; }
  const HilbertBimodule& left() const { return h_; }
  const HilbertBimodule& right() const { return k_; }

  Vector tensor(const Vector& h, const Vector& k) const;
  // k -> h (x) k
  Matrix left_factor_matrix(const Vector& h) const;
  // h -> h (x) k
  Matrix right_factor_matrix(const Vector& k) const;

 private:
  struct Piece {
    int m, kp, j, s, t;  // output component, segment block, H component, copies
    int out_row, h_row, k_row;
  };
  HilbertBimodule h_, k_, out_;
  std::vector<Piece> pieces_;
};

InteriorTensor interior_tensor(const HilbertBimodule& h, const HilbertBimodule& k);

/// Predicted right multiplicities and left multiplicities of H (x)_B K.
void tensor_multiplicities(const HilbertBimodule& h, const HilbertBimodule& k, std::vector<int>& r,
                           std::vector<std::vector<int>>& c);

// ---- direct sums ----

struct DirectSum {
  HilbertBimodule module;
  Matrix embed_first;   // d x d_H
  Matrix embed_second;  // d x d_K
};

DirectSum direct_sum(const HilbertBimodule& h, const HilbertBimodule& k);

/// H~ = H (+) B together with xi = 0 (+) 1.
struct Augmented {
  DirectSum sum;
  Vector xi;
};
Augmented augment(const HilbertBimodule& h);

// ---- quotients of algebraic modules ----

/// A finite-dimensional algebraic right B-module with a B-valued
/// semi-inner product, given on a basis e_0..e_{X-1}. gram[j] is the
/// (X n_j) x (X n_j) matrix with entry (a X + p, c X + q) = <e_p, e_q>_j(a, c).
struct AlgebraicModule {
  CStarAlgebra base;
  int size = 0;
  std::vector<Matrix> gram;
  std::function<Matrix(const AlgebraElement&)> right;  // X x X
  std::function<Matrix(const AlgebraElement&)> left;   // X x X
};

struct QuotientModule {
  HilbertBimodule module;
  Matrix coords;  // d x X, class map into canonical coordinates
  VerificationReport report;
};

/// Separation by the null space and canonicalisation of the left action.
/// Throws ValidationError if the semi-inner product is not positive.
QuotientModule quotient_bimodule(const AlgebraicModule& m);

/// Given r_j and the matrices M_j(e^k_ab) of a *-representation on each
/// component, recovers c_jk and U_j with M_j(b) = U_j D_j(b) U_j*.
void canonicalize_left_action(const CStarAlgebra& b, const std::vector<int>& r,
                              const std::function<Matrix(int, const AlgebraElement&)>& left_block,
                              std::vector<std::vector<int>>& c, std::vector<Matrix>& u);

struct PointedBimodule {
  HilbertBimodule module;
  Vector xi;
  VerificationReport report;
};

/// Separation of A (x) A under <a1 (x) a2, a1' (x) a2'> = a2* eta(a1* a1') a2'.
/// Throws ValidationError when the Gram matrix fails positivity.
PointedBimodule cp_bimodule(const CStarAlgebra& a, const CPLinearMap& eta);
/// Same construction with the report returned instead of thrown.
PointedBimodule cp_bimodule_checked(const CStarAlgebra& a, const CPLinearMap& eta, bool& ok);
/// L^2(B, rho) (x) B with xi the class of 1 (x) 1.
PointedBimodule gns_bimodule(const CStarAlgebra& b, const StateFunctional& rho);

// ---- Gram-Schmidt and projections ----

/// Orthogonalises after splitting every input over the minimal projections.
/// Output vectors satisfy <v,v> = minimal projection and <v,w> = 0.
std::vector<Vector> gram_schmidt(const HilbertBimodule& h, const std::vector<Vector>& x);

struct SubmoduleSpan {
  HilbertBimodule parent;
  std::vector<Vector> generators;
  std::vector<Vector> basis;  // Gram-Schmidt output
  Matrix projection;          // d x d
  // complex dimension of the span
  int complex_dimension() const;
};

SubmoduleSpan submodule_projection(const HilbertBimodule& h, const std::vector<Vector>& x);

/// Orthogonality and minimality of the Gram-Schmidt outputs, span equality
/// against an independent right-span basis, and P^2 = P = P*, ||P|| <= 1, P x = x.
VerificationReport gram_schmidt_check(const HilbertBimodule& h, const std::vector<Vector>& x);

/// Adds b x for every matrix unit b, so the right span is also left invariant.
std::vector<Vector> bimodule_generators(const HilbertBimodule& h, const std::vector<Vector>& x);

/// Orthonormal (Euclidean) basis of the complex span of x R(e) over all matrix units e.
Matrix right_span_basis(const HilbertBimodule& h, const std::vector<Vector>& x);

// ---- localization ----

struct Localization {
  Matrix gram;    // G(x, y) = tau(<x, y>) as x* G y
  Matrix factor;  // lower Cholesky factor, G = F F*
  // Concrete adjoint G^-1 T* G.
  Matrix adjoint(const Matrix& t) const;
};

/// Requires tau faithful; throws PreconditionError otherwise.
Localization localize(const HilbertBimodule& h, const StateFunctional& tau);

/// dim(K (x)_B V) for the defining representation V: sum_j rank(K e^j_11).
int localized_dimension(const HilbertBimodule& h, const Matrix& projection);

}  // namespace pimsner
