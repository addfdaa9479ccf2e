#pragma once

// Finite-dimensional C*-algebras as ordered direct sums of full matrix blocks.

#include <complex>
#include <functional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "pimsner/report.hpp"

namespace pimsner {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using Index = Eigen::Index;
using Rng = std::mt19937_64;

inline constexpr double kDefaultTol = 1e-9;
inline constexpr double kPsdTol = 1e-10;   // eigenvalues >= -kPsdTol * norm
inline constexpr double kRankCutoff = 1e-10;  // singular values <= cutoff * sigma_max are zero

class AlgebraElement;

/// ⊕_j M_{n_j}. Block order is significant.
class CStarAlgebra {
 public:
  CStarAlgebra() : CStarAlgebra(std::vector<int>{1}) {}
  explicit CStarAlgebra(std::vector<int> block_sizes);

  const std::vector<int>& blocks() const { return blocks_; }
  int block_count() const { return static_cast<int>(blocks_.size()); }
  int block_size(int j) const { return blocks_.at(static_cast<std::size_t>(j)); }
  // Complex dimension Σ n_j².
  int dimension() const { return dim_; }
  // Dimension of the defining block-diagonal representation, Σ n_j.
  int rep_dimension() const { return rep_dim_; }
  // Offset of block j inside the flat (column-major, concatenated) vector.
  int flat_offset(int j) const { return offsets_.at(static_cast<std::size_t>(j)); }

  AlgebraElement zero() const;
  AlgebraElement identity() const;
  AlgebraElement matrix_unit(int block, int row, int col) const;
  AlgebraElement central_projection(int block) const;
  // Matrix units in flat order.
  std::vector<AlgebraElement> basis() const;
  AlgebraElement from_flat(const Vector& v) const;
  AlgebraElement random(Rng& rng) const;
  AlgebraElement random_hermitian(Rng& rng) const;
  AlgebraElement random_unitary(Rng& rng) const;

  // Locates flat index -> (block, row, col).
  void unflatten(int flat, int& block, int& row, int& col) const;

  friend bool operator==(const CStarAlgebra& a, const CStarAlgebra& b) { return a.blocks_ == b.blocks_; }

 private:
  std::vector<int> blocks_;
  std::vector<int> offsets_;
  int dim_ = 0;
  int rep_dim_ = 0;
};

/// Direct sum of two algebras, blocks concatenated.
CStarAlgebra direct_sum(const CStarAlgebra& a, const CStarAlgebra& b);

class AlgebraElement {
 public:
  AlgebraElement(CStarAlgebra algebra, std::vector<Matrix> blocks);

  const CStarAlgebra& algebra() const { return alg_; }
  const Matrix& block(int j) const { return blocks_.at(static_cast<std::size_t>(j)); }
  const std::vector<Matrix>& blocks() const { return blocks_; }

  AlgebraElement adjoint() const;
  // max over blocks of the largest singular value
  double norm() const;
  bool is_hermitian(double tol = kDefaultTol) const;
  // Hermitian and min eigenvalue >= -tol * ||x||
  bool is_positive(double tol = kPsdTol) const;
  double min_eigenvalue() const;  // of the Hermitian part
  cplx trace() const;            // unnormalised block trace τ
  Vector flat() const;
  // Defining representation σ: block diagonal Σn_j × Σn_j matrix.
  Matrix block_diagonal() const;

  AlgebraElement operator-() const;
  AlgebraElement& operator+=(const AlgebraElement& o);
  AlgebraElement& operator-=(const AlgebraElement& o);
  AlgebraElement& operator*=(cplx s);

  friend AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) { return a += b; }
  friend AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b) { return a -= b; }
  friend AlgebraElement operator*(const AlgebraElement& a, const AlgebraElement& b);
  friend AlgebraElement operator*(cplx s, AlgebraElement a) { return a *= s; }
  friend AlgebraElement operator*(AlgebraElement a, cplx s) { return a *= s; }

 private:
  void require_same(const AlgebraElement& o) const;
  CStarAlgebra alg_;
  std::vector<Matrix> blocks_;
};

double distance(const AlgebraElement& a, const AlgebraElement& b);

/// Diagonal matrix units of every block; pairwise orthogonal, sum to 1.
std::vector<AlgebraElement> minimal_projections(const CStarAlgebra& b);

/// x ↦ Σ_j tr(density_j x_j).
class StateFunctional {
 public:
  const CStarAlgebra& algebra() const { return alg_; }
  const std::vector<Matrix>& densities() const { return densities_; }
  cplx operator()(const AlgebraElement& x) const;
  // GNS representation is faithful iff no block density vanishes.
  bool faithful_gns() const { return faithful_gns_; }
  // Faithful as a functional: every density positive definite.
  bool faithful() const { return faithful_; }

  friend StateFunctional state_from_density(const CStarAlgebra& b, std::vector<Matrix> densities);

 private:
  StateFunctional(CStarAlgebra alg, std::vector<Matrix> d);
  CStarAlgebra alg_;
  std::vector<Matrix> densities_;
  bool faithful_gns_ = false;
  bool faithful_ = false;
};

StateFunctional state_from_density(const CStarAlgebra& b, std::vector<Matrix> densities);
StateFunctional normalized_trace(const CStarAlgebra& b);

/// Linear map between block algebras acting on flat vectors.
class CPLinearMap {
 public:
  CPLinearMap(CStarAlgebra domain, CStarAlgebra codomain, Matrix action, bool claims_cp = true,
              bool claims_unital = false);
  static CPLinearMap from_function(const CStarAlgebra& domain, const CStarAlgebra& codomain,
                                   const std::function<AlgebraElement(const AlgebraElement&)>& f,
                                   bool claims_cp = true, bool claims_unital = false);
  static CPLinearMap identity(const CStarAlgebra& a);
  static CPLinearMap transpose(const CStarAlgebra& a);

  const CStarAlgebra& domain() const { return dom_; }
  const CStarAlgebra& codomain() const { return cod_; }
  const Matrix& action() const { return action_; }
  bool claims_cp() const { return cp_; }
  bool claims_unital() const { return unital_; }

  AlgebraElement operator()(const AlgebraElement& x) const;
  // One Choi matrix per domain block: Σ_ab e_ab ⊗ σ(map(e_ab)).
  std::vector<Matrix> choi_blocks() const;

 private:
  CStarAlgebra dom_, cod_;
  Matrix action_;
  bool cp_, unital_;
};

CPLinearMap compose(const CPLinearMap& outer, const CPLinearMap& inner);

VerificationReport validate_cp(const CPLinearMap& map);

/// x ↦ (u_j x_{perm[j]} u_j*)_j. perm only moves between equal-size blocks.
class AlgebraAutomorphism {
 public:
  AlgebraAutomorphism(CStarAlgebra algebra, std::vector<int> permutation,
                      std::vector<Matrix> unitaries = {});
  static AlgebraAutomorphism identity(const CStarAlgebra& a);
  static AlgebraAutomorphism inner(const AlgebraElement& u);

  const CStarAlgebra& algebra() const { return alg_; }
  const std::vector<int>& permutation() const { return perm_; }
  const std::vector<Matrix>& unitaries() const { return units_; }

  AlgebraElement operator()(const AlgebraElement& x) const;
  AlgebraAutomorphism inverse() const;
  // Unitary V on the defining representation with V* σ(x) V = σ(β(x)).
  Matrix spatial_implementation() const;
  // Action matrix on flat vectors.
  Matrix flat_matrix() const;

 private:
  CStarAlgebra alg_;
  std::vector<int> perm_;
  std::vector<Matrix> units_;
};

AlgebraAutomorphism compose(const AlgebraAutomorphism& outer, const AlgebraAutomorphism& inner);
// max over matrix units of ||f(e) - g(e)||
double automorphism_distance(const AlgebraAutomorphism& f, const AlgebraAutomorphism& g);

// ---- spectral tooling ----
double operator_norm(const Matrix& m);
Eigen::VectorXd hermitian_eigenvalues(const Matrix& m);
// Number of singular values > cutoff * sigma_max.
Index numerical_rank(const Matrix& m, double rel_cutoff = kRankCutoff);
bool is_psd(const Matrix& m, double tol = kPsdTol);
Matrix random_matrix(Index rows, Index cols, Rng& rng);
Matrix random_unitary(Index n, Rng& rng);
// Orthonormal basis (columns) of the column span.
Matrix orthonormal_range(const Matrix& m, double rel_cutoff = kRankCutoff);

}  // namespace pimsner
