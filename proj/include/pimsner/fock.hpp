#pragma once

// Truncated full Fock spaces B (+) H (+) H(x)H (+) ... (+) H^(x)N and
// block-sparse operators on them.

#include <map>
#include <memory>
#include <set>
#include <utility>
#include <vector>

#include "pimsner/hilbmod.hpp"

namespace pimsner {

inline constexpr long kDefaultDimCap = 20000;

class FockSpace;
using FockPtr = std::shared_ptr<const FockSpace>;

class FockSpace {
 public:
  // Level 0 is B, level 1 is H, level k+1 is H (x)_B level k.
  // Throws ResourceError if the total dimension would exceed dim_cap.
  static FockPtr build(const HilbertBimodule& h, int truncation, long dim_cap = kDefaultDimCap);
  static std::vector<long> predicted_level_dimensions(const HilbertBimodule& h, int truncation);

  const HilbertBimodule& module() const { return h_; }
  const CStarAlgebra& base() const { return h_.base(); }
  int truncation() const { return n_; }
  const HilbertBimodule& level(int k) const { return levels_.at(static_cast<std::size_t>(k)); }
  int level_dimension(int k) const { return level(k).dimension(); }
  int offset(int k) const { return offsets_.at(static_cast<std::size_t>(k)); }
  int dimension() const { return dim_; }
  std::vector<int> level_dimensions() const;
  // H (x) level k, for 1 <= k < N
  const InteriorTensor& tensor(int k) const { return tensors_.at(static_cast<std::size_t>(k - 1)); }

  Vector vacuum(const AlgebraElement& b) const;
  Vector embed(const Vector& level_vector, int k) const;
  Vector level_part(const Vector& v, int k) const;
  // Level k -> level k+1 block of l(h).
  Matrix creation_block(const Vector& h, int k) const;
  // Identity columns of all levels <= max_level (dimension x count).
  Matrix domain_columns(int max_level) const;
  int domain_dimension(int max_level) const;

 private:
  FockSpace() = default;
  HilbertBimodule h_;
  int n_ = 0;
  std::vector<HilbertBimodule> levels_;
  std::vector<InteriorTensor> tensors_;  // index k-1 holds H (x) level k
  std::vector<int> offsets_;
  int dim_ = 0;
};

/// Adjointable B-linear operator stored as level-to-level blocks.
class FockOperator {
 public:
  using Key = std::pair<int, int>;  // (row level, column level)

  explicit FockOperator(FockPtr space);
  static FockOperator identity(FockPtr f);
  static FockOperator creation(FockPtr f, const Vector& h);
  static FockOperator annihilation(FockPtr f, const Vector& h) { return creation(std::move(f), h).adjoint(); }
  static FockOperator left(FockPtr f, const AlgebraElement& b);
  static FockOperator right(FockPtr f, const AlgebraElement& b);
  static FockOperator level_projection(FockPtr f, int k);
  static FockOperator top_projection(FockPtr f) { return level_projection(f, f->truncation()); }
  // Projection onto levels <= k.
  static FockOperator lower_projection(FockPtr f, int k);
  static FockOperator from_dense(FockPtr f, const Matrix& m);

  const FockSpace& space() const { return *f_; }
  const FockPtr& space_ptr() const { return f_; }
  const std::map<Key, Matrix>& blocks() const { return blocks_; }
  Matrix block(int row_level, int col_level) const;
  void add_block(int row_level, int col_level, const Matrix& m);

  FockOperator adjoint() const;
  FockOperator& operator+=(const FockOperator& o);
  FockOperator& operator-=(const FockOperator& o);
  FockOperator& operator*=(cplx s);
  friend FockOperator operator+(FockOperator a, const FockOperator& b) { return a += b; }
  friend FockOperator operator-(FockOperator a, const FockOperator& b) { return a -= b; }
  friend FockOperator operator*(cplx s, FockOperator a) { return a *= s; }
  friend FockOperator operator*(const FockOperator& a, const FockOperator& b);

  Vector apply(const Vector& v) const;
  Matrix apply(const Matrix& m) const;
  Matrix dense() const;
  double frobenius() const;
  // Operator norm: exact SVD up to 1500, power iteration beyond.
  double norm() const;
  // Frobenius norm of the restriction to levels <= max_level.
  double restricted_frobenius(int max_level) const;
  // Row level minus column level of every stored block.
  std::set<int> degrees() const;

 private:
  void require_same(const FockOperator& o) const;
  FockPtr f_;
  std::map<Key, Matrix> blocks_;
};

/// Level-0 component of T applied to the vacuum, read as an element of B.
AlgebraElement vacuum_expectation(const FockOperator& t);
/// Degree-zero part: the diagonal blocks.
FockOperator gauge_expectation(const FockOperator& t);

struct WordLetter {
  Vector h;
  bool create = true;
};

/// b_0 l(h_1)^{g_1} b_1 ... l(h_m)^{g_m} b_m; coefficients has m+1 entries.
struct WordSpec {
  std::vector<AlgebraElement> coefficients;
  std::vector<WordLetter> letters;
  int degree() const;
};

FockOperator word(const FockPtr& f, const WordSpec& spec);
/// Right-to-left action of the word on the columns of cols.
Matrix apply_word(const FockPtr& f, const WordSpec& spec, const Matrix& cols);
/// Highest level on which the truncated word acts as the untruncated one,
/// given the letter degrees (+1 create, -1 annihilate) in product order.
int overflow_free_level(const std::vector<int>& letter_degrees, int truncation);
int overflow_free_level(const WordSpec& spec, int truncation);

/// Normal-ordered word l(h_1)..l(h_m) l(g_1)*..l(g_m)*.
WordSpec normal_word(const CStarAlgebra& b, const std::vector<Vector>& creates, const std::vector<Vector>& annihilates);

// ---- verification routines ----

/// Truncated creation relations and bimodularity for every pair from hs.
VerificationReport creation_relations_check(const FockPtr& f, const std::vector<Vector>& hs, Rng& rng);

/// E and Phi: unital, positive, bimodular, idempotent, E = E o Phi; balanced
/// and unbalanced words; factorisation through powers of L (when xi is given).
VerificationReport expectation_check(const FockPtr& f, Rng& rng, int samples, const Vector* xi = nullptr);

/// Generators of I_n on F(H): vanishing on F_{n-1}, finite-rank form on
/// level n, two-sided products, and the rank splitting A_n = A_{n-1} + I_n.
VerificationReport ideal_structure_check(const FockPtr& f, int n, Rng& rng, int samples = 4);

/// H^(k(n+1)+j) against H^j (x) (H^(n+1))^(x)k.
VerificationReport fock_factorization_check(const HilbertBimodule& h, int n, int k, int j, Rng& rng);

/// Psi(a) = L a L*. Throws PreconditionError unless Phi(a) = a.
FockOperator toeplitz_endomorphism(const FockOperator& l, const FockOperator& a);
VerificationReport toeplitz_endomorphism_check(const FockPtr& f, const Vector& xi, Rng& rng, int samples = 4);

/// Elementary tensor h_1 (x) (h_2 (x) ... ) in the canonical power chain.
Vector power_tensor(const std::vector<InteriorTensor>& chain, const HilbertBimodule& h,
                    const std::vector<Vector>& factors);
/// chain[i] = H (x) power_{i+1}, so power_{i+2} = chain[i].module(); power_1 = H.
std::vector<InteriorTensor> power_chain(const HilbertBimodule& h, int m);

}  // namespace pimsner
