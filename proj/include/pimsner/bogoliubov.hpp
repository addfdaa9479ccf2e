#pragma once

// Bogoliubov maps U on a bimodule, their extension F(U) to the Fock space,
// the growth subspaces K_p and the compressions used in the entropy estimate.

#include <vector>

#include "pimsner/fock.hpp"

namespace pimsner {

/// A complex-linear U on H with <Uh, Ug> = beta(<h, g>) and U(b h b') = beta(b) U(h) beta(b').
struct BogoliubovMap {
  HilbertBimodule h;
  Matrix u;  // on the flat coordinates of h
  AlgebraAutomorphism beta;
};

/// Both defining equations on a basis, plus fullness of the inner products.
/// Throws StructuralError on shape mismatch.
VerificationReport validate_bogoliubov(const BogoliubovMap& m);
/// Throws ValidationError if validate_bogoliubov fails.
BogoliubovMap make_bogoliubov(HilbertBimodule h, Matrix u, AlgebraAutomorphism beta);

/// U~ = U (+) beta on H~ = H (+) B, with xi = 0 (+) 1.
struct AugmentedBogoliubov {
  BogoliubovMap map;
  Vector xi;
  Matrix embed_h;  // H -> H~
};
AugmentedBogoliubov augment_bogoliubov(const BogoliubovMap& m);

/// Bogoliubov map for a bimodule over C^k: the block permutation of beta
/// moves segment (j, k) to (perm^-1 j, perm^-1 k) through a Haar unitary.
/// Throws PreconditionError unless every block has size 1 and the left
/// multiplicities are invariant under the permutation.
BogoliubovMap permutation_twist(const HilbertBimodule& h, const AlgebraAutomorphism& beta, Rng& rng);

struct FockExtension {
  FockOperator op;  // beta (+) U (+) U(x)U (+) ...
  VerificationReport report;
};

/// F(U) level by level, fitted on elementary tensors; checks well-definedness,
/// F(U) l(h) = l(Uh) F(U) and its adjoint form, F(U) b = beta(b) F(U), and,
/// when xi is given, U xi = xi and F(U) L = L F(U).
FockExtension fock_extension(const FockPtr& f, const BogoliubovMap& m, const Vector* xi = nullptr);

struct KpSubspace {
  int p = 1;
  SubmoduleSpan span;
  int dimension = 0;  // complex dimension
  VerificationReport report;
};

/// K_p = K + U K + ... + U^{p-1} K for K the bimodule generated by k_generators.
/// Checks dim K_p <= p dim K and invariance under both actions.
KpSubspace kp_subspace(const HilbertBimodule& h, const std::vector<Vector>& k_generators, const Matrix& u, int p);

/// Q projects onto F_n(K) = B (+) K (+) ... (+) K^(x)n inside the truncated Fock space.
class CompressionChannels {
 public:
  CompressionChannels(FockPtr f, int n, FockOperator q, std::vector<Matrix> level_bases);
  int n() const { return n_; }
  const FockOperator& q() const { return q_; }
  const FockOperator& pn() const { return pn_; }
  // Orthonormal columns spanning K^(x)k inside level k.
  const Matrix& level_basis(int k) const { return bases_.at(static_cast<std::size_t>(k)); }
  int level_localized_dimension(int k) const;

  FockOperator phi_n(const FockOperator& x) const { return pn_ * x * pn_; }
  FockOperator theta(const FockOperator& x) const { return q_ * x * q_; }
  // Q y Q + E(y) (P_n - Q)
  FockOperator upsilon(const FockOperator& y) const;

 private:
  FockPtr f_;
  int n_;
  FockOperator q_, pn_;
  std::vector<Matrix> bases_;
};

struct CompressionResult {
  CompressionChannels channels;
  VerificationReport report;
};

/// Builds Q_{n,p} from K_p and checks projection and commutation properties,
/// Q l(h)* (1 - Q) = 0 for h in K_p, and reconstruction of sampled words of
/// Omega(n, K_p) on F_{n-1}(K_p). Throws PreconditionError unless 1 <= n <= N.
CompressionResult compression_channels(const FockPtr& f, int n, const SubmoduleSpan& kp, Rng& rng, int samples = 4);

struct EntropyRow {
  int p = 0;
  int dim_kp = 0;
  long measured = 0;       // dim(F_n(K_p) (x)_B V)
  double crude_bound = 0;  // dim(V) sum_{k<=n} dim(K_p)^k
  double bound = 0;        // n p^n dim(V) dim(K)^n
  double ratio = 0;        // log(measured) / p
};

struct EntropyBoundReport {
  int n = 0;
  int p_max = 0;
  int dim_k = 0;
  int dim_v = 0;
  int saturation = 0;  // first p with K_p = K_{p+1}, 0 if none within range
  std::vector<EntropyRow> rows;
  VerificationReport report;
};

/// n p^n dim(V) dim(K)^n
double entropy_bound(int n, int p, int dim_v, int dim_k);

/// Growth table for p = 1..p_max. f must be a Fock space over m.h.
/// Throws PreconditionError unless 1 <= n <= N and p_max >= 1.
EntropyBoundReport entropy_bound_report(const FockPtr& f, const BogoliubovMap& m,
                                        const std::vector<Vector>& k_generators, int n, int p_max, Rng& rng,
                                        int samples = 3);

}  // namespace pimsner
