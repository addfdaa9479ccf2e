#pragma once

// Free-product gadgets on truncated Fock spaces: the Toeplitz algebra of a
// GNS bimodule, semicircular and Haar unitary elements, alternating-moment
// freeness tests, and the amalgamated construction with D, eta, L, P and W.

#include <functional>
#include <string>
#include <vector>

#include "pimsner/fock.hpp"

namespace pimsner {

// ---- Toeplitz algebra of a state ----

/// l(xi)* b l(xi) = rho(b), scalar vacuum expectation on C*(l(xi)) and its
/// support 1 - l(xi) l(xi)*. Throws PreconditionError unless rho is faithful-GNS.
VerificationReport toeplitz_state_check(const CStarAlgebra& b, const StateFunctional& rho, int truncation, Rng& rng,
                                        int samples = 8);

/// psi(s^m), m = 0..max_order, for s = l(xi) + l(xi)* over B = C.
/// Throws PreconditionError if max_order > truncation.
std::vector<double> semicircular_moments(int truncation, int max_order);
inline std::vector<double> semicircular_moments(int truncation) { return semicircular_moments(truncation, truncation); }
/// Catalan numbers for even orders, zero for odd ones, and self-adjointness of s.
VerificationReport semicircular_check(int truncation);

struct HaarUnitary {
  FockOperator u;
  std::vector<double> moduli;  // |psi(u^k)|, k = 0..k_max
  VerificationReport report;
};

/// u = exp(2 pi i F(s)) with F the semicircle distribution function on [-2, 2].
HaarUnitary haar_unitary(int truncation, int k_max = 4);
/// |psi(u^k)| for every truncation in ns; non-increasing along ns down to a round-off floor.
VerificationReport haar_decay_report(const std::vector<int>& ns, int k_max = 4);

/// Distribution function of the semicircle law on [-2, 2].
double semicircle_cdf(double t);

// ---- alternating moments ----

/// An element of a moment family, kept as a product of factors (product order)
/// so that long words are applied to vectors instead of multiplied out.
using FactoredElement = std::vector<FockOperator>;

struct MomentFamily {
  std::string name;
  std::vector<FactoredElement> elements;  // centred inside freeness_check
  int raise = 0;                          // creation letters per element (level budget)
};

/// Sends the vacuum expectation E(x) in the base algebra to the value of the
/// conditional expectation at x; the identity map gives E itself.
using ExpectationMap = std::function<AlgebraElement(const AlgebraElement&)>;

/// Alternating products x_1 ... x_n (consecutive families differ, n <= max_length)
/// of centred elements x - psi(x); reports max ||psi(word)|| / prod ||x_j||. Exhaustive
/// over the element pools when there are at most 10^4 words, seeded sampling otherwise.
/// Throws PreconditionError when the level budget of some word exceeds the truncation.
VerificationReport freeness_check(const FockPtr& f, const std::vector<MomentFamily>& families,
                                  const ExpectationMap& psi, int max_length, Rng& rng, int samples = 24,
                                  const std::string& anchor = "psi(x_1 ... x_n) = 0 for alternating centred x_j");

// ---- amalgamated free products ----

/// A_iota = B (x) C_iota with conditional expectation id (x) omega_iota.
struct AmalgSpec {
  std::vector<int> b_blocks;
  std::vector<int> c1_blocks, c2_blocks;
  std::vector<Matrix> omega1, omega2;  // densities of states on C_1, C_2
  int truncation = 5;
};

class AmalgSetup {
 public:
  // Throws ValidationError if an expectation fails its checks, PreconditionError
  // if a GNS representation is not faithful, ResourceError on the dimension cap.
  explicit AmalgSetup(const AmalgSpec& spec, long dim_cap = kDefaultDimCap);

  const AmalgSpec& spec() const { return spec_; }
  const CStarAlgebra& b() const { return b_; }
  const CStarAlgebra& a(int iota) const { return iota == 1 ? a1_ : a2_; }
  const CStarAlgebra& a() const { return a_; }
  const HilbertBimodule& module() const { return h_; }
  const Vector& xi() const { return xi_; }
  const FockPtr& fock() const { return f_; }
  int truncation() const { return f_->truncation(); }
  const FockOperator& L() const { return ops_[0]; }
  const FockOperator& Ls() const { return ops_[1]; }
  const FockOperator& P() const { return ops_[2]; }
  const FockOperator& W() const { return ops_[3]; }
  const VerificationReport& report() const { return report_; }

  AlgebraElement embed_b(int iota, const AlgebraElement& b) const;  // b (x) 1 in A_iota
  AlgebraElement phi_iota(int iota, const AlgebraElement& a) const;  // A_iota -> B
  AlgebraElement pair(const AlgebraElement& a1, const AlgebraElement& a2) const;  // (a1, a2) in A
  AlgebraElement first(const AlgebraElement& a1) const { return pair(a1, a_zero(2)); }
  AlgebraElement second(const AlgebraElement& a2) const { return pair(a_zero(1), a2); }
  AlgebraElement component(int iota, const AlgebraElement& a) const;
  AlgebraElement d(const AlgebraElement& b1, const AlgebraElement& b2) const;  // (b1, b2) in D
  AlgebraElement alpha(const AlgebraElement& d) const;                          // (b1, b2) -> (b2, b1)
  std::vector<AlgebraElement> d_basis() const;
  const CPLinearMap& phi() const { return phi_; }
  const CPLinearMap& eta() const { return eta_; }
  // psi = phi o E, D-valued
  AlgebraElement psi(const FockOperator& t) const;
  AlgebraElement psi_vector(const Vector& v) const;  // phi of the level-0 part
  ExpectationMap phi_map() const { return [this](const AlgebraElement& x) { return phi_(x); }; }
  FockOperator left(const AlgebraElement& a) const { return FockOperator::left(f_, a); }
  AlgebraElement random_centered(int iota, Rng& rng) const;  // a - phi_iota(a) (x) 1 in A_iota

 private:
  AlgebraElement a_zero(int iota) const { return a(iota).zero(); }
  AmalgSpec spec_;
  CStarAlgebra b_, c1_, c2_, a1_, a2_, a_;
  CPLinearMap phi_, eta_;
  HilbertBimodule h_;
  Vector xi_;
  FockPtr f_;
  std::vector<FockOperator> ops_;  // L, L*, P, W
  VerificationReport report_;
};

/// Checks of the expectations and L* a L = eta(a): amalg_setup's own report.
VerificationReport amalg_setup_check(const AmalgSetup& s, Rng& rng);

/// P^2 = P, W = W*, W^2 = P, the expansion W = L + L* - L L*^2 - L^2 L*, psi(W) = 0.
/// Throws PreconditionError for truncation < 3.
VerificationReport build_w_check(const AmalgSetup& s);

/// L d = alpha(d) L, L* d = alpha(d) L*, P d = d P, W d = alpha(d) W, W (1 - P) = 0,
/// and W q W = (1 - q) P for q = (1, 0).
VerificationReport swap_commutation(const AmalgSetup& s);

/// The vanishing family psi(a_1 W^q_1 ... a_{k+1} (1 - P) a'_{l+1} ... W^q'_1 a'_1) = 0
/// for k + l <= budget, q in {1, 2}; the expectation identities for W (0, a) W;
/// alternating M_1 / M_2 moments; and the M_2 description q W A W q = W (1-q) A (1-q) W.
VerificationReport wunitary_vanishing(const AmalgSetup& s, int budget, Rng& rng, int samples = 6);

/// ({L, L*}, A) freeness over D, conditions (alpha) and (beta).
VerificationReport la_freeness(const AmalgSetup& s, int max_length, Rng& rng, int samples = 4);

/// A nontrivial A_iota tested against itself; the alternating moments do not vanish.
/// Throws PreconditionError when A_1 = A_2 = B.
VerificationReport nonfree_control(const AmalgSetup& s, Rng& rng);

}  // namespace pimsner
