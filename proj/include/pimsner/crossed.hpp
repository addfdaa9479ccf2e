#pragma once

// Reduced crossed products A x| G by finite groups, realised on l^2(G) (x) V
// with V the defining block representation of A.

#include <functional>
#include <string>
#include <vector>

#include "pimsner/cstar.hpp"

namespace pimsner {

/// Finite group as a multiplication table: mult[g][h] = gh.
class GroupTable {
 public:
  // Throws StructuralError unless the table is a group with the given identity.
  GroupTable(std::vector<std::vector<int>> mult, int identity = 0);
  static GroupTable cyclic(int n);
  static GroupTable symmetric3();  // elements are permutations of {0,1,2}, see permutation()

  int order() const { return static_cast<int>(mult_.size()); }
  int identity() const { return e_; }
  int mult(int g, int h) const { return mult_[static_cast<std::size_t>(g)][static_cast<std::size_t>(h)]; }
  int inverse(int g) const { return inv_[static_cast<std::size_t>(g)]; }
  const std::vector<std::vector<int>>& table() const { return mult_; }
  // Element g of symmetric3() as the image list of {0,1,2}.
  static std::vector<int> permutation(int g);

 private:
  std::vector<std::vector<int>> mult_;
  std::vector<int> inv_;
  int e_ = 0;
};

struct GroupAction {
  GroupTable group;
  std::vector<AlgebraAutomorphism> alpha;  // indexed by group element
};

/// max over g, h of the distance between alpha_g o alpha_h and alpha_gh.
double action_defect(const GroupAction& act);

/// The action of a group of permutations of the blocks: (alpha_g x)_j = x_{g^-1 j}.
/// images[g][j] is the block g sends j to.
GroupAction permutation_action(const CStarAlgebra& a, const GroupTable& g, const std::vector<std::vector<int>>& images);

class CrossedProduct {
 public:
  // Throws StructuralError if alpha is not a homomorphism into Aut(A).
  CrossedProduct(CStarAlgebra a, GroupAction action);

  const CStarAlgebra& algebra() const { return a_; }
  const GroupAction& action() const { return act_; }
  const GroupTable& group() const { return act_.group; }
  // |G| * dim V
  int dimension() const { return group().order() * a_.rep_dimension(); }

  // (pi(a) xi)(h) = sigma(alpha_{h^-1}(a)) xi(h)
  Matrix pi(const AlgebraElement& a) const;
  // (lambda_g xi)(h) = xi(g^-1 h)
  Matrix lambda(int g) const;
  Matrix word(const AlgebraElement& a, int g) const { return pi(a) * lambda(g); }
  // Complex dimension of span{pi(a) lambda_g}.
  int algebra_dimension() const;

 private:
  CStarAlgebra a_;
  GroupAction act_;
};

/// Covariance, unitarity and the homomorphism property of lambda.
VerificationReport validate_crossed_product(const CrossedProduct& c);

/// Ad(1 (x) V) with V* sigma(a) V = sigma(beta(a)).
class LiftedAutomorphism {
 public:
  LiftedAutomorphism(const CrossedProduct& c, AlgebraAutomorphism beta);
  const AlgebraAutomorphism& base() const { return beta_; }
  const Matrix& implementation() const { return w_; }
  Matrix operator()(const Matrix& x) const { return w_.adjoint() * x * w_; }

 private:
  AlgebraAutomorphism beta_;
  Matrix w_;
};

/// Throws PreconditionError unless beta commutes with every alpha_g.
LiftedAutomorphism lift_automorphism(const CrossedProduct& c, const AlgebraAutomorphism& beta);
VerificationReport lift_check(const CrossedProduct& c, const LiftedAutomorphism& bhat, Rng& rng, int samples = 6);

/// Composite: compress to l^2(F) (x) V, apply m entrywise, and re-embed by
/// e_st (x) sigma(y) -> |F|^-1 pi(alpha_s(y)) lambda_{s t^-1}.
Matrix folner_channel(const CrossedProduct& c, const std::vector<int>& f, const CPLinearMap& m,
                      const AlgebraElement& a, int g);

/// Recovery with m = id, agreement with the averaged closed form, and the
/// estimate ||channel(pi(a) lambda_g) - pi(a) lambda_g|| < eta (||a|| + 1)
/// over the test elements and the group elements in k (all of G if empty).
VerificationReport folner_average(const CrossedProduct& c, const std::vector<int>& f, const CPLinearMap& m,
                                  const std::vector<AlgebraElement>& test, const std::vector<int>& k = {});

/// x -> (1 - eps) x + eps rho(x) 1
CPLinearMap depolarizing(const CStarAlgebra& a, double eps);

}  // namespace pimsner
