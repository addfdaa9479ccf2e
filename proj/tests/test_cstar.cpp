#include <gtest/gtest.h>

#include "pimsner/cstar.hpp"

using namespace pimsner;

namespace {

CStarAlgebra sample_algebra() { return CStarAlgebra({1, 2, 2}); }

}  // namespace

TEST(CStarAlgebra, DimensionsAndOffsets) {
  CStarAlgebra b = sample_algebra();
  EXPECT_EQ(b.block_count(), 3);
  EXPECT_EQ(b.dimension(), 1 + 4 + 4);
  EXPECT_EQ(b.rep_dimension(), 5);
  EXPECT_EQ(b.flat_offset(2), 5);
  EXPECT_EQ(static_cast<int>(b.basis().size()), b.dimension());
}

TEST(CStarAlgebra, RejectsEmptyBlocks) {
  EXPECT_THROW(CStarAlgebra(std::vector<int>{}), StructuralError);
  EXPECT_THROW(CStarAlgebra({2, 0}), StructuralError);
}

TEST(CStarAlgebra, MatrixUnitsMultiply) {
  CStarAlgebra b = sample_algebra();
  auto e01 = b.matrix_unit(1, 0, 1), e10 = b.matrix_unit(1, 1, 0);
  EXPECT_LT(distance(e01 * e10, b.matrix_unit(1, 0, 0)), 1e-15);
  EXPECT_LT((e10 * b.matrix_unit(2, 0, 0)).norm(), 1e-15);
}

TEST(CStarAlgebra, FlatRoundTrip) {
  Rng rng(3);
  CStarAlgebra b = sample_algebra();
  auto x = b.random(rng);
  EXPECT_LT(distance(b.from_flat(x.flat()), x), 1e-15);
}

TEST(CStarAlgebra, CStarIdentityHolds) {
  Rng rng(4);
  CStarAlgebra b = sample_algebra();
  for (int s = 0; s < 10; ++s) {
    auto x = b.random(rng);
    EXPECT_NEAR((x.adjoint() * x).norm(), x.norm() * x.norm(), 1e-10);
  }
}

TEST(CStarAlgebra, RandomUnitaryIsUnitary) {
  Rng rng(5);
  CStarAlgebra b = sample_algebra();
  auto u = b.random_unitary(rng);
  EXPECT_LT(distance(u.adjoint() * u, b.identity()), 1e-12);
}

TEST(StateFunctional, DensityValidation) {
  CStarAlgebra b({1, 2});
  Matrix d0 = Matrix::Constant(1, 1, 0.5);
  Matrix d1 = Matrix::Identity(2, 2) * 0.25;
  auto rho = state_from_density(b, {d0, d1});
  EXPECT_TRUE(rho.faithful());
  EXPECT_NEAR(std::abs(rho(b.identity()) - cplx(1.0)), 0.0, 1e-14);
  Matrix bad = Matrix::Identity(2, 2) * 0.5;
  EXPECT_THROW(state_from_density(b, {d0, bad}), StructuralError);
  Matrix neg(2, 2);
  neg << 0.75, 0.0, 0.0, -0.25;
  EXPECT_THROW(state_from_density(b, {d0, neg}), StructuralError);
}

TEST(StateFunctional, FaithfulGnsButNotFaithful) {
  CStarAlgebra b({2});
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 1.0;
  auto rho = state_from_density(b, {d});
  EXPECT_TRUE(rho.faithful_gns());
  EXPECT_FALSE(rho.faithful());
}

TEST(CPLinearMap, IdentityIsCompletelyPositive) {
  CStarAlgebra b = sample_algebra();
  auto rep = validate_cp(CPLinearMap::identity(b));
  EXPECT_TRUE(rep.passed()) << rep.to_text();
}

TEST(CPLinearMap, TransposeIsFlagged) {
  CStarAlgebra b({2});
  auto rep = validate_cp(CPLinearMap::transpose(b));
  EXPECT_FALSE(rep.passed());
  // the Choi matrix of the transpose on M_2 is the swap, eigenvalue -1
  EXPECT_NEAR(rep.find("choi matrix positive semidefinite")->residual, 1.0, 1e-9);
}

TEST(CPLinearMap, ChoiOfConditionalExpectation) {
  CStarAlgebra b({2});
  auto e = CPLinearMap::from_function(
      b, b, [&](const AlgebraElement& x) { return (x.trace() / 2.0) * b.identity(); }, true, true);
  auto rep = validate_cp(e);
  EXPECT_TRUE(rep.passed()) << rep.to_text();
}

TEST(CPLinearMap, CompositionMatchesPointwise) {
  Rng rng(6);
  CStarAlgebra b = sample_algebra();
  auto u = b.random_unitary(rng);
  auto ad = CPLinearMap::from_function(b, b, [&](const AlgebraElement& x) { return u * x * u.adjoint(); });
  auto c = compose(ad, ad);
  auto x = b.random(rng);
  EXPECT_LT(distance(c(x), ad(ad(x))), 1e-12);
}

TEST(AlgebraAutomorphism, ComposeAndInverse) {
  Rng rng(7);
  CStarAlgebra b = sample_algebra();
  AlgebraAutomorphism f(b, {0, 2, 1}, {Matrix::Identity(1, 1), random_unitary(2, rng), random_unitary(2, rng)});
  auto x = b.random(rng), y = b.random(rng);
  EXPECT_LT(distance(f(x * y), f(x) * f(y)), 1e-12);
  EXPECT_LT(distance(f(x.adjoint()), f(x).adjoint()), 1e-12);
  EXPECT_LT(automorphism_distance(compose(f.inverse(), f), AlgebraAutomorphism::identity(b)), 1e-12);
  EXPECT_LT(distance(compose(f, f)(x), f(f(x))), 1e-12);
}

TEST(AlgebraAutomorphism, RejectsPermutationAcrossSizes) {
  CStarAlgebra b = sample_algebra();
  EXPECT_THROW(AlgebraAutomorphism(b, {1, 0, 2}), StructuralError);
}

TEST(AlgebraAutomorphism, SpatialImplementation) {
  Rng rng(8);
  CStarAlgebra b = sample_algebra();
  AlgebraAutomorphism f(b, {0, 2, 1}, {Matrix::Identity(1, 1), random_unitary(2, rng), random_unitary(2, rng)});
  Matrix v = f.spatial_implementation();
  auto x = b.random(rng);
  EXPECT_LT((v.adjoint() * x.block_diagonal() * v - f(x).block_diagonal()).norm(), 1e-12);
}

TEST(Spectral, RankAndRange) {
  Rng rng(9);
  Matrix a = random_matrix(6, 2, rng) * random_matrix(2, 5, rng);
  EXPECT_EQ(numerical_rank(a), 2);
  Matrix w = orthonormal_range(a);
  EXPECT_EQ(w.cols(), 2);
  EXPECT_LT((w * w.adjoint() * a - a).norm(), 1e-12);
  EXPECT_TRUE(is_psd(a * a.adjoint()));
}
