#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pimsner/hilbmod.hpp"

using namespace pimsner;

namespace {

CStarAlgebra two_blocks() { return CStarAlgebra({1, 2}); }

HilbertBimodule sample_module(Rng& rng) {
  // c = [[1,1],[2,0]]: r = (3, 2)
  return oracle::random_bimodule(two_blocks(), {{1, 1}, {2, 0}}, rng);
}

}  // namespace

TEST(HilbertBimodule, MultiplicityEquationEnforced) {
  EXPECT_THROW(HilbertBimodule(two_blocks(), {2, 2}, {{1, 1}, {2, 0}}), StructuralError);
  HilbertBimodule h(two_blocks(), {3, 2}, {{1, 1}, {2, 0}});
  EXPECT_EQ(h.dimension(), 3 * 1 + 2 * 2);
}

TEST(HilbertBimodule, RandomModuleValidates) {
  Rng rng(11);
  auto h = sample_module(rng);
  auto rep = validate_bimodule(h, rng);
  EXPECT_TRUE(rep.passed()) << rep.to_text();
}

TEST(HilbertBimodule, NonUnitaryBasisChangeIsRejected) {
  Rng rng(12);
  Matrix bad = random_matrix(3, 3, rng);
  HilbertBimodule h(two_blocks(), {3, 2}, {{1, 1}, {2, 0}}, {bad, Matrix()});
  auto rep = validate_bimodule(h, rng);
  EXPECT_FALSE(rep.passed());
  EXPECT_EQ(rep.find("basis change unitary")->status, CheckStatus::fail);
  EXPECT_THROW(make_bimodule(two_blocks(), {3, 2}, {{1, 1}, {2, 0}}, {bad, Matrix()}), ValidationError);
}

TEST(HilbertBimodule, InnerProductProperties) {
  Rng rng(13);
  auto h = sample_module(rng);
  const auto& B = h.base();
  for (int s = 0; s < 5; ++s) {
    Vector x = h.random_vector(rng), y = h.random_vector(rng);
    auto b = B.random(rng);
    EXPECT_LT(distance(h.inner(x, y).adjoint(), h.inner(y, x)), 1e-12);
    EXPECT_LT(distance(h.inner(x, h.right_act(y, b)), h.inner(x, y) * b), 1e-12);
    EXPECT_LT(distance(h.inner(h.left_act(b, x), y), h.inner(x, h.left_act(b.adjoint(), y))), 1e-12);
    EXPECT_TRUE(h.inner(x, x).is_positive());
    // x = 0 iff <x,x> = 0 on a sample
    EXPECT_GT(h.inner(x, x).norm(), 0.0);
  }
}

TEST(HilbertBimodule, MatricesMatchActions) {
  Rng rng(14);
  auto h = sample_module(rng);
  auto b = h.base().random(rng);
  Vector x = h.random_vector(rng);
  EXPECT_LT((h.left_matrix(b) * x - h.left_act(b, x)).norm(), 1e-12);
  EXPECT_LT((h.right_matrix(b) * x - h.right_act(x, b)).norm(), 1e-12);
}

TEST(HilbertBimodule, LeftKernel) {
  // block 1 of B = C (+) C acts as zero
  CStarAlgebra b({1, 1});
  HilbertBimodule h(b, {1, 0}, {{1, 0}, {0, 0}});
  EXPECT_FALSE(h.left_injective());
  ASSERT_EQ(h.left_kernel_blocks().size(), 1u);
  EXPECT_EQ(h.left_kernel_blocks()[0], 1);
}

TEST(ModuleVector, ArithmeticAndActions) {
  Rng rng(15);
  auto h = sample_module(rng);
  ModuleVector x(h, h.random_vector(rng)), y(h, h.random_vector(rng));
  auto b = h.base().random(rng);
  EXPECT_LT(distance(inner(x + y, x), inner(x, x) + inner(y, x)), 1e-12);
  EXPECT_LT((x * b).flat().isApprox(h.right_act(x.flat(), b)) ? 0.0 : 1.0, 0.5);
  EXPECT_NEAR(x.norm(), std::sqrt(inner(x, x).norm()), 1e-12);
}

TEST(ModuleOperator, LeftActionIsRightLinear) {
  Rng rng(16);
  auto h = sample_module(rng);
  ModuleOperator t(h, h.left_matrix(h.base().random(rng)));
  EXPECT_LT(t.right_linearity_defect(), 1e-12);
  ModuleOperator s(h, random_matrix(h.dimension(), h.dimension(), rng));
  EXPECT_GT(s.right_linearity_defect(), 1e-3);
}

TEST(InteriorTensor, MultiplicitiesCompose) {
  Rng rng(17);
  auto h = sample_module(rng);
  auto k = oracle::random_bimodule(two_blocks(), {{0, 1}, {1, 1}}, rng);
  InteriorTensor t(h, k);
  std::vector<int> r;
  std::vector<std::vector<int>> c;
  tensor_multiplicities(h, k, r, c);
  EXPECT_EQ(t.module().right_multiplicities(), r);
  EXPECT_EQ(t.module().left_multiplicities(), c);
  // c_out = c_K c_H
  EXPECT_EQ(c[0][0], 0 * 1 + 1 * 2);
  EXPECT_EQ(c[1][1], 1 * 1 + 1 * 0);
}

TEST(InteriorTensor, AgreesWithGramQuotient) {
  Rng rng(18);
  auto h = sample_module(rng);
  auto k = oracle::random_bimodule(two_blocks(), {{1, 0}, {1, 1}}, rng);
  InteriorTensor t(h, k);
  QuotientModule q = quotient_bimodule(oracle::algebraic_tensor(h, k));
  EXPECT_TRUE(q.report.passed()) << q.report.to_text();
  EXPECT_EQ(q.module.right_multiplicities(), t.module().right_multiplicities());
  EXPECT_EQ(q.module.left_multiplicities(), t.module().left_multiplicities());
  for (int s = 0; s < 6; ++s) {
    Vector h1 = h.random_vector(rng), h2 = h.random_vector(rng), k1 = k.random_vector(rng), k2 = k.random_vector(rng);
    auto ref = oracle::tensor_inner(h, k, h1, k1, h2, k2);
    EXPECT_LT(distance(t.module().inner(t.tensor(h1, k1), t.tensor(h2, k2)), ref), 1e-10);
    // the quotient's class of h1 (x) k1 has the same inner products
    Vector x1 = oracle::kron(k1, h1), x2 = oracle::kron(k2, h2);
    EXPECT_LT(distance(q.module.inner(q.coords * x1, q.coords * x2), ref), 1e-10);
  }
}

TEST(InteriorTensor, BalancedAndBimodular) {
  Rng rng(19);
  auto h = sample_module(rng);
  auto k = sample_module(rng);
  InteriorTensor t(h, k);
  const auto& B = h.base();
  Vector x = h.random_vector(rng), y = k.random_vector(rng);
  auto b = B.random(rng);
  EXPECT_LT((t.tensor(h.right_act(x, b), y) - t.tensor(x, k.left_act(b, y))).norm(), 1e-12);
  EXPECT_LT((t.module().left_act(b, t.tensor(x, y)) - t.tensor(h.left_act(b, x), y)).norm(), 1e-12);
  EXPECT_LT((t.module().right_act(t.tensor(x, y), b) - t.tensor(x, k.right_act(y, b))).norm(), 1e-12);
  EXPECT_LT((t.left_factor_matrix(x) * y - t.tensor(x, y)).norm(), 1e-12);
  EXPECT_LT((t.right_factor_matrix(y) * x - t.tensor(x, y)).norm(), 1e-12);
  EXPECT_TRUE(validate_bimodule(t.module(), rng).passed());
}

TEST(InteriorTensor, TrivialBimoduleIsUnit) {
  Rng rng(20);
  auto h = sample_module(rng);
  InteriorTensor t(trivial_bimodule(h.base()), h);
  EXPECT_EQ(t.module().dimension(), h.dimension());
}

TEST(DirectSum, EmbeddingsAreIsometricBimoduleMaps) {
  Rng rng(21);
  auto h = sample_module(rng);
  auto k = oracle::random_bimodule(two_blocks(), {{0, 1}, {1, 0}}, rng);
  DirectSum s = direct_sum(h, k);
  EXPECT_EQ(s.module.dimension(), h.dimension() + k.dimension());
  auto b = h.base().random(rng);
  Vector x = h.random_vector(rng), y = k.random_vector(rng);
  EXPECT_LT(distance(s.module.inner(s.embed_first * x, s.embed_first * x), h.inner(x, x)), 1e-12);
  EXPECT_LT(s.module.inner(s.embed_first * x, s.embed_second * y).norm(), 1e-12);
  EXPECT_LT((s.module.left_act(b, s.embed_second * y) - s.embed_second * k.left_act(b, y)).norm(), 1e-12);
  EXPECT_TRUE(validate_bimodule(s.module, rng).passed());
}

TEST(Augment, XiIsUnitVector) {
  Rng rng(22);
  auto h = sample_module(rng);
  Augmented a = augment(h);
  EXPECT_LT(distance(a.sum.module.inner(a.xi, a.xi), h.base().identity()), 1e-12);
  auto b = h.base().random(rng);
  EXPECT_LT(distance(a.sum.module.inner(a.xi, a.sum.module.left_act(b, a.xi)), b), 1e-12);
}

TEST(CpBimodule, IdentityMapGivesTrivialBimodule) {
  CStarAlgebra a({1, 2});
  PointedBimodule p = cp_bimodule(a, CPLinearMap::identity(a));
  EXPECT_TRUE(p.report.passed()) << p.report.to_text();
  EXPECT_EQ(p.module.dimension(), a.dimension());
}

TEST(CpBimodule, ConditionalExpectation) {
  CStarAlgebra a({2});
  auto e = CPLinearMap::from_function(
      a, a, [&](const AlgebraElement& x) { return (x.trace() / 2.0) * a.identity(); }, true, true);
  PointedBimodule p = cp_bimodule(a, e);
  EXPECT_TRUE(p.report.passed()) << p.report.to_text();
  // L^2(M_2, tr/2) (x)_C M_2 = C^4 (x) M_2: eight columns of C^2, left multiplicity 8/2
  EXPECT_EQ(p.module.right_multiplicity(0), 8);
  EXPECT_EQ(p.module.left_multiplicity(0, 0), 4);
}

TEST(CpBimodule, NonCompletelyPositiveMapThrows) {
  CStarAlgebra a({2});
  EXPECT_THROW(cp_bimodule(a, CPLinearMap::transpose(a)), ValidationError);
  bool ok = true;
  auto p = cp_bimodule_checked(a, CPLinearMap::transpose(a), ok);
  EXPECT_FALSE(ok);
  EXPECT_FALSE(p.report.passed());
}

TEST(CpBimodule, GnsOfNonFaithfulStateWarns) {
  CStarAlgebra a({1, 1});
  Matrix one = Matrix::Identity(1, 1), zero = Matrix::Zero(1, 1);
  auto rho = state_from_density(a, {one, zero});
  PointedBimodule p = gns_bimodule(a, rho);
  EXPECT_TRUE(p.report.data().contains("warning"));
}

TEST(GramSchmidt, OutputsAreOrthonormalOverB) {
  Rng rng(23);
  auto h = sample_module(rng);
  std::vector<Vector> x{h.random_vector(rng), h.random_vector(rng)};
  x.push_back(x[0] + x[1]);
  auto basis = gram_schmidt(h, x);
  auto mins = minimal_projections(h.base());
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < basis.size(); ++j) {
      auto ip = h.inner(basis[i], basis[j]);
      if (i == j) {
        bool minimal = false;
        for (const auto& m : mins) minimal = minimal || distance(ip, m) < 1e-9;
        EXPECT_TRUE(minimal);
      } else {
        EXPECT_LT(ip.norm(), 1e-9);
      }
    }
}

TEST(GramSchmidt, ProjectionIsBimoduleSpan) {
  Rng rng(24);
  auto h = sample_module(rng);
  std::vector<Vector> x{h.random_vector(rng)};
  auto span = submodule_projection(h, bimodule_generators(h, x));
  const Matrix& p = span.projection;
  EXPECT_LT((p * p - p).norm(), 1e-9);
  EXPECT_LT((p - p.adjoint()).norm(), 1e-9);
  EXPECT_LT((p * x[0] - x[0]).norm(), 1e-9);
  for (const auto& e : h.base().basis()) {
    EXPECT_LT((p * h.right_matrix(e) - h.right_matrix(e) * p).norm(), 1e-9);
    EXPECT_LT((p * h.left_matrix(e) - h.left_matrix(e) * p).norm(), 1e-9);
  }
  EXPECT_EQ(span.complex_dimension(), static_cast<int>(numerical_rank(p, 1e-9)));
}

TEST(GramSchmidt, RightSpanBasisContainsInputs) {
  Rng rng(25);
  auto h = sample_module(rng);
  std::vector<Vector> x{h.random_vector(rng)};
  Matrix w = right_span_basis(h, x);
  EXPECT_LT((w * w.adjoint() * x[0] - x[0]).norm(), 1e-10);
}

TEST(Localization, TraceLocalization) {
  Rng rng(26);
  auto h = sample_module(rng);
  CStarAlgebra b = h.base();
  Matrix d0 = Matrix::Constant(1, 1, 1.0 / 3.0), d1 = Matrix::Identity(2, 2) / 3.0;
  auto tau = state_from_density(b, {d0, d1});
  Localization loc = localize(h, tau);
  Vector x = h.random_vector(rng), y = h.random_vector(rng);
  EXPECT_LT(std::abs((x.adjoint() * loc.gram * y)(0, 0) - tau(h.inner(x, y))), 1e-12);
  Matrix t = h.left_matrix(b.random(rng));
  Matrix ta = loc.adjoint(t);
  EXPECT_LT(std::abs((x.adjoint() * loc.gram * (t * y))(0, 0) - (( ta * x).adjoint() * loc.gram * y)(0, 0)), 1e-10);
  Matrix zero = Matrix::Zero(2, 2);
  zero(0, 0) = 2.0 / 3.0;
  auto nf = state_from_density(b, {d0, zero});
  EXPECT_THROW(localize(h, nf), PreconditionError);
}

TEST(Localization, DimensionCountsRanks) {
  Rng rng(27);
  auto h = sample_module(rng);
  Matrix p = Matrix::Identity(h.dimension(), h.dimension());
  // K (x)_B C^(1+2) with K = H has dimension sum_j r_j n_j / n_j * n_j... = sum_j r_j
  EXPECT_EQ(localized_dimension(h, p), 3 + 2);
}
