#include <gtest/gtest.h>

#include "oracles.hpp"
#include "pimsner/fock.hpp"

using namespace pimsner;

namespace {

HilbertBimodule sample_module(Rng& rng) {
  return oracle::random_bimodule(CStarAlgebra({1, 2}), {{1, 1}, {1, 0}}, rng);
}

}  // namespace

TEST(FockSpace, LevelDimensionsOfScalarModule) {
  auto f = FockSpace::build(scalar_bimodule(2), 3);
  EXPECT_EQ(f->level_dimensions(), (std::vector<int>{1, 2, 4, 8}));
  EXPECT_EQ(f->dimension(), 15);
  EXPECT_EQ(f->offset(3), 7);
}

TEST(FockSpace, PredictedDimensionsMatchBuilt) {
  Rng rng(31);
  auto h = sample_module(rng);
  auto pred = FockSpace::predicted_level_dimensions(h, 4);
  auto f = FockSpace::build(h, 4);
  auto dims = f->level_dimensions();
  ASSERT_EQ(pred.size(), dims.size());
  for (std::size_t i = 0; i < dims.size(); ++i) EXPECT_EQ(pred[i], dims[i]);
}

TEST(FockSpace, CapRaisesResourceError) {
  EXPECT_THROW(FockSpace::build(scalar_bimodule(3), 12, 20000), ResourceError);
}

TEST(FockOperator, CreationMatchesTensorOracle) {
  Rng rng(32);
  auto h = sample_module(rng);
  auto f = FockSpace::build(h, 2);
  Vector a = h.random_vector(rng), b = h.random_vector(rng), x = h.random_vector(rng), y = h.random_vector(rng);
  auto la = FockOperator::creation(f, a), lb = FockOperator::creation(f, b);
  Vector u = f->level_part(la.apply(f->embed(x, 1)), 2), v = f->level_part(lb.apply(f->embed(y, 1)), 2);
  EXPECT_LT(distance(f->level(2).inner(u, v), oracle::tensor_inner(h, h, a, x, b, y)), 1e-10);
}

TEST(FockOperator, CreationNormIsModuleNorm) {
  Rng rng(33);
  auto h = sample_module(rng);
  auto f = FockSpace::build(h, 3);
  Vector a = h.random_vector(rng);
  EXPECT_NEAR(FockOperator::creation(f, a).norm(), h.norm(a), 1e-9);
}

TEST(FockOperator, AdjointAndProducts) {
  Rng rng(34);
  auto h = sample_module(rng);
  auto f = FockSpace::build(h, 2);
  auto l = FockOperator::creation(f, h.random_vector(rng));
  auto m = FockOperator::left(f, h.base().random(rng));
  Matrix d = (l * m).dense();
  EXPECT_LT((d - l.dense() * m.dense()).norm(), 1e-12);
  EXPECT_LT(((l * m).adjoint().dense() - d.adjoint()).norm(), 1e-12);
  EXPECT_EQ(l.degrees(), (std::set<int>{1}));
}

TEST(FockOperator, TruncatedCreationRelations) {
  Rng rng(35);
  auto h = sample_module(rng);
  auto f = FockSpace::build(h, 3);
  auto rep = creation_relations_check(f, {h.random_vector(rng), h.random_vector(rng), h.random_vector(rng)}, rng);
  EXPECT_TRUE(rep.passed()) << rep.to_text();
}

TEST(Words, OverflowFreeLevel) {
  // product order; applied right to left
  EXPECT_EQ(overflow_free_level(std::vector<int>{1, 1, -1}, 5), 4);
  EXPECT_EQ(overflow_free_level(std::vector<int>{-1, 1, 1}, 5), 3);
  EXPECT_EQ(overflow_free_level(std::vector<int>{-1, -1}, 5), 5);
  EXPECT_EQ(overflow_free_level(std::vector<int>{1, 1, 1}, 2), -1);
}

TEST(Words, ApplyMatchesProduct) {
  Rng rng(36);
  auto h = sample_module(rng);
  auto f = FockSpace::build(h, 3);
  const auto& B = h.base();
  WordSpec w;
  w.coefficients = {B.random(rng), B.random(rng), B.random(rng), B.random(rng)};
  w.letters = {{h.random_vector(rng), true}, {h.random_vector(rng), false}, {h.random_vector(rng), true}};
  Matrix cols = f->domain_columns(2);
  EXPECT_LT((apply_word(f, w, cols) - word(f, w).dense() * cols).norm(), 1e-11);
  EXPECT_EQ(w.degree(), 1);
}

TEST(Expectations, AllPropertiesHold) {
  Rng rng(37);
  auto h = sample_module(rng);
  Augmented a = augment(h);
  auto f = FockSpace::build(a.sum.module, 3);
  auto rep = expectation_check(f, rng, 6, &a.xi);
  EXPECT_TRUE(rep.passed()) << rep.to_text();
}

TEST(Expectations, VacuumExpectationOfNormalWords) {
  Rng rng(38);
  auto h = sample_module(rng);
  auto f = FockSpace::build(h, 3);
  Vector a = h.random_vector(rng), b = h.random_vector(rng), c = h.random_vector(rng), d = h.random_vector(rng);
  // E(l(a)* l(b)* l(c) l(d)) = <a, <b, c> d>
  WordSpec w = normal_word(h.base(), {}, {});
  w.letters = {{a, false}, {b, false}, {c, true}, {d, true}};
  w.coefficients.assign(5, h.base().identity());
  auto e = vacuum_expectation(word(f, w));
  EXPECT_LT(distance(e, h.inner(a, h.left_act(h.inner(b, c), d))), 1e-10);
}

class IdealLevels : public ::testing::TestWithParam<int> {};

TEST_P(IdealLevels, GeneratorsAndRankSplitting) {
  Rng rng(39);
  auto h = oracle::random_bimodule(CStarAlgebra({1, 1}), {{1, 1}, {1, 0}}, rng);
  auto f = FockSpace::build(h, 3);
  auto rep = ideal_structure_check(f, GetParam(), rng, 3);
  EXPECT_TRUE(rep.passed()) << rep.to_text();
  EXPECT_NE(rep.find("rank splitting"), nullptr);
}

INSTANTIATE_TEST_SUITE_P(Fock, IdealLevels, ::testing::Values(1, 2, 3));

TEST(Ideal, LevelOutOfRangeIsPrecondition) {
  Rng rng(40);
  auto f = FockSpace::build(scalar_bimodule(2), 2);
  EXPECT_EQ(ideal_structure_check(f, 3, rng).exit_code(), 2);
}

struct Triple {
  int n, k, j;
};

class Factorization : public ::testing::TestWithParam<Triple> {};

TEST_P(Factorization, RegroupingIsUnitary) {
  Rng rng(41);
  auto h = oracle::random_bimodule(CStarAlgebra({1, 1}), {{1, 1}, {1, 0}}, rng);
  auto p = GetParam();
  auto rep = fock_factorization_check(h, p.n, p.k, p.j, rng);
  EXPECT_TRUE(rep.passed()) << rep.to_text();
}

INSTANTIATE_TEST_SUITE_P(Fock, Factorization,
                         ::testing::Values(Triple{0, 0, 0}, Triple{1, 1, 0}, Triple{1, 1, 1}, Triple{1, 2, 0},
                                           Triple{2, 1, 1}, Triple{2, 0, 2}, Triple{0, 3, 0}));

TEST(Toeplitz, EndomorphismChecks) {
  Rng rng(42);
  auto h = sample_module(rng);
  Augmented a = augment(h);
  auto f = FockSpace::build(a.sum.module, 3);
  auto rep = toeplitz_endomorphism_check(f, a.xi, rng, 4);
  EXPECT_TRUE(rep.passed()) << rep.to_text();
}

TEST(Toeplitz, RequiresDegreeZero) {
  Rng rng(43);
  auto h = sample_module(rng);
  Augmented a = augment(h);
  auto f = FockSpace::build(a.sum.module, 2);
  auto l = FockOperator::creation(f, a.xi);
  EXPECT_THROW(toeplitz_endomorphism(l, l), PreconditionError);
}
