#include <gtest/gtest.h>

#include <Eigen/LU>

#include "pimsner/bogoliubov.hpp"

using namespace pimsner;

namespace {

struct FlipInstance {
  CStarAlgebra b{std::vector<int>{1, 1}};
  HilbertBimodule h = make_bimodule(b, {3, 3}, {{2, 1}, {1, 2}});
  AlgebraAutomorphism flip{b, {1, 0}};
};

Matrix cyclic_shift(int d) {
  Matrix u = Matrix::Zero(d, d);
  for (int i = 0; i < d; ++i) u((i + 1) % d, i) = 1.0;
  return u;
}

// rank of the complex span, computed without Gram-Schmidt
Index lu_rank(const Matrix& m) {
  Eigen::FullPivLU<Matrix> lu(m);
  lu.setThreshold(1e-10);
  return lu.rank();
}

// dim_C of K^(x)k: the span of elementary tensors of a complex basis of K
int tensor_power_rank(const FockPtr& f, const Matrix& kbasis, int k) {
  if (k == 0) return f->base().dimension();
  std::vector<Vector> cur;
  for (Index c = 0; c < kbasis.cols(); ++c) cur.push_back(kbasis.col(c));
  for (int lvl = 1; lvl < k; ++lvl) {
    std::vector<Vector> next;
    for (Index c = 0; c < kbasis.cols(); ++c)
      for (const auto& y : cur) next.push_back(f->tensor(lvl).tensor(kbasis.col(c), y));
    cur = std::move(next);
  }
  Matrix m(cur.front().size(), static_cast<Index>(cur.size()));
  for (std::size_t i = 0; i < cur.size(); ++i) m.col(static_cast<Index>(i)) = cur[i];
  return static_cast<int>(lu_rank(m));
}

void expect_passed(const VerificationReport& r) {
  for (const auto& c : r.checks())
    EXPECT_EQ(c.status, CheckStatus::pass) << r.suite() << ": " << c.name << " residual " << c.residual;
}

}  // namespace

TEST(Bogoliubov, FlipTwistValidates) {
  FlipInstance in;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Rng rng(seed);
    BogoliubovMap m = permutation_twist(in.h, in.flip, rng);
    expect_passed(validate_bogoliubov(m));
    EXPECT_LT((m.u.adjoint() * m.u - Matrix::Identity(6, 6)).norm(), 1e-12);
  }
}

TEST(Bogoliubov, UntwistedUnitaryIsRejected) {
  FlipInstance in;
  Rng rng(5);
  Matrix u = random_unitary(in.h.dimension(), rng);
  VerificationReport r = validate_bogoliubov({in.h, u, in.flip});
  EXPECT_FALSE(r.passed());
  EXPECT_EQ(r.find("left action twisted by beta")->status, CheckStatus::fail);
  EXPECT_THROW(make_bogoliubov(in.h, u, in.flip), ValidationError);
}

TEST(Bogoliubov, IdentityWithFlipIsRejected) {
  FlipInstance in;
  Matrix u = Matrix::Identity(6, 6);
  EXPECT_FALSE(validate_bogoliubov({in.h, u, in.flip}).passed());
  EXPECT_TRUE(validate_bogoliubov({in.h, u, AlgebraAutomorphism::identity(in.b)}).passed());
}

TEST(Bogoliubov, ShapeMismatchIsStructural) {
  FlipInstance in;
  EXPECT_THROW(validate_bogoliubov({in.h, Matrix::Identity(5, 5), in.flip}), StructuralError);
  EXPECT_THROW(validate_bogoliubov({in.h, Matrix::Identity(6, 6), AlgebraAutomorphism::identity(CStarAlgebra({2}))}),
               StructuralError);
}

TEST(Bogoliubov, TwistNeedsInvariantMultiplicities) {
  CStarAlgebra b({1, 1});
  HilbertBimodule h = make_bimodule(b, {2, 1}, {{2, 0}, {0, 1}});
  Rng rng(1);
  EXPECT_THROW(permutation_twist(h, AlgebraAutomorphism(b, {1, 0}), rng), PreconditionError);
}

TEST(Bogoliubov, AugmentationFixesXi) {
  FlipInstance in;
  Rng rng(7);
  BogoliubovMap m = permutation_twist(in.h, in.flip, rng);
  AugmentedBogoliubov a = augment_bogoliubov(m);
  EXPECT_EQ(a.map.h.dimension(), 8);
  expect_passed(validate_bogoliubov(a.map));
  EXPECT_LT((a.map.u * a.xi - a.xi).norm(), 1e-12);
  EXPECT_LT((a.map.u * a.embed_h - a.embed_h * m.u).norm(), 1e-12);
}

TEST(FockExtension, IdentityExtendsToIdentity) {
  FlipInstance in;
  BogoliubovMap m = make_bogoliubov(in.h, Matrix::Identity(6, 6), AlgebraAutomorphism::identity(in.b));
  auto f = FockSpace::build(in.h, 3);
  FockExtension e = fock_extension(f, m);
  expect_passed(e.report);
  EXPECT_LT((e.op.dense() - Matrix::Identity(f->dimension(), f->dimension())).norm(), 1e-10);
}

TEST(FockExtension, ActsOnElementaryTensors) {
  FlipInstance in;
  Rng rng(11);
  BogoliubovMap m = permutation_twist(in.h, in.flip, rng);
  auto f = FockSpace::build(in.h, 3);
  FockExtension e = fock_extension(f, m);
  expect_passed(e.report);
  const Matrix fu = e.op.dense();
  for (int s = 0; s < 4; ++s) {
    Vector x = in.h.random_vector(rng), y = in.h.random_vector(rng), w = in.h.random_vector(rng);
    Vector t2 = f->tensor(1).tensor(x, y);
    Vector t3 = f->tensor(2).tensor(w, t2);
    Vector ft3 = f->tensor(2).tensor(m.u * w, f->tensor(1).tensor(m.u * x, m.u * y));
    EXPECT_LT((fu * f->embed(t3, 3) - f->embed(ft3, 3)).norm(), 1e-10 * ft3.norm());
  }
  EXPECT_LT((fu.adjoint() * fu - Matrix::Identity(f->dimension(), f->dimension())).norm(), 1e-10);
}

TEST(FockExtension, AugmentedExtensionCommutesWithL) {
  FlipInstance in;
  Rng rng(13);
  AugmentedBogoliubov a = augment_bogoliubov(permutation_twist(in.h, in.flip, rng));
  auto f = FockSpace::build(a.map.h, 3);
  FockExtension e = fock_extension(f, a.map, &a.xi);
  expect_passed(e.report);
  ASSERT_NE(e.report.find("F(U) commutes with L"), nullptr);
}

TEST(FockExtension, WrongModuleIsStructural) {
  FlipInstance in;
  Rng rng(1);
  auto f = FockSpace::build(scalar_bimodule(2), 2);
  EXPECT_THROW(fock_extension(f, permutation_twist(in.h, in.flip, rng)), StructuralError);
}

TEST(KpSubspace, ShiftGrowsToFullSpace) {
  HilbertBimodule h = scalar_bimodule(3);
  Matrix u = cyclic_shift(3);
  for (int p = 1; p <= 5; ++p) {
    KpSubspace kp = kp_subspace(h, {h.unit_vector(0)}, u, p);
    // Krylov oracle
    Matrix kry(3, p);
    Vector v = h.unit_vector(0);
    for (int i = 0; i < p; ++i, v = u * v) kry.col(i) = v;
    EXPECT_EQ(kp.dimension, lu_rank(kry));
    EXPECT_EQ(kp.dimension, std::min(p, 3));
    expect_passed(kp.report);
  }
}

TEST(KpSubspace, DimensionAtMostPTimesK) {
  FlipInstance in;
  Rng rng(17);
  BogoliubovMap m = permutation_twist(in.h, in.flip, rng);
  const std::vector<Vector> gens{in.h.random_vector(rng)};
  const int dk = kp_subspace(in.h, gens, m.u, 1).dimension;
  for (int p = 1; p <= 6; ++p) {
    KpSubspace kp = kp_subspace(in.h, gens, m.u, p);
    EXPECT_LE(kp.dimension, p * dk);
    EXPECT_LE(kp.dimension, in.h.dimension());
    expect_passed(kp.report);
  }
}

TEST(KpSubspace, RejectsNonPositiveP) {
  HilbertBimodule h = scalar_bimodule(2);
  EXPECT_THROW(kp_subspace(h, {h.unit_vector(0)}, Matrix::Identity(2, 2), 0), PreconditionError);
}

TEST(Compression, ChannelsReconstructWords) {
  FlipInstance in;
  Rng rng(19);
  BogoliubovMap m = permutation_twist(in.h, in.flip, rng);
  auto f = FockSpace::build(in.h, 3);
  const std::vector<Vector> gens{in.h.unit_vector(0) + in.h.unit_vector(4)};
  for (int n = 1; n <= 3; ++n)
    for (int p = 1; p <= 3; ++p) {
      KpSubspace kp = kp_subspace(in.h, gens, m.u, p);
      CompressionResult c = compression_channels(f, n, kp.span, rng, 3);
      expect_passed(c.report);
      ASSERT_TRUE(c.report.data().contains("literal_annihilation_residual"));
      // oracle on every level
      const Matrix kb = orthonormal_range(kp.span.projection);
      for (int k = 0; k <= n; ++k)
        EXPECT_EQ(c.channels.level_localized_dimension(k), tensor_power_rank(f, kb, k)) << "n " << n << " k " << k;
    }
}

TEST(Compression, LevelOutOfRange) {
  HilbertBimodule h = scalar_bimodule(2);
  auto f = FockSpace::build(h, 2);
  KpSubspace kp = kp_subspace(h, {h.unit_vector(0)}, Matrix::Identity(2, 2), 1);
  Rng rng(1);
  EXPECT_THROW(compression_channels(f, 0, kp.span, rng), PreconditionError);
  EXPECT_THROW(compression_channels(f, 3, kp.span, rng), PreconditionError);
}

TEST(EntropyBound, FormulaValue) {
  EXPECT_DOUBLE_EQ(entropy_bound(2, 3, 2, 2), 144.0);
  EXPECT_DOUBLE_EQ(entropy_bound(1, 1, 1, 1), 1.0);
  EXPECT_DOUBLE_EQ(entropy_bound(3, 2, 2, 3), 3 * 8 * 2 * 27.0);
}

TEST(EntropyBound, ShiftMeasuredDimensionsMatchOracle) {
  HilbertBimodule h = scalar_bimodule(3);
  BogoliubovMap m = make_bogoliubov(h, cyclic_shift(3), AlgebraAutomorphism::identity(h.base()));
  auto f = FockSpace::build(h, 3);
  Rng rng(23);
  for (int n = 1; n <= 3; ++n) {
    EntropyBoundReport e = entropy_bound_report(f, m, {h.unit_vector(0)}, n, 6, rng);
    ASSERT_EQ(e.rows.size(), 6u);
    EXPECT_EQ(e.saturation, 3);
    for (const auto& r : e.rows) {
      const long d = std::min(r.p, 3);
      long oracle = 0, pw = 1;
      for (int k = 0; k <= n; ++k, pw *= d) oracle += pw;
      EXPECT_EQ(r.dim_kp, d);
      EXPECT_EQ(r.measured, oracle);
      EXPECT_DOUBLE_EQ(r.crude_bound, static_cast<double>(oracle));
    }
    EXPECT_EQ(e.report.find("log-dim/p non-increasing past saturation")->status, CheckStatus::pass);
  }
}

TEST(EntropyBound, StatedBoundFailsWhenKIsOneDimensional) {
  // dim V = dim K = 1, n = 2, p = 1: three levels against n p^n = 2
  HilbertBimodule h = scalar_bimodule(3);
  BogoliubovMap m = make_bogoliubov(h, cyclic_shift(3), AlgebraAutomorphism::identity(h.base()));
  auto f = FockSpace::build(h, 2);
  Rng rng(29);
  EntropyBoundReport e = entropy_bound_report(f, m, {h.unit_vector(0)}, 2, 2, rng);
  EXPECT_EQ(e.rows[0].measured, 3);
  EXPECT_EQ(e.report.find("measured dimension within the stated bound")->status, CheckStatus::fail);
  EXPECT_EQ(e.report.find("measured dimension within the crude bound")->status, CheckStatus::pass);
}

TEST(EntropyBound, GridOnTwistedInstance) {
  FlipInstance in;
  Rng rng(31);
  BogoliubovMap m = permutation_twist(in.h, in.flip, rng);
  auto f = FockSpace::build(in.h, 3);
  const std::vector<Vector> gens{in.h.unit_vector(0) + in.h.unit_vector(4)};
  for (int n = 1; n <= 3; ++n) {
    EntropyBoundReport e = entropy_bound_report(f, m, gens, n, 6, rng);
    EXPECT_EQ(e.dim_v, 2);
    EXPECT_GE(e.dim_k, 2);
    expect_passed(e.report);
    EXPECT_GT(e.saturation, 0);
    for (const auto& r : e.rows) {
      EXPECT_LE(r.measured, r.bound);
      EXPECT_LE(r.measured, r.crude_bound);
    }
  }
}

TEST(EntropyBound, Preconditions) {
  HilbertBimodule h = scalar_bimodule(2);
  BogoliubovMap m = make_bogoliubov(h, Matrix::Identity(2, 2), AlgebraAutomorphism::identity(h.base()));
  auto f = FockSpace::build(h, 2);
  Rng rng(1);
  EXPECT_THROW(entropy_bound_report(f, m, {h.unit_vector(0)}, 3, 2, rng), PreconditionError);
  EXPECT_THROW(entropy_bound_report(f, m, {h.unit_vector(0)}, 1, 0, rng), PreconditionError);
}
