#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "aes/fixtures.hpp"
#include "aes/system.hpp"
#include "support.hpp"

using namespace aes;

TEST(Matrix, BasicAlgebra) {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{0, 1}, {1, 0}};
  EXPECT_EQ(a * b, (Matrix{{2, 1}, {4, 3}}));
  EXPECT_EQ(a + b, (Matrix{{1, 3}, {4, 4}}));
  EXPECT_EQ(a.transpose(), (Matrix{{1, 3}, {2, 4}}));
  EXPECT_EQ(a.norm_inf(), 7.0);
  const Vector x{1.0, -1.0};
  EXPECT_EQ(a * x, (Vector{-1.0, -1.0}));
  EXPECT_EQ(norm1(x), 2.0);
}

TEST(Matrix, RaggedInitializerIsRejected) { EXPECT_THROW((Matrix{{1, 2}, {3}}), InputError); }

TEST(Sector, Invariants) {
  EXPECT_NO_THROW(SectorBounds::bounded({1.0, 0.5}, {1.0, 2.0}));
  EXPECT_THROW(SectorBounds::bounded({2.0}, {1.0}), InputError);
  EXPECT_THROW(SectorBounds::bounded({0.0}, {1.0}), InputError);
  EXPECT_THROW(SectorBounds::bounded({1.0, 1.0}, {1.0}), InputError);
  EXPECT_THROW(SectorBounds::positive_up_to({0.0}), InputError);
  const auto s = SectorBounds::positive_up_to({0.5});
  EXPECT_THROW((void)s.delta(), InputError);
  EXPECT_EQ(s.d_beta(), (Matrix{{0.5}}));
}

TEST(Metzlerize, AlreadyMetzlerIsUnchanged) {
  const Matrix m{{-4, 0}, {1, -2}};
  EXPECT_EQ(metzlerize(m), m);
}

TEST(Metzlerize, OffDiagonalTakesAbsoluteValue) {
  EXPECT_EQ(metzlerize(Matrix{{-3, -2}, {-5, 1}}), (Matrix{{-3, 2}, {5, 1}}));
}

TEST(Metzlerize, FirstExampleAtTimeOne) {
  const auto sys = fixtures::example1_system();
  const Matrix a1 = sys.a().at(1.0);
  EXPECT_EQ(a1, (Matrix{{-16, 0}, {1, -7}}));
  EXPECT_EQ(metzlerize(a1), a1);
}

TEST(EntrywiseAbs, Examples) {
  EXPECT_EQ(entrywise_abs(Matrix{{-1, 2}, {0, -3}}), (Matrix{{1, 2}, {0, 3}}));
  EXPECT_EQ(entrywise_abs(Matrix(2, 2)), Matrix(2, 2));
  const Matrix b0 = fixtures::example1_system().delays()[0].b.at(0.0);
  EXPECT_EQ(b0, (Matrix{{0, 1.0 / 8}, {1.0 / 3, 0}}));
  EXPECT_EQ(entrywise_abs(b0), b0);
}

TEST(SupOnGrid, FirstExampleDelayMatrixIsDominated) {
  const auto sys = fixtures::example1_system();
  const Matrix s = sup_on_grid(sys.delays()[0].b, make_grid(20.0, 0.01));
  const Matrix bar = fixtures::example1_b_bound();
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_LE(s(i, j), bar(i, j));
}

TEST(SupOnGrid, ConstantMatrixIsItself) {
  const Matrix m{{-1, 2}, {3, -4}};
  EXPECT_EQ(sup_on_grid(MatrixExpr(m), make_grid(1.0, 0.1)), entrywise_abs(m));
}

TEST(SupOnGrid, SineMaximum) {
  const MatrixExpr m(1, {expr::Expression::parse("sin(t)")});
  EXPECT_NEAR(sup_on_grid(m, make_grid(2 * std::numbers::pi, 1e-3))(0, 0), 1.0, 1e-4);
}

TEST(SupOnGrid, MetzlerModeKeepsDiagonalSign) {
  const auto sys = fixtures::example1_system();
  const Matrix s = sup_on_grid(sys.a(), make_grid(10.0, 0.01), SupMode::Metzler);
  EXPECT_EQ(s(0, 0), -12.0);
  EXPECT_EQ(s(1, 1), -5.0);
  EXPECT_NEAR(s(1, 0), 10.0, 1e-12);
}

TEST(SupOnGrid, EmptyGridIsRejected) {
  EXPECT_THROW((void)sup_on_grid(MatrixExpr(Matrix{{1.0}}), {}), InputError);
}

TEST(MatrixExpr, FoldsConstantExpressions) {
  const MatrixExpr m(1, {expr::Expression::parse("1/3")});
  ASSERT_TRUE(m.is_constant());
  EXPECT_EQ(m.constant()(0, 0), 1.0 / 3.0);
}

TEST(Systems, DelayOrderingAndBounds) {
  const MatrixExpr a(Matrix{{-1.0}});
  const MatrixExpr b(Matrix{{0.5}});
  EXPECT_THROW(ContinuousSystem(a, {{1.0, b}, {1.0, b}}), InputError);
  EXPECT_THROW(ContinuousSystem(a, {{0.0, b}}), InputError);
  EXPECT_THROW(DiscreteSystem(a, {{2, b}, {1, b}}), InputError);
  EXPECT_THROW(ContinuousSystem(a, {{1.0, b}}, AssertedBounds{Matrix{{-1.0}}, {Matrix{{-0.5}}}}), InputError);
  EXPECT_THROW(ContinuousSystem(MatrixExpr(Matrix{{-1, 0}, {0, -1}}), {},
                                AssertedBounds{Matrix{{-1, -1}, {0, -1}}, {}}),
               InputError);
  EXPECT_THROW(DiscreteSystem(a, {}, AssertedBounds{Matrix{{-1.0}}, {}}), InputError);
  const ContinuousSystem ok(a, {{0.5, b}, {2.0, b}});
  EXPECT_EQ(ok.max_delay(), 2.0);
  EXPECT_TRUE(ok.is_constant());
}

TEST(Grids, Defaults) {
  const auto g = default_grid(1.0);
  EXPECT_EQ(g.front(), 0.0);
  EXPECT_NEAR(g.back(), 10.0, 1e-12);
  EXPECT_EQ(g.size(), 1001u);
  EXPECT_EQ(default_grid(0.0).size(), 1001u);
  EXPECT_EQ(default_step_grid(3).size(), 101u);
  EXPECT_EQ(default_step_grid(20).back(), 200.0);
}

TEST(CoreProperty, MetzlerizeIsIdempotent) {
  test::Gen gen(21);
  for (int k = 0; k < 200; ++k) {
    const Matrix m = gen.matrix(static_cast<std::size_t>(gen.integer(1, 6)), -5, 5);
    const Matrix once = metzlerize(m);
    EXPECT_EQ(metzlerize(once), once);
    EXPECT_TRUE(is_metzler(once));
    for (std::size_t i = 0; i < m.rows(); ++i) EXPECT_EQ(once(i, i), m(i, i));
  }
}

TEST(CoreProperty, AbsDominatesBothSigns) {
  test::Gen gen(22);
  for (int k = 0; k < 200; ++k) {
    const Matrix m = gen.matrix(static_cast<std::size_t>(gen.integer(1, 6)), -5, 5);
    const Matrix a = entrywise_abs(m);
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) {
        EXPECT_GE(a(i, j), m(i, j));
        EXPECT_GE(a(i, j), -m(i, j));
      }
  }
}

TEST(CoreProperty, GridSupremumDominatesEveryGridPoint) {
  test::Gen gen(23);
  const char* shapes[] = {"sin(t)", "cos(3*t)", "t-2", "exp(-t)", "-abs(t-1)"};
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = static_cast<std::size_t>(gen.integer(1, 4));
    std::vector<Entry> entries;
    for (std::size_t e = 0; e < n * n; ++e) {
      const double c = gen.uniform(-3, 3);
      entries.emplace_back(expr::Expression::parse(std::to_string(c) + "*" + shapes[gen.integer(0, 4)]));
    }
    const MatrixExpr m(n, std::move(entries));
    const auto grid = make_grid(gen.uniform(1, 5), 0.05);
    for (SupMode mode : {SupMode::Absolute, SupMode::Metzler}) {
      const Matrix s = sup_on_grid(m, grid, mode);
      for (double t : grid) {
        const Matrix v = mode == SupMode::Absolute ? entrywise_abs(m.at(t)) : metzlerize(m.at(t));
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < n; ++j) EXPECT_GE(s(i, j), v(i, j));
      }
    }
  }
}
