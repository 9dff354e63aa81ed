#include <cmath>
#include <variant>

#include <gtest/gtest.h>

#include "aes/metzler.hpp"
#include "aes/system.hpp"
#include "support.hpp"

using namespace aes;
using namespace aes::metzler;

namespace {

WitnessResult witness(const WitnessOutcome& w) {
  EXPECT_TRUE(std::holds_alternative<WitnessResult>(w));
  return std::get<WitnessResult>(w);
}

// m xi << 0 by direct multiplication under the shared band.
bool hurwitz_certified(const Matrix& m, const Vector& xi) {
  const Vector v = test::multiply(m, xi);
  const double band = kStrictness * m.norm_inf() * norm1(xi);
  for (double x : v)
    if (!(x <= -band && x < 0.0)) return false;
  return true;
}

bool schur_certified(const Matrix& m, const Vector& xi) {
  Vector v = test::multiply(m, xi);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] -= xi[i];
  const double band = kStrictness * (m - Matrix::identity(m.rows())).norm_inf() * norm1(xi);
  for (double x : v)
    if (!(x <= -band && x < 0.0)) return false;
  return true;
}

}  // namespace

TEST(SpectralAbscissa, Examples) {
  EXPECT_NEAR(spectral_abscissa(Matrix{{-2, 1}, {1, -2}}), -1.0, 1e-12);
  EXPECT_NEAR(spectral_abscissa(Matrix{{-3, 0}, {0, -5}}), -3.0, 1e-12);
  EXPECT_NEAR(spectral_abscissa(Matrix{{0, 1}, {1, 0}}), 1.0, 1e-12);
}

TEST(SpectralRadius, Examples) {
  EXPECT_NEAR(spectral_radius(Matrix{{0.5, 0}, {0, 0.25}}), 0.5, 1e-12);
  EXPECT_NEAR(spectral_radius(Matrix{{0, 1}, {1, 0}}), 1.0, 1e-12);
  // lambda^2 - 0.7 lambda + 0.10 = 0
  EXPECT_NEAR(spectral_radius(Matrix{{0.3, 0.2}, {0.1, 0.4}}), (0.7 + std::sqrt(0.49 - 0.4)) / 2, 1e-12);
}

TEST(SpectralRadius, NilpotentAndZero) {
  EXPECT_EQ(spectral_radius(Matrix(3, 3)), 0.0);
  EXPECT_NEAR(spectral_radius(Matrix{{0, 1, 0}, {0, 0, 1}, {0, 0, 0}}), 0.0, 1e-12);
}

TEST(Irreducibility, Patterns) {
  EXPECT_TRUE(is_irreducible(Matrix{{0, 1}, {1, 0}}));
  EXPECT_FALSE(is_irreducible(Matrix{{1, 1}, {0, 1}}));
  EXPECT_TRUE(is_irreducible(Matrix{{5.0}}));
}

TEST(HurwitzWitness, SymmetricExample) {
  const Matrix m{{-2, 1}, {1, -2}};
  const auto& w = witness(find_hurwitz_witness(m));
  EXPECT_NEAR(w.xi[0], 0.5, 1e-12);
  EXPECT_NEAR(w.xi[1], 0.5, 1e-12);
  // Unnormalized xi = (1, 1) gives m xi = (-1, -1).
  EXPECT_NEAR(w.margin * 2, 1.0, 1e-12);
  EXPECT_EQ(w.method, WitnessMethod::PerronEigenvector);
}

TEST(HurwitzWitness, UnstablePermutationIsInfeasible) {
  const auto out = find_hurwitz_witness(Matrix{{0, 1}, {1, 0}});
  ASSERT_TRUE(std::holds_alternative<Infeasible>(out));
  EXPECT_NEAR(std::get<Infeasible>(out).spectral_value, 1.0, 1e-12);
}

TEST(HurwitzWitness, ReducibleMatrixUsesPerturbation) {
  const Matrix m{{-1, 0, 0}, {2, -3, 0}, {0, 0, -2}};
  const auto& w = witness(find_hurwitz_witness(m));
  EXPECT_EQ(w.method, WitnessMethod::PerturbedPerron);
  EXPECT_TRUE(hurwitz_certified(m, w.xi));
  for (double x : w.xi) EXPECT_GE(x, 1e-12);
}

TEST(HurwitzWitness, RejectsNonMetzlerInput) {
  EXPECT_THROW((void)find_hurwitz_witness(Matrix{{-1, -1}, {0, -1}}), InputError);
}

TEST(SchurWitness, Examples) {
  const Matrix half{{0.5, 0}, {0, 0.5}};
  const auto& w = witness(find_schur_witness(half));
  EXPECT_NEAR(w.xi[0], 0.5, 1e-12);
  EXPECT_NEAR(w.xi[1], 0.5, 1e-12);
  EXPECT_TRUE(schur_certified(half, w.xi));

  const auto id = find_schur_witness(Matrix::identity(2));
  ASSERT_TRUE(std::holds_alternative<Infeasible>(id));
  EXPECT_NEAR(std::get<Infeasible>(id).spectral_value, 1.0, 1e-12);
}

TEST(SchurWitness, SecondExampleComparisonMatrixAcceptsUnitWeights) {
  const Matrix sum{{1.5, 2.0 + 1.0 / 3}, {3.5, 1.25}};
  const Matrix m = sum * Matrix::diagonal(Vector{1.0 / 8, 1.0 / 14});
  const Vector v = test::multiply(m, Vector{1.0, 1.0});
  EXPECT_NEAR(v[0], 3.0 / 16 + 7.0 / 42, 1e-15);
  EXPECT_NEAR(v[1], 7.0 / 16 + 5.0 / 56, 1e-15);
  EXPECT_NEAR(1 - v[0], 0.64583, 1e-5);
  EXPECT_NEAR(1 - v[1], 0.47321, 1e-5);
  EXPECT_TRUE(schur_certified(m, Vector{1.0, 1.0}));
  EXPECT_TRUE(schur_certified(m, witness(find_schur_witness(m)).xi));
}

TEST(MetzlerProperty, HurwitzWitnessIffNegativeAbscissa) {
  test::Gen gen(31);
  int feasible = 0, infeasible = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = static_cast<std::size_t>(gen.integer(2, 6));
    Matrix m = gen.metzler(n, -5, 5);
    if (k % 4 == 0) m = gen.sparsify(m, 0.6);
    // Shift half the draws towards stability so both outcomes are well represented.
    if (k % 2 == 1)
      for (std::size_t i = 0; i < n; ++i) m(i, i) -= 2.5 * static_cast<double>(n);
    const double oracle = test::eigen_abscissa(m);
    EXPECT_NEAR(spectral_abscissa(m), oracle, 1e-8 * std::max(1.0, std::abs(oracle)));
    const auto out = find_hurwitz_witness(m);
    const bool found = std::holds_alternative<WitnessResult>(out);
    EXPECT_EQ(found, oracle < -1e-9) << to_string(m) << " abscissa " << oracle;
    if (found) {
      ++feasible;
      const auto& w = std::get<WitnessResult>(out);
      EXPECT_NEAR(norm1(w.xi), 1.0, 1e-12);
      for (double x : w.xi) EXPECT_GE(x, 1e-12);
      EXPECT_TRUE(hurwitz_certified(m, w.xi));
      for (int s = 0; s < 10; ++s) {
        Vector scaled = w.xi;
        const double c = std::exp(gen.uniform(-20, 20));
        for (double& x : scaled) x *= c;
        EXPECT_TRUE(hurwitz_certified(m, scaled));
      }
    } else {
      ++infeasible;
    }
  }
  EXPECT_GT(feasible, 50);
  EXPECT_GT(infeasible, 50);
}

TEST(MetzlerProperty, SchurWitnessIffRadiusBelowOne) {
  test::Gen gen(32);
  int feasible = 0, infeasible = 0;
  for (int k = 0; k < 1000; ++k) {
    const std::size_t n = static_cast<std::size_t>(gen.integer(2, 6));
    Matrix m = gen.nonnegative(n, 2.5 / static_cast<double>(n));
    if (k % 4 == 0) m = gen.sparsify(m, 0.6);
    const double oracle = test::eigen_radius(m);
    EXPECT_NEAR(spectral_radius(m), oracle, 1e-8 * std::max(1.0, oracle));
    const auto out = find_schur_witness(m);
    const bool found = std::holds_alternative<WitnessResult>(out);
    EXPECT_EQ(found, oracle < 1.0 - 1e-9) << to_string(m) << " radius " << oracle;
    if (found) {
      ++feasible;
      EXPECT_TRUE(schur_certified(m, std::get<WitnessResult>(out).xi));
    } else {
      ++infeasible;
    }
  }
  EXPECT_GT(feasible, 50);
  EXPECT_GT(infeasible, 50);
}

TEST(MetzlerProperty, AbscissaIsShiftedRadius) {
  test::Gen gen(33);
  for (int k = 0; k < 300; ++k) {
    const Matrix m = gen.metzler(static_cast<std::size_t>(gen.integer(1, 6)), -5, 5);
    double c = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) c = std::max(c, std::abs(m(i, i)));
    c += 1.0;
    EXPECT_NEAR(spectral_abscissa(m), spectral_radius(m + c * Matrix::identity(m.rows())) - c, 1e-9);
  }
}
