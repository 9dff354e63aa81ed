#include <cmath>

#include <gtest/gtest.h>

#include "aes/fixtures.hpp"
#include "aes/simulate.hpp"
#include "support.hpp"

using namespace aes;
using namespace aes::sim;

namespace {

// x' = -2x + 0.5 x(t - 1) with unit history: closed forms on [0, 1] and [1, 2].
double dde_first(double t) { return 0.25 + 0.75 * std::exp(-2 * t); }
double dde_second(double t) {
  const double s = t - 1;
  return 0.0625 + 0.375 * s * std::exp(-2 * s) + (dde_first(1.0) - 0.0625) * std::exp(-2 * s);
}

ContinuousSystem dde_fixture() {
  return ContinuousSystem(MatrixExpr(Matrix{{-2.0}}), {{1.0, MatrixExpr(Matrix{{0.5}})}});
}

std::size_t index_of(const SimulationTrace& tr, double t) {
  return static_cast<std::size_t>(std::llround(t / (tr.times[1] - tr.times[0])));
}

SimulationTrace exponential_trace(double rate, double horizon) {
  SimulationTrace tr;
  for (int k = 0; k <= 1000; ++k) {
    const double t = horizon * k / 1000.0;
    tr.times.push_back(t);
    tr.states.push_back({std::exp(-rate * t)});
    tr.norms.push_back(std::exp(-rate * t));
  }
  return tr;
}

}  // namespace

TEST(Nonlinearity, DocumentedShapes) {
  const auto s = SectorBounds::bounded({1.0}, {2.0});
  const auto lower = NonlinearitySample::uniform(SectorBounds::bounded({1.0}, {1.0}), Shape::LowerEdge);
  EXPECT_EQ(lower(0, 3.5), 3.5);
  const auto blend = NonlinearitySample::uniform(s, Shape::Blend, 3.0);
  for (double x : {-2.0, -0.3, 0.7, 4.0}) {
    const double xf = x * blend(0, x);
    EXPECT_NEAR(xf, x * x * (1 + (1 + std::sin(3 * x)) / 2), 1e-14);
    EXPECT_GE(xf, x * x * (1 - 1e-15));
    EXPECT_LE(xf, 2 * x * x * (1 + 1e-15));
  }
  const auto sat = NonlinearitySample::uniform(SectorBounds::positive_up_to({0.125}), Shape::Saturating);
  for (double x : {-5.0, -1e-3, 2.0, 1e3}) {
    EXPECT_GT(x * sat(0, x), 0.0);
    EXPECT_LE(x * sat(0, x), 0.125 * x * x);
  }
  EXPECT_EQ(sat(0, 0.0), 0.0);
}

TEST(Nonlinearity, ShapesOutsideTheirSectorAreRejected) {
  EXPECT_THROW(NonlinearitySample::uniform(SectorBounds::positive_up_to({1.0}), Shape::LowerEdge), InputError);
  EXPECT_THROW(NonlinearitySample::uniform(SectorBounds::bounded({1.0}, {1.0}), Shape::Saturating), InputError);
}

TEST(Nonlinearity, SamplingIsDeterministic) {
  const auto s = fixtures::example1_sector();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto a = sample_nonlinearity(s, seed);
    const auto b = sample_nonlinearity(s, seed);
    for (std::size_t i = 0; i < 2; ++i) {
      EXPECT_EQ(a.shapes()[i].shape, b.shapes()[i].shape);
      EXPECT_EQ(a.shapes()[i].omega, b.shapes()[i].omega);
    }
  }
}

TEST(SimProperty, SectorSoundness) {
  const auto grid = membership_grid();
  std::size_t points = 0;
  test::Gen gen(61);
  for (int k = 0; k < 250; ++k) {
    const std::size_t n = static_cast<std::size_t>(gen.integer(1, 3));
    Vector delta(n), beta(n);
    for (std::size_t i = 0; i < n; ++i) beta[i] = (delta[i] = gen.uniform(0.05, 2.0)) * gen.uniform(1.0, 3.0);
    const auto sector = k % 2 ? SectorBounds::bounded(delta, beta) : SectorBounds::positive_up_to(beta);
    const auto f = sample_nonlinearity(sector, gen.bits());
    EXPECT_EQ(count_membership_violations(f, grid), 0u);
    points += n * (grid.size() + 1);
  }
  EXPECT_GE(points, 1000000u);
}

TEST(Integrate, ZeroHistoryStaysAtZero) {
  const auto sys = fixtures::example1_system();
  const auto f = NonlinearitySample::uniform(fixtures::example1_sector(), Shape::Blend, 2.0);
  const auto tr = integrate_dde(sys, f, InitialHistory::constant({0.0, 0.0}), 5.0, 1e-2);
  for (const auto& x : tr.states) EXPECT_EQ(x, (Vector{0.0, 0.0}));
}

TEST(Integrate, ScalarExponential) {
  const ContinuousSystem sys(MatrixExpr(Matrix{{-2.0}}), {});
  const auto f = NonlinearitySample::uniform(fixtures::unit_sector(), Shape::LowerEdge);
  const auto tr = integrate_dde(sys, f, InitialHistory::constant({1.0}), 1.0, 1e-3);
  EXPECT_NEAR(tr.times.back(), 1.0, 1e-12);
  EXPECT_LT(std::abs(tr.states.back()[0] - std::exp(-2.0)), 1e-8);
}

TEST(Integrate, DelayFixtureFirstTwoIntervals) {
  const auto f = NonlinearitySample::uniform(fixtures::unit_sector(), Shape::LowerEdge);
  const auto tr = integrate_dde(dde_fixture(), f, InitialHistory::constant({1.0}), 5.0, 1e-3);
  EXPECT_NEAR(dde_first(1.0), 0.3515015, 1e-7);
  EXPECT_NEAR(tr.states[index_of(tr, 1.0)][0], dde_first(1.0), 1e-6);
  for (double t : {0.25, 0.5, 0.75}) EXPECT_NEAR(tr.states[index_of(tr, t)][0], dde_first(t), 1e-10);
  // The second interval reads interpolated history at the RK4 half steps.
  for (double t : {1.25, 1.5, 2.0}) EXPECT_NEAR(tr.states[index_of(tr, t)][0], dde_second(t), 1e-9);
}

TEST(Integrate, StepIsShrunkToDivideTheDelay) {
  EXPECT_DOUBLE_EQ(effective_step(dde_fixture(), 0.3), 0.25);
  EXPECT_DOUBLE_EQ(effective_step(dde_fixture(), 1e-3), 1e-3);
}

TEST(Integrate, HorizonMustCoverFiveDelays) {
  const auto f = NonlinearitySample::uniform(fixtures::unit_sector(), Shape::LowerEdge);
  EXPECT_THROW((void)integrate_dde(dde_fixture(), f, InitialHistory::constant({1.0}), 4.0, 1e-2), InputError);
}

TEST(Integrate, BlowUpIsReported) {
  const ContinuousSystem sys(MatrixExpr(Matrix{{400.0}}), {{1.0, MatrixExpr(Matrix{{0.0}})}});
  const auto f = NonlinearitySample::uniform(fixtures::unit_sector(), Shape::LowerEdge);
  EXPECT_THROW((void)integrate_dde(sys, f, InitialHistory::constant({1.0}), 10.0, 1e-2), SimulationError);
}

TEST(SimProperty, LinearEdgeMatchesFineEuler) {
  // Euler at a tenth of the RK4 step, coded against the raw expressions.
  const auto sys = fixtures::example1_system();
  const auto sector = fixtures::example1_sector();
  const auto f = NonlinearitySample::uniform(sector, Shape::LowerEdge);
  const auto phi = InitialHistory::constant({1.0, -0.5});
  const double step = 1e-4, fine = step / 10, horizon = 5.0;
  const auto tr = integrate_dde(sys, f, phi, horizon, step);

  const auto lag = static_cast<std::size_t>(std::llround(1.0 / fine));
  const auto steps = static_cast<std::size_t>(std::llround(horizon / fine));
  std::vector<double> x1(lag + steps + 1, 1.0), x2(lag + steps + 1, -0.5);
  const double d1 = 1.0 / 3, d2 = 0.5;
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * fine;
    const std::size_t i = lag + k;
    const double y1 = d1 * x1[i], y2 = d2 * x2[i], z1 = d1 * x1[k], z2 = d2 * x2[k];
    const double e = std::exp(-t);
    x1[i + 1] = x1[i] + fine * ((-4 * t - 12) * y1 + std::sin(t) / 3 * z1 + std::cos(t) / 8 * z2);
    x2[i + 1] = x2[i] + fine * (t * y1 + (-2 * t - 5) * y2 + e * std::cos(t) / 3 * z1 + e * std::sin(t) / 8 * z2);
  }
  for (double t = 0.5; t <= horizon + 1e-9; t += 0.5) {
    const auto& x = tr.states[index_of(tr, t)];
    const std::size_t j = lag + static_cast<std::size_t>(std::llround(t / fine));
    const double diff = std::abs(x[0] - x1[j]) + std::abs(x[1] - x2[j]);
    // Euler's relative error grows like fine * integral of |a_11|^2 / 2, about 1.2e-3 by t = 4.5.
    EXPECT_LE(diff, 5e-3 * (std::abs(x1[j]) + std::abs(x2[j]))) << "t = " << t;
  }
}

TEST(SimProperty, PositiveSystemsStayNonnegative) {
  test::Gen gen(62);
  for (int k = 0; k < 30; ++k) {
    const std::size_t n = static_cast<std::size_t>(gen.integer(1, 4));
    Matrix a = gen.metzler(n, -3, 1);
    const Matrix b = gen.nonnegative(n, 0.5);
    const ContinuousSystem sys(MatrixExpr(a), {{gen.uniform(0.2, 1.5), MatrixExpr(b)}});
    Vector delta(n), beta(n);
    for (std::size_t i = 0; i < n; ++i) beta[i] = (delta[i] = gen.uniform(0.2, 1.0)) + 0.5;
    const auto sector = SectorBounds::bounded(delta, beta);
    const auto f = sample_nonlinearity(sector, gen.bits());
    const auto phi = InitialHistory::random_piecewise_linear(n, sys.max_delay(), gen.bits(), 6, true);
    try {
      const auto tr = integrate_dde(sys, f, phi, 5 * sys.max_delay(), 1e-2);
      for (const auto& x : tr.states)
        for (double v : x) EXPECT_GE(v, -1e-9);
    } catch (const SimulationError&) {
      // Unstable instances may overflow; positivity is only asserted on finite traces.
    }
  }
}

TEST(History, Norms) {
  EXPECT_EQ(InitialHistory::constant({1.0, -2.0}).norm(1.0), 3.0);
  const auto s = InitialHistory::sinusoid({0.5, 0.5}, 2.0);
  EXPECT_EQ(s.norm(1.0), 1.0);
  EXPECT_EQ(s.at(0.0), (Vector{0.5, 0.5}));
  const auto p = InitialHistory::random_piecewise_linear(2, 1.0, 5, 5);
  double sampled = 0.0;
  for (int k = 0; k <= 1000; ++k) sampled = std::max(sampled, norm1(p.at(-k / 1000.0)));
  EXPECT_NEAR(p.norm(1.0), sampled, 1e-12);
}

TEST(Iterate, Geometric) {
  const DiscreteSystem sys(MatrixExpr(Matrix{{0.5}}), {});
  const auto f = NonlinearitySample::uniform(SectorBounds::positive_up_to({1.0}), Shape::UpperEdge);
  const auto tr = iterate_discrete(sys, f, InitialHistory::constant({1.0}), 40);
  for (int k = 0; k <= 40; ++k) EXPECT_EQ(tr.states[static_cast<std::size_t>(k)][0], std::ldexp(1.0, -k));
}

TEST(Iterate, ZeroHistory) {
  const auto f = NonlinearitySample::uniform(fixtures::example2_sector(), Shape::Saturating);
  const auto tr = iterate_discrete(fixtures::example2_system(), f, InitialHistory::constant({0.0, 0.0}), 20);
  for (const auto& x : tr.states) EXPECT_EQ(x, (Vector{0.0, 0.0}));
}

TEST(Iterate, SecondExampleFirstSteps) {
  const auto f = NonlinearitySample::uniform(fixtures::example2_sector(), Shape::UpperEdge);
  const auto tr = iterate_discrete(fixtures::example2_system(), f, InitialHistory::constant({1.0, 1.0}), 5);
  const double b1 = 1.0 / 8, b2 = 1.0 / 14;
  double p1 = 1, p2 = 1, c1 = 1, c2 = 1;  // x(k-1), x(k)
  for (int k = 0; k < 3; ++k) {
    const double t = k;
    const double n1 = (-std::sin(t) * (b1 * c1) + 2 * std::exp(-3 * t) * (b2 * c2)) +
                      (0.5 * std::exp(-t) * (b1 * p1) + (1.0 / 3) * std::sin(t) * (b2 * p2));
    const double n2 = (3 * std::cos(t) * (b1 * c1) + -std::sin(t) * (b2 * c2)) +
                      (0.5 * std::exp(-2 * t) * (b1 * p1) + 0.25 * std::cos(t) * (b2 * p2));
    p1 = c1, p2 = c2, c1 = n1, c2 = n2;
    EXPECT_EQ(tr.states[static_cast<std::size_t>(k + 1)][0], c1);
    EXPECT_EQ(tr.states[static_cast<std::size_t>(k + 1)][1], c2);
  }
}

TEST(Iterate, SeedsReproduceBitForBit) {
  const auto f = sample_nonlinearity(fixtures::example2_sector(), 99);
  const auto phi = InitialHistory::random_piecewise_linear(2, 1.0, 7, 3);
  const auto a = iterate_discrete(fixtures::example2_system(), f, phi, 60);
  const auto b = iterate_discrete(fixtures::example2_system(), sample_nonlinearity(fixtures::example2_sector(), 99),
                                  InitialHistory::random_piecewise_linear(2, 1.0, 7, 3), 60);
  EXPECT_EQ(a.states, b.states);
}

TEST(Envelope, AnalyticPass) {
  const auto r = check_envelope(exponential_trace(2.0, 10.0), 1.0, 1.0, TimeKind::Continuous);
  EXPECT_NEAR(r.m_fit, 1.0, 1e-12);
  EXPECT_NEAR(r.slope_fit, -2.0, 1e-9);
  EXPECT_TRUE(r.pass);
}

TEST(Envelope, SlowDecayIsFlagged) {
  const auto r = check_envelope(exponential_trace(0.5, 10.0), 1.0, 1.0, TimeKind::Continuous);
  EXPECT_NEAR(r.m_fit, std::exp(5.0), 1e-6);
  EXPECT_FALSE(r.pass);
}

TEST(Envelope, ZeroTracePassesTrivially) {
  SimulationTrace tr;
  for (int k = 0; k <= 10; ++k) {
    tr.times.push_back(k);
    tr.states.push_back({0.0});
    tr.norms.push_back(0.0);
  }
  const auto r = check_envelope(tr, 0.5, 1.0, TimeKind::Discrete);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.m_fit, 0.0);
}

TEST(Envelope, Preconditions) {
  EXPECT_THROW((void)check_envelope({}, 1.0, 1.0, TimeKind::Continuous), InputError);
  EXPECT_THROW((void)check_envelope(exponential_trace(1, 1), 1.0, 0.0, TimeKind::Continuous), InputError);
  EXPECT_THROW((void)check_envelope(exponential_trace(1, 1), 1.5, 1.0, TimeKind::Discrete), InputError);
}

TEST(MonteCarlo, SecondExampleCertificatePasses) {
  ValidationOptions opt;
  const auto rep = monte_carlo_validate(fixtures::example2_system(), fixtures::example2_sector(),
                                        fixtures::kExample2LambdaMax, opt);
  EXPECT_TRUE(rep.pass) << rep.failed << " failures; worst slope " << rep.worst_slope;
  EXPECT_EQ(rep.runs, 200u);
}

TEST(MonteCarlo, SameSeedSameReport) {
  ValidationOptions opt;
  opt.nonlinearities = 4;
  opt.histories = 3;
  opt.seed = 5;
  opt.step = 1e-2;
  const auto a = monte_carlo_validate(fixtures::scalar_delay_system(), fixtures::unit_sector(), 0.44, opt);
  opt.threads = 1;
  const auto b = monte_carlo_validate(fixtures::scalar_delay_system(), fixtures::unit_sector(), 0.44, opt);
  EXPECT_EQ(a.pass, b.pass);
  EXPECT_EQ(a.worst_m_fit, b.worst_m_fit);
  EXPECT_EQ(a.worst_slope, b.worst_slope);
}

TEST(MonteCarlo, InflatedDiscreteRateFails) {
  ValidationOptions opt;
  opt.nonlinearities = 4;
  opt.histories = 3;
  const auto rep = monte_carlo_validate(fixtures::example2_system(), fixtures::example2_sector(), 0.05, opt);
  EXPECT_FALSE(rep.pass);
  EXPECT_GT(rep.failed, 0u);
}
