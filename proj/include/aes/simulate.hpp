#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "aes/matrix.hpp"
#include "aes/system.hpp"

/// Empirical falsification of stability certificates: sector nonlinearity
/// sampling, delay ODE integration, difference-system iteration and
/// exponential-envelope fitting. A finite-horizon run can refute a certified
/// rate, never prove it.
namespace aes::sim {

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Shape {
  LowerEdge,  // f(x) = delta x
  UpperEdge,  // f(x) = beta x
  Blend,      // f(x) = x (lo + (beta - lo)(1 + sin(omega x)) / 2)
  Saturating  // f(x) = beta x / (1 + x^2), only for the (0, beta] sector
};

const char* to_string(Shape s);

struct CoordinateShape {
  Shape shape = Shape::UpperEdge;
  double omega = 1.0;  // Blend only
};

/// A concrete diagonal nonlinearity inside a sector. For the (0, beta] sector
/// the Blend floor `lo` is beta / 4 and LowerEdge is not available; for
/// [delta, beta] `lo` is delta and Saturating is not available.
class NonlinearitySample {
 public:
  NonlinearitySample(SectorBounds sector, std::vector<CoordinateShape> shapes,
                     std::uint64_t seed = 0);

  /// Same shape on every coordinate.
  static NonlinearitySample uniform(const SectorBounds& sector, Shape shape, double omega = 1.0);

  double operator()(std::size_t i, double x) const;
  void apply(std::span<const double> x, std::span<double> out) const;

  const SectorBounds& sector() const { return sector_; }
  const std::vector<CoordinateShape>& shapes() const { return shapes_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t dim() const { return shapes_.size(); }

  /// Sector membership of coordinate i at a single point x != 0.
  bool in_sector(std::size_t i, double x) const;

 private:
  SectorBounds sector_;
  std::vector<CoordinateShape> shapes_;
  std::uint64_t seed_;
};

/// Deterministic in `seed`: each coordinate draws a shape among those valid
/// for the sector and, for Blend, omega in [0.5, 5].
NonlinearitySample sample_nonlinearity(const SectorBounds& sector, std::uint64_t seed);

/// {-10, -9.99, ..., 10} without 0, plus {+-1e-6, +-1e6}.
std::vector<double> membership_grid();

/// Number of (coordinate, x) pairs that failed membership on the grid.
std::size_t count_membership_violations(const NonlinearitySample& f, std::span<const double> x_grid);

/// Initial function on [-h, 0] (or on the integers of that interval).
class InitialHistory {
 public:
  enum class Kind { Constant, Sinusoid, RandomPiecewiseLinear };

  static InitialHistory constant(Vector value);
  /// phi_i(theta) = amplitude_i cos(frequency theta).
  static InitialHistory sinusoid(Vector amplitude, double frequency);
  /// `knots` equally spaced values on [-h, 0], uniform in [-1, 1] (or [0, 1]
  /// when `nonnegative`), linearly interpolated.
  static InitialHistory random_piecewise_linear(std::size_t n, double h, std::uint64_t seed,
                                                std::size_t knots, bool nonnegative = false);

  Kind kind() const { return kind_; }
  std::size_t dim() const { return values_.size(); }
  Vector at(double theta) const;

  /// sup over [-h, 0] of the l1 norm.
  double norm(double h) const;
  /// max over the integers of [-h, 0] of the l1 norm.
  double norm_discrete(int h) const;

 private:
  Kind kind_ = Kind::Constant;
  Vector values_;                 // constant value / amplitudes
  double frequency_ = 0.0;
  double span_ = 0.0;             // h for piecewise linear
  std::vector<Vector> knots_;     // piecewise linear knot values, from -h to 0
};

struct SimulationTrace {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<double> norms;  // l1
};

/// Fixed-step classic RK4 with the method of steps. The requested step is
/// shrunk to h_min / ceil(h_min / step) so that the smallest delay is a whole
/// number of steps; delayed values between grid points (RK4 half steps) use
/// cubic Hermite interpolation on stored states and derivatives. Requires
/// horizon >= 5 h_max. Throws SimulationError on a non-finite state.
SimulationTrace integrate_dde(const ContinuousSystem& sys, const NonlinearitySample& f,
                              const InitialHistory& phi, double horizon, double step);

/// The step actually used by integrate_dde.
double effective_step(const ContinuousSystem& sys, double requested);

/// Exact recursion in IEEE doubles for k = 0..horizon. Requires
/// horizon >= 5 h_max.
SimulationTrace iterate_discrete(const DiscreteSystem& sys, const NonlinearitySample& f,
                                 const InitialHistory& phi, int horizon);

enum class TimeKind { Continuous, Discrete };

struct EnvelopeReport {
  double rate = 0.0;  // alpha or lambda
  double m_fit = 0.0;
  double slope_fit = 0.0;  // -inf for an all-zero tail
  bool pass = false;
  bool degenerate = false;
};

inline constexpr double kDefaultSlack = 0.05;
inline constexpr double kTailFraction = 0.6;

/// m_fit = sup ||x(t)|| e^{alpha t} / ||phi|| (continuous) or
/// sup ||x(k)|| lambda^{-k} / ||phi|| (discrete). slope_fit is the
/// least-squares slope of log ||x|| over the last 60% of the horizon.
/// Passes iff m_fit is finite and slope_fit <= -alpha + slack (resp.
/// log lambda + slack).
EnvelopeReport check_envelope(const SimulationTrace& trace, double rate, double norm_phi,
                              TimeKind kind, double slack = kDefaultSlack);

struct ValidationOptions {
  std::size_t nonlinearities = 20;
  std::size_t histories = 10;
  std::uint64_t seed = 0;
  double horizon = 0.0;  // 0: 10 h_max (10 without delays); discrete: max(50, 10 h_max)
  double step = 1e-3;
  double slack = kDefaultSlack;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct RunFailure {
  std::size_t nonlinearity = 0;
  std::size_t history = 0;
  std::string what;
};

struct ValidationReport {
  static constexpr const char* kBanner =
      "finite-horizon falsification harness: a pass is evidence, not proof";
  bool pass = false;
  std::size_t runs = 0;
  std::size_t failed = 0;
  double worst_m_fit = 0.0;
  double worst_slope = 0.0;  // largest (least negative) fitted slope
  double rate = 0.0;
  double horizon = 0.0;
  std::vector<RunFailure> failures;  // at most 10 listed
};

/// Histories used by the harness for index `b`: cycles through constant,
/// sinusoid and random piecewise-linear initial functions.
InitialHistory harness_history(std::size_t n, double h, std::size_t b, std::uint64_t seed);

/// Nonlinearity used by the harness for index `a`: 0 and 1 are the sector
/// edges (or the upper edge and the saturating shape for (0, beta]); the
/// rest are seeded samples.
NonlinearitySample harness_nonlinearity(const SectorBounds& sector, std::size_t a, std::uint64_t seed);

ValidationReport monte_carlo_validate(const ContinuousSystem& sys, const SectorBounds& sector,
                                      double alpha, const ValidationOptions& options = {});

ValidationReport monte_carlo_validate(const DiscreteSystem& sys, const SectorBounds& sector,
                                      double lambda, const ValidationOptions& options = {});

}  // namespace aes::sim
