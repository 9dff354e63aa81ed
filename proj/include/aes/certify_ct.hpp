#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "aes/matrix.hpp"
#include "aes/rejection.hpp"
#include "aes/system.hpp"

/// Absolute exponential stability criteria for continuous-time delay systems
///     x'(t) = A(t) f(x(t)) + sum_l B_l(t) f(x(t - h_l)),  f in K[delta, beta].
///
/// Every criterion reduces to one vector inequality in a positive weight
/// vector xi and a decay rate alpha:
///     (D_delta Ahat(t)^T + sum_l e^{alpha h_l} D_beta Bbar_l^T) xi <= -alpha xi,
/// with Ahat(t) the Metzlerization of A(t) and Bbar_l >= |B_l(t)|.
namespace aes::ct {

enum class Criterion {
  SingleDelay,            // time-varying A(t), one delay, checked pointwise in t
  NondelayWindow,         // no delay, open window of admissible rates
  ConstantBounds,         // A(t), B(t) dominated by constant matrices; maximal rate
  PositiveTimeInvariant,  // constant Metzler A and nonnegative B_l
  MultiDelay              // time-varying A(t), several delays, checked pointwise in t
};

const char* to_string(Criterion c);

/// Constant nonnegative bound Bbar_l >= |B_l(t)| for the delay h_l.
struct DelayBound {
  double h;
  Matrix b;
};

/// What to do when a time-varying matrix has no user-asserted bound.
enum class BoundPolicy { AllowGrid, RequireBounds };

/// Outcome of checking the rate inequality at a fixed (xi, alpha).
struct RateCheck {
  bool holds = false;
  /// -max over rows and checked t of (lhs_i + alpha xi_i); >= 0 iff holds.
  double margin = 0.0;
  double worst_t = 0.0;
  Vector worst_lhs;  // lhs (without the alpha xi term) at worst_t
  Evidence evidence = Evidence::Exact;
};

/// D_delta Ahat^T xi + sum_l e^{alpha h_l} D_beta Bbar_l^T xi.
Vector rate_condition_lhs(const Matrix& a_hat, std::span<const DelayBound> b_bars,
                          const SectorBounds& sector, std::span<const double> xi, double alpha);

/// Pointwise check with a single delay (or none). Ahat(t) comes from the
/// user bound if present, else from metzlerize(A(t)) on every grid point.
/// Bbar comes from the user bound, |B| for constant B, or a grid supremum.
RateCheck check_single_delay_rate(const ContinuousSystem& sys, const SectorBounds& sector,
                                  std::span<const double> xi, double alpha,
                                  std::span<const double> t_grid,
                                  BoundPolicy policy = BoundPolicy::AllowGrid);

/// Same check summed over all delays.
RateCheck check_multi_delay_rate(const ContinuousSystem& sys, const SectorBounds& sector,
                                 std::span<const double> xi, double alpha,
                                 std::span<const double> t_grid,
                                 BoundPolicy policy = BoundPolicy::AllowGrid);

/// Per-row roots of
///     g_i(alpha) = sum_j (ahat_ji delta_i xi_j + sum_l e^{alpha h_l} bbar_{l,ji} beta_i xi_j)
///                  + alpha xi_i
/// and their minimum. Each root is the largest alpha with g_i(alpha) <= 0 found
/// by bisection to 1e-12, so the reported rate never overshoots.
struct DecayProfile {
  Vector rates;
  double alpha_max = 0.0;
  std::size_t binding_row = 0;
};

/// g_i(alpha) as defined above.
double decay_function(const Matrix& a_hat, std::span<const DelayBound> b_bars,
                      const SectorBounds& sector, std::span<const double> xi, std::size_t row,
                      double alpha);

/// Requires g_i(0) < 0 for every row; otherwise a ProfilePrecondition rejection.
std::variant<DecayProfile, Rejection> decay_profile(const Matrix& a_hat,
                                                    std::span<const DelayBound> b_bars,
                                                    const SectorBounds& sector,
                                                    std::span<const double> xi);

struct ContinuousCertificate {
  Vector xi;  // l1-normalized
  double alpha = 0.0;
  Criterion criterion = Criterion::ConstantBounds;
  double margin = 0.0;
  double worst_t = 0.0;
  Evidence evidence = Evidence::Exact;
  std::optional<DecayProfile> profile;
};

using CertificateOutcome = std::variant<ContinuousCertificate, Rejection>;

/// Constant bounds actually used for a system: user bounds where given, exact
/// values for constant matrices, grid suprema otherwise.
struct ResolvedBounds {
  Matrix a_hat;
  std::vector<DelayBound> b_bars;
  Evidence evidence = Evidence::Exact;
};

ResolvedBounds resolve_bounds(const ContinuousSystem& sys, std::span<const double> t_grid,
                              BoundPolicy policy = BoundPolicy::AllowGrid);

/// Finds xi from the Perron witness of (Ahat D_delta + sum_l Bbar_l D_beta)^T
/// (unless `xi` is supplied) and attaches the maximal rate for it.
/// Short-circuits with NecessityViolated when Ahat + sum_l Bbar_l is not Hurwitz.
CertificateOutcome find_rate_certificate(const ContinuousSystem& sys, const SectorBounds& sector,
                                         std::span<const double> t_grid,
                                         std::optional<Vector> xi = std::nullopt,
                                         BoundPolicy policy = BoundPolicy::AllowGrid);

/// Nondelay systems x' = A(t) f(x) with f only bounded below by delta.
struct RateWindow {
  double gamma = 0.0;   // max_j sup_t sum_i ahat_ij(t) xi_i, < 0
  double delta0 = 0.0;  // min_j delta_j
  double d2 = 0.0;      // max_i xi_i
  double alpha_sup = 0.0;  // -gamma delta0 / d2; every alpha in (0, alpha_sup) is certified
  double default_alpha() const { return 0.9 * alpha_sup; }
};

/// Uses only sector.delta(); the upper slope is irrelevant here.
std::variant<RateWindow, Rejection> nondelay_rate_window(const MatrixExpr& a,
                                                         const SectorBounds& sector,
                                                         std::span<const double> xi,
                                                         std::span<const double> t_grid);

/// Time-invariant positive systems: A Metzler, B_l >= 0.
CertificateOutcome certify_positive_system(const Matrix& a, std::span<const DelayBound> delays,
                                           const SectorBounds& sector);

/// (A + B)^T xi << 0 under the shared strictness band. Necessary for absolute
/// stability of the positive time-invariant system.
bool necessary_condition_holds(const Matrix& a, const Matrix& b, std::span<const double> xi);

/// Coupled nonlinearities f_ij(x_j, t) that must be sandwiched by one diagonal
/// f in K[delta, beta]:  |f_ij(x, t)| <= |f_j(x)| <= |f_jj(x, t)|  for i != j.
/// When the sandwich holds, certification is the pointwise rate check on the
/// same (Ahat, Bbar, delta, beta) without modification.
struct GeneralizedNonlinearity {
  std::size_t n = 0;
  std::function<double(std::size_t i, std::size_t j, double x, double t)> f_ij;
  std::function<double(std::size_t j, double x)> f;
};

struct DominanceReport {
  bool holds = true;
  std::size_t i = 0, j = 0;  // first violation, when !holds
  double x = 0.0, t = 0.0;
};

DominanceReport dominance_sandwich_holds(const GeneralizedNonlinearity& g,
                                         std::span<const double> x_grid,
                                         std::span<const double> t_grid);

}  // namespace aes::ct
