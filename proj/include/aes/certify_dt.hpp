#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "aes/matrix.hpp"
#include "aes/rejection.hpp"
#include "aes/system.hpp"

/// Criteria for discrete-time delay systems
///     x(k+1) = A(k) f(x(k)) + sum_l B_l(k) f(x(k - h_l)),  f in K(0, beta],
/// all of the form
///     (|A(k)| + sum_l lambda^{-h_l} |B_l(k)|) D_beta xi <= lambda xi.
namespace aes::dt {

enum class Criterion {
  SingleDelay,  // pointwise in k, one delay
  MultiDelay,   // pointwise in k, several delays
  PositiveBounds  // constant nonnegative bounds, maximal convergence rate
};

const char* to_string(Criterion c);

struct DelayBound {
  int h;
  Matrix b;  // >= |B_l(k)|
};

struct RateCheck {
  bool holds = false;
  /// -max over rows and checked k of the defect; >= 0 iff holds.
  double margin = 0.0;
  double worst_k = 0.0;
  Vector worst_defect;
  Evidence evidence = Evidence::Exact;
};

/// Lambda is clamped to this interval in every search.
inline constexpr double kLambdaFloor = 1e-9;
inline constexpr double kLambdaCeil = 1.0 - 1e-9;

/// (|A| + sum_l lambda^{-h_l} |B_l|) D_beta xi - lambda xi.
Vector rate_condition_defect(const Matrix& a_abs, std::span<const DelayBound> b_abs,
                             const SectorBounds& sector, std::span<const double> xi, double lambda);

/// |A(k)| and |B_l(k)| come from user bounds when given, otherwise from the
/// matrices evaluated at every k of the grid. Non-strict inequality.
RateCheck check_single_delay_rate(const DiscreteSystem& sys, const SectorBounds& sector,
                                  std::span<const double> xi, double lambda,
                                  std::span<const double> k_grid);

RateCheck check_multi_delay_rate(const DiscreteSystem& sys, const SectorBounds& sector,
                                 std::span<const double> xi, double lambda,
                                 std::span<const double> k_grid);

struct ConvergenceProfile {
  Vector rates;  // per-row lambda_i
  double lambda_max = 0.0;
  std::size_t binding_row = 0;
  bool degenerate = false;  // some row has no dynamics at all (lambda_i = 0)
};

/// g_i(lambda) = sum_j a_ij beta_j xi_j + sum_l lambda^{-h_l} sum_j b_{l,ij} beta_j xi_j
///               - lambda xi_i.
double convergence_function(const Matrix& a, std::span<const DelayBound> b_ls,
                            const SectorBounds& sector, std::span<const double> xi,
                            std::size_t row, double lambda);

/// Row roots of g_i on (0, 1) and their maximum. Requires
/// (A + sum_l B_l) D_beta xi << xi; rows without delay terms have the affine
/// root sum_j a_ij beta_j xi_j / xi_i. Roots are reported on the feasible
/// side (g_i(lambda_i) <= 0).
std::variant<ConvergenceProfile, Rejection> convergence_profile(const Matrix& a,
                                                                std::span<const DelayBound> b_ls,
                                                                const SectorBounds& sector,
                                                                std::span<const double> xi);

struct DiscreteCertificate {
  Vector xi;  // l1-normalized
  double lambda = 0.0;
  Criterion criterion = Criterion::PositiveBounds;
  double margin = 0.0;
  Evidence evidence = Evidence::Exact;
  std::optional<ConvergenceProfile> profile;
};

using CertificateOutcome = std::variant<DiscreteCertificate, Rejection>;

/// Witness from the Schur test of (A + sum_l B_l) D_beta (unless xi is
/// supplied), then lambda = lambda_max. Valid for every time-varying system
/// with |A(k)| <= A and |B_l(k)| <= B_l.
CertificateOutcome certify_bounded_system(const Matrix& a, std::span<const DelayBound> b_ls,
                                          const SectorBounds& sector,
                                          std::optional<Vector> xi = std::nullopt);

struct ResolvedBounds {
  Matrix a_abs;
  std::vector<DelayBound> b_abs;
  Evidence evidence = Evidence::Exact;
};

/// User bounds where given, |M| for constant matrices, grid suprema otherwise.
ResolvedBounds resolve_bounds(const DiscreteSystem& sys, std::span<const double> k_grid);

/// resolve_bounds followed by certify_bounded_system; evidence is carried over.
CertificateOutcome certify_system(const DiscreteSystem& sys, const SectorBounds& sector,
                                  std::span<const double> k_grid,
                                  std::optional<Vector> xi = std::nullopt);

}  // namespace aes::dt
