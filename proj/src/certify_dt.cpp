#include "aes/certify_dt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "aes/metzler.hpp"
#include "detail/bisect.hpp"

namespace aes::dt {

namespace {

constexpr double kRootTolerance = 1e-12;

Evidence weaker(Evidence a, Evidence b) { return static_cast<int>(a) > static_cast<int>(b) ? a : b; }

void require_xi(std::span<const double> xi, std::size_t n) {
  if (xi.size() != n) throw InputError("xi has wrong dimension");
  for (double v : xi)
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("xi must be strictly positive and finite");
}

void require_lambda(double lambda) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InputError("lambda must lie in (0, 1)");
}

Vector normalized(std::span<const double> v) {
  const double s = norm1(v);
  Vector out(v.begin(), v.end());
  for (double& x : out) x /= s;
  return out;
}

double defect_scale(const Matrix& a_abs, std::span<const DelayBound> b_abs, const SectorBounds& sector,
                    double lambda) {
  const Matrix db = sector.d_beta();
  double s = (a_abs * db).norm_inf() + lambda;
  for (const auto& b : b_abs) s += std::pow(lambda, -b.h) * (b.b * db).norm_inf();
  return s;
}

RateCheck check_rate(const DiscreteSystem& sys, const SectorBounds& sector,
                     std::span<const double> xi, double lambda, std::span<const double> k_grid) {
  if (sector.dim() != sys.dim()) throw InputError("sector dimension does not match system");
  require_xi(xi, sys.dim());
  require_lambda(lambda);

  const auto& bounds = sys.bounds();
  const auto& delays = sys.delays();
  RateCheck out;

  // A slot is "fixed" when a bound or a constant matrix makes it independent of k.
  std::optional<Matrix> a_fixed;
  if (bounds && bounds->a) {
    a_fixed = *bounds->a;
    if (!sys.a().is_constant()) out.evidence = weaker(out.evidence, Evidence::UserBounds);
  } else if (sys.a().is_constant()) {
    a_fixed = entrywise_abs(sys.a().constant());
  }
  std::vector<std::optional<Matrix>> b_fixed(delays.size());
  for (std::size_t l = 0; l < delays.size(); ++l) {
    if (bounds && !bounds->b.empty() && bounds->b[l]) {
      b_fixed[l] = *bounds->b[l];
      if (!delays[l].b.is_constant()) out.evidence = weaker(out.evidence, Evidence::UserBounds);
    } else if (delays[l].b.is_constant()) {
      b_fixed[l] = entrywise_abs(delays[l].b.constant());
    }
  }
  const bool all_fixed =
      a_fixed && std::all_of(b_fixed.begin(), b_fixed.end(), [](const auto& b) { return b.has_value(); });
  std::vector<double> steps;
  if (all_fixed) {
    steps.push_back(0.0);
  } else {
    if (k_grid.empty()) throw InputError("time-varying matrices require a nonempty step grid");
    steps.assign(k_grid.begin(), k_grid.end());
    out.evidence = Evidence::GridEvidence;
  }

  const double xi_norm = norm1(xi);
  double worst = -std::numeric_limits<double>::infinity();
  bool holds = true;
  std::vector<DelayBound> b_now(delays.size());
  for (double k : steps) {
    const Matrix a_abs = a_fixed ? *a_fixed : entrywise_abs(sys.a().at(k));
    for (std::size_t l = 0; l < delays.size(); ++l)
      b_now[l] = {delays[l].h, b_fixed[l] ? *b_fixed[l] : entrywise_abs(delays[l].b.at(k))};
    Vector d = rate_condition_defect(a_abs, b_now, sector, xi, lambda);
    const double band = metzler::kStrictness * defect_scale(a_abs, b_now, sector, lambda) * xi_norm;
    const double row_worst = max_element(d);
    if (row_worst > band) holds = false;
    if (row_worst > worst) {
      worst = row_worst;
      out.worst_k = k;
      out.worst_defect = std::move(d);
    }
  }
  out.holds = holds;
  out.margin = -worst;
  return out;
}

Matrix summed(const Matrix& a, std::span<const DelayBound> b_ls) {
  Matrix s = a;
  for (const auto& b : b_ls) s += b.b;
  return s;
}

}  // namespace

const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::SingleDelay: return "DiscreteSingleDelay";
    case Criterion::MultiDelay: return "DiscreteMultiDelay";
    case Criterion::PositiveBounds: return "DiscretePositiveBounds";
  }
  return "?";
}

Vector rate_condition_defect(const Matrix& a_abs, std::span<const DelayBound> b_abs,
                             const SectorBounds& sector, std::span<const double> xi, double lambda) {
  const std::size_t n = xi.size();
  require_square(a_abs, n, "|A|");
  const Vector& beta = sector.beta();
  Vector d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += a_abs(i, j) * beta[j] * xi[j];
    d[i] = s;
  }
  for (const auto& b : b_abs) {
    require_square(b.b, n, "|B|");
    const double growth = std::pow(lambda, -b.h);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += b.b(i, j) * beta[j] * xi[j];
      d[i] += growth * s;
    }
  }
  for (std::size_t i = 0; i < n; ++i) d[i] -= lambda * xi[i];
  return d;
}

RateCheck check_single_delay_rate(const DiscreteSystem& sys, const SectorBounds& sector,
                                  std::span<const double> xi, double lambda,
                                  std::span<const double> k_grid) {
  if (sys.delays().size() > 1)
    throw InputError("single-delay check applied to a system with several delays");
  return check_rate(sys, sector, xi, lambda, k_grid);
}

RateCheck check_multi_delay_rate(const DiscreteSystem& sys, const SectorBounds& sector,
                                 std::span<const double> xi, double lambda,
                                 std::span<const double> k_grid) {
  return check_rate(sys, sector, xi, lambda, k_grid);
}

double convergence_function(const Matrix& a, std::span<const DelayBound> b_ls,
                            const SectorBounds& sector, std::span<const double> xi,
                            std::size_t row, double lambda) {
  const Vector& beta = sector.beta();
  double g = 0.0;
  for (std::size_t j = 0; j < xi.size(); ++j) g += a(row, j) * beta[j] * xi[j];
  for (const auto& b : b_ls) {
    double s = 0.0;
    for (std::size_t j = 0; j < xi.size(); ++j) s += b.b(row, j) * beta[j] * xi[j];
    g += std::pow(lambda, -b.h) * s;
  }
  return g - lambda * xi[row];
}

std::variant<ConvergenceProfile, Rejection> convergence_profile(const Matrix& a,
                                                                std::span<const DelayBound> b_ls,
                                                                const SectorBounds& sector,
                                                                std::span<const double> xi) {
  const std::size_t n = a.rows();
  require_square(a, n, "A");
  require_xi(xi, n);
  if (sector.dim() != n) throw InputError("sector dimension does not match system");
  if (!is_nonnegative(a)) throw InputError("A must be nonnegative");
  int prev = 0;
  for (const auto& b : b_ls) {
    require_square(b.b, n, "B");
    if (!is_nonnegative(b.b)) throw InputError("B must be nonnegative");
    if (b.h <= prev) throw InputError("delays must be positive and strictly increasing");
    prev = b.h;
  }

  // (A + sum B_l) D_beta xi << xi, i.e. g_i(1) < 0 with the strictness band.
  const Matrix total = summed(a, b_ls) * sector.d_beta();
  Vector pre = total * xi;
  for (std::size_t i = 0; i < n; ++i) pre[i] -= xi[i];
  const double band =
      metzler::kStrictness * (total - Matrix::identity(n)).norm_inf() * norm1(xi);
  if (!metzler::strictly_negative(pre, band)) {
    std::ostringstream os;
    os << "(A + sum B_l) D_beta xi << xi fails (max defect " << max_element(pre) << ")";
    return Rejection{RejectReason::ProfilePrecondition, os.str()};
  }

  const Vector& beta = sector.beta();
  ConvergenceProfile out;
  out.rates.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double delayed = 0.0;
    for (const auto& b : b_ls)
      for (std::size_t j = 0; j < n; ++j) delayed += b.b(i, j) * beta[j] * xi[j];
    if (delayed == 0.0) {
      double c = 0.0;
      for (std::size_t j = 0; j < n; ++j) c += a(i, j) * beta[j] * xi[j];
      double root = c / xi[i];
      // Division may round to the infeasible side by an ulp.
      for (int k = 0; k < 4 && root > 0.0 && c - root * xi[i] > 0.0; ++k) root = std::nextafter(root, 2.0);
      out.rates[i] = root;
      if (root == 0.0) out.degenerate = true;
      continue;
    }
    auto g = [&](double lambda) { return convergence_function(a, b_ls, sector, xi, i, lambda); };
    if (g(kLambdaFloor) <= 0.0) {
      out.rates[i] = kLambdaFloor;
      continue;
    }
    // g decreases on (0, 1): keep lo on the infeasible side, return hi.
    const auto [lo, hi] =
        detail::bisect(kLambdaFloor, kLambdaCeil, kRootTolerance, [&](double l) { return g(l) > 0.0; });
    (void)lo;
    out.rates[i] = hi;
  }
  out.binding_row = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (out.rates[i] > out.rates[out.binding_row] + kRootTolerance) out.binding_row = i;
  out.lambda_max = out.rates[out.binding_row];
  return out;
}

CertificateOutcome certify_bounded_system(const Matrix& a, std::span<const DelayBound> b_ls,
                                          const SectorBounds& sector, std::optional<Vector> xi) {
  const std::size_t n = a.rows();
  require_square(a, n, "A");
  if (sector.dim() != n) throw InputError("sector dimension does not match system");
  if (!is_nonnegative(a)) throw InputError("bound on |A| must be nonnegative");
  for (const auto& b : b_ls)
    if (!is_nonnegative(b.b)) throw InputError("bound on |B| must be nonnegative");

  const Matrix comparison = summed(a, b_ls) * sector.d_beta();
  const double rho = metzler::spectral_radius(comparison);
  if (rho >= 1.0) {
    std::ostringstream os;
    os << "(A + sum B_l) D_beta is not Schur (spectral radius " << rho << ")";
    return Rejection{RejectReason::NecessityViolated, os.str(), rho};
  }

  Vector weights;
  if (xi) {
    require_xi(*xi, n);
    weights = normalized(*xi);
  } else {
    const auto witness = metzler::find_schur_witness(comparison);
    if (const auto* no = std::get_if<metzler::Infeasible>(&witness))
      return Rejection{RejectReason::NoWitness, no->reason, no->spectral_value};
    weights = std::get<metzler::WitnessResult>(witness).xi;
  }

  auto profile = convergence_profile(a, b_ls, sector, weights);
  if (auto* r = std::get_if<Rejection>(&profile)) return *r;
  const auto& p = std::get<ConvergenceProfile>(profile);

  DiscreteCertificate cert;
  cert.lambda = std::clamp(p.lambda_max, kLambdaFloor, kLambdaCeil);
  cert.margin = -max_element(rate_condition_defect(a, b_ls, sector, weights, cert.lambda));
  cert.xi = std::move(weights);
  cert.criterion = Criterion::PositiveBounds;
  cert.profile = p;
  return cert;
}

ResolvedBounds resolve_bounds(const DiscreteSystem& sys, std::span<const double> k_grid) {
  ResolvedBounds out;
  const auto& bounds = sys.bounds();
  if (bounds && bounds->a) {
    out.a_abs = *bounds->a;
    if (!sys.a().is_constant()) out.evidence = weaker(out.evidence, Evidence::UserBounds);
  } else if (sys.a().is_constant()) {
    out.a_abs = entrywise_abs(sys.a().constant());
  } else {
    out.a_abs = sup_on_grid(sys.a(), k_grid, SupMode::Absolute);
    out.evidence = Evidence::GridEvidence;
  }
  const auto& delays = sys.delays();
  for (std::size_t l = 0; l < delays.size(); ++l) {
    const auto& d = delays[l];
    if (bounds && !bounds->b.empty() && bounds->b[l]) {
      out.b_abs.push_back({d.h, *bounds->b[l]});
      if (!d.b.is_constant()) out.evidence = weaker(out.evidence, Evidence::UserBounds);
    } else if (d.b.is_constant()) {
      out.b_abs.push_back({d.h, entrywise_abs(d.b.constant())});
    } else {
      out.b_abs.push_back({d.h, sup_on_grid(d.b, k_grid, SupMode::Absolute)});
      out.evidence = Evidence::GridEvidence;
    }
  }
  return out;
}

CertificateOutcome certify_system(const DiscreteSystem& sys, const SectorBounds& sector,
                                  std::span<const double> k_grid, std::optional<Vector> xi) {
  const ResolvedBounds rb = resolve_bounds(sys, k_grid);
  auto outcome = certify_bounded_system(rb.a_abs, rb.b_abs, sector, std::move(xi));
  if (auto* cert = std::get_if<DiscreteCertificate>(&outcome)) cert->evidence = rb.evidence;
  return outcome;
}

}  // namespace aes::dt
