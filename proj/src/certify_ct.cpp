#include "aes/certify_ct.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "aes/metzler.hpp"
#include "detail/bisect.hpp"

namespace aes::ct {

namespace {

constexpr double kRootTolerance = 1e-12;
constexpr int kBracketDoublings = 1100;

Evidence weaker(Evidence a, Evidence b) { return static_cast<int>(a) > static_cast<int>(b) ? a : b; }

void require_xi(std::span<const double> xi, std::size_t n) {
  if (xi.size() != n) throw InputError("xi has wrong dimension");
  for (double v : xi)
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("xi must be strictly positive and finite");
}

struct BBound {
  std::vector<DelayBound> bars;
  Evidence evidence = Evidence::Exact;
};

BBound resolve_b(const ContinuousSystem& sys, std::span<const double> t_grid, BoundPolicy policy) {
  BBound out;
  const auto& delays = sys.delays();
  for (std::size_t l = 0; l < delays.size(); ++l) {
    const auto& d = delays[l];
    const auto& bounds = sys.bounds();
    if (bounds && !bounds->b.empty() && bounds->b[l]) {
      out.bars.push_back({d.h, *bounds->b[l]});
      if (!d.b.is_constant()) out.evidence = weaker(out.evidence, Evidence::UserBounds);
    } else if (d.b.is_constant()) {
      out.bars.push_back({d.h, entrywise_abs(d.b.constant())});
    } else if (policy == BoundPolicy::AllowGrid) {
      out.bars.push_back({d.h, sup_on_grid(d.b, t_grid, SupMode::Absolute)});
      out.evidence = Evidence::GridEvidence;
    } else {
      throw InputError("time-varying delay matrix B_" + std::to_string(l + 1) +
                       " needs a constant bound (or grid evidence)");
    }
  }
  return out;
}

double lhs_scale(const Matrix& a_hat, std::span<const DelayBound> b_bars, const SectorBounds& sector,
                 double alpha) {
  double s = (Matrix::diagonal(sector.delta()) * a_hat.transpose()).norm_inf() + alpha;
  for (const auto& b : b_bars)
    s += std::exp(alpha * b.h) * (Matrix::diagonal(sector.beta()) * b.b.transpose()).norm_inf();
  return s;
}

RateCheck check_rate(const ContinuousSystem& sys, const SectorBounds& sector,
                     std::span<const double> xi, double alpha, std::span<const double> t_grid,
                     BoundPolicy policy) {
  sector.require_kind(SectorBounds::Kind::BoundedBelowAndAbove, "rate check");
  if (sector.dim() != sys.dim()) throw InputError("sector dimension does not match system");
  require_xi(xi, sys.dim());
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("alpha must be positive and finite");

  const BBound b = resolve_b(sys, t_grid, policy);
  RateCheck out;
  out.evidence = b.evidence;

  const auto& bounds = sys.bounds();
  std::vector<double> times;
  std::optional<Matrix> fixed_a_hat;
  if (bounds && bounds->a) {
    fixed_a_hat = *bounds->a;
    if (!sys.a().is_constant()) out.evidence = weaker(out.evidence, Evidence::UserBounds);
  } else if (sys.a().is_constant()) {
    fixed_a_hat = metzlerize(sys.a().constant());
  } else {
    if (t_grid.empty()) throw InputError("time-varying A(t) requires a nonempty grid");
    out.evidence = Evidence::GridEvidence;
  }
  if (fixed_a_hat)
    times.push_back(0.0);
  else
    times.assign(t_grid.begin(), t_grid.end());

  const double xi_norm = norm1(xi);
  double worst = -std::numeric_limits<double>::infinity();
  bool holds = true;
  for (double t : times) {
    const Matrix a_hat = fixed_a_hat ? *fixed_a_hat : metzlerize(sys.a().at(t));
    Vector lhs = rate_condition_lhs(a_hat, b.bars, sector, xi, alpha);
    const double band = metzler::kStrictness * lhs_scale(a_hat, b.bars, sector, alpha) * xi_norm;
    double row_worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      const double defect = lhs[i] + alpha * xi[i];
      row_worst = std::max(row_worst, defect);
      if (defect > band) holds = false;
    }
    if (row_worst > worst) {
      worst = row_worst;
      out.worst_t = t;
      out.worst_lhs = std::move(lhs);
    }
  }
  out.holds = holds;
  out.margin = -worst;
  return out;
}

Matrix comparison_matrix(const Matrix& a_hat, std::span<const DelayBound> b_bars,
                         const SectorBounds& sector) {
  Matrix m = a_hat * sector.d_delta();
  for (const auto& b : b_bars) m += b.b * sector.d_beta();
  return m.transpose();
}

Matrix summed(const Matrix& a, std::span<const DelayBound> b_bars) {
  Matrix s = a;
  for (const auto& b : b_bars) s += b.b;
  return s;
}

Vector normalized(std::span<const double> v) {
  const double s = norm1(v);
  Vector out(v.begin(), v.end());
  for (double& x : out) x /= s;
  return out;
}

/// Shared tail of the constant-bound certifiers: necessity filter, witness,
/// maximal rate.
CertificateOutcome certify_from_bounds(const Matrix& a_hat, std::span<const DelayBound> b_bars,
                                       const SectorBounds& sector, std::optional<Vector> xi,
                                       Criterion criterion, Evidence evidence) {
  const double mu = metzler::spectral_abscissa(summed(a_hat, b_bars));
  if (mu >= 0.0) {
    std::ostringstream os;
    os << "A + sum B_l is not Hurwitz (spectral abscissa " << mu << ")";
    return Rejection{RejectReason::NecessityViolated, os.str(), mu};
  }

  Vector weights;
  if (xi) {
    require_xi(*xi, a_hat.rows());
    weights = normalized(*xi);
  } else {
    const auto witness = metzler::find_hurwitz_witness(comparison_matrix(a_hat, b_bars, sector));
    if (const auto* no = std::get_if<metzler::Infeasible>(&witness))
      return Rejection{RejectReason::NoWitness, no->reason, no->spectral_value};
    weights = std::get<metzler::WitnessResult>(witness).xi;
  }

  auto profile = decay_profile(a_hat, b_bars, sector, weights);
  if (auto* r = std::get_if<Rejection>(&profile)) return *r;
  const auto& p = std::get<DecayProfile>(profile);

  ContinuousCertificate cert;
  cert.alpha = p.alpha_max;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < weights.size(); ++i)
    worst = std::max(worst, decay_function(a_hat, b_bars, sector, weights, i, p.alpha_max));
  cert.margin = -worst;
  cert.xi = std::move(weights);
  cert.criterion = criterion;
  cert.evidence = evidence;
  cert.profile = p;
  return cert;
}

}  // namespace

const char* to_string(Criterion c) {
  switch (c) {
    case Criterion::SingleDelay: return "SingleDelay";
    case Criterion::NondelayWindow: return "NondelayWindow";
    case Criterion::ConstantBounds: return "ConstantBounds";
    case Criterion::PositiveTimeInvariant: return "PositiveTimeInvariant";
    case Criterion::MultiDelay: return "MultiDelay";
  }
  return "?";
}

Vector rate_condition_lhs(const Matrix& a_hat, std::span<const DelayBound> b_bars,
                          const SectorBounds& sector, std::span<const double> xi, double alpha) {
  const std::size_t n = xi.size();
  require_square(a_hat, n, "Ahat");
  const Vector& delta = sector.delta();
  const Vector& beta = sector.beta();
  Vector lhs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double col = 0.0;
    for (std::size_t j = 0; j < n; ++j) col += a_hat(j, i) * xi[j];
    lhs[i] = delta[i] * col;
  }
  for (const auto& b : b_bars) {
    require_square(b.b, n, "Bbar");
    const double growth = std::exp(alpha * b.h);
    for (std::size_t i = 0; i < n; ++i) {
      double col = 0.0;
      for (std::size_t j = 0; j < n; ++j) col += b.b(j, i) * xi[j];
      lhs[i] += growth * beta[i] * col;
    }
  }
  return lhs;
}

RateCheck check_single_delay_rate(const ContinuousSystem& sys, const SectorBounds& sector,
                                  std::span<const double> xi, double alpha,
                                  std::span<const double> t_grid, BoundPolicy policy) {
  if (sys.delays().size() > 1)
    throw InputError("single-delay check applied to a system with several delays");
  return check_rate(sys, sector, xi, alpha, t_grid, policy);
}

RateCheck check_multi_delay_rate(const ContinuousSystem& sys, const SectorBounds& sector,
                                 std::span<const double> xi, double alpha,
                                 std::span<const double> t_grid, BoundPolicy policy) {
  return check_rate(sys, sector, xi, alpha, t_grid, policy);
}

double decay_function(const Matrix& a_hat, std::span<const DelayBound> b_bars,
                      const SectorBounds& sector, std::span<const double> xi, std::size_t row,
                      double alpha) {
  const std::size_t n = xi.size();
  const double delta = sector.delta()[row];
  const double beta = sector.beta()[row];
  double g = 0.0;
  for (std::size_t j = 0; j < n; ++j) g += a_hat(j, row) * delta * xi[j];
  for (const auto& b : b_bars) {
    const double growth = std::exp(alpha * b.h);
    for (std::size_t j = 0; j < n; ++j) g += growth * b.b(j, row) * beta * xi[j];
  }
  return g + alpha * xi[row];
}

std::variant<DecayProfile, Rejection> decay_profile(const Matrix& a_hat,
                                                    std::span<const DelayBound> b_bars,
                                                    const SectorBounds& sector,
                                                    std::span<const double> xi) {
  sector.require_kind(SectorBounds::Kind::BoundedBelowAndAbove, "decay profile");
  const std::size_t n = a_hat.rows();
  require_square(a_hat, n, "Ahat");
  require_xi(xi, n);
  if (sector.dim() != n) throw InputError("sector dimension does not match system");
  for (const auto& b : b_bars) {
    require_square(b.b, n, "Bbar");
    if (!(b.h > 0.0)) throw InputError("delays must be positive");
  }

  DecayProfile out;
  out.rates.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto g = [&](double alpha) { return decay_function(a_hat, b_bars, sector, xi, i, alpha); };
    const double g0 = g(0.0);
    if (!(g0 < 0.0)) {
      std::ostringstream os;
      os << "g_" << i + 1 << "(0) = " << g0 << " is not negative for the given xi";
      return Rejection{RejectReason::ProfilePrecondition, os.str()};
    }
    double hi = 1.0;
    int doublings = 0;
    while (g(hi) <= 0.0) {
      if (++doublings > kBracketDoublings) throw InputError("decay profile: no bracket found");
      hi *= 2.0;
    }
    const auto [lo, up] = detail::bisect(0.0, hi, kRootTolerance, [&](double a) { return g(a) <= 0.0; });
    (void)up;
    out.rates[i] = lo;
  }
  out.binding_row = 0;
  for (std::size_t i = 1; i < n; ++i)
    if (out.rates[i] < out.rates[out.binding_row] - kRootTolerance) out.binding_row = i;
  out.alpha_max = out.rates[out.binding_row];
  return out;
}

ResolvedBounds resolve_bounds(const ContinuousSystem& sys, std::span<const double> t_grid,
                              BoundPolicy policy) {
  ResolvedBounds out;
  BBound b = resolve_b(sys, t_grid, policy);
  out.b_bars = std::move(b.bars);
  out.evidence = b.evidence;
  const auto& bounds = sys.bounds();
  if (bounds && bounds->a) {
    out.a_hat = *bounds->a;
    if (!sys.a().is_constant()) out.evidence = weaker(out.evidence, Evidence::UserBounds);
  } else if (sys.a().is_constant()) {
    out.a_hat = metzlerize(sys.a().constant());
  } else if (policy == BoundPolicy::AllowGrid) {
    out.a_hat = sup_on_grid(sys.a(), t_grid, SupMode::Metzler);
    out.evidence = Evidence::GridEvidence;
  } else {
    throw InputError("time-varying A(t) needs a constant Metzler bound (or grid evidence)");
  }
  return out;
}

CertificateOutcome find_rate_certificate(const ContinuousSystem& sys, const SectorBounds& sector,
                                         std::span<const double> t_grid, std::optional<Vector> xi,
                                         BoundPolicy policy) {
  sector.require_kind(SectorBounds::Kind::BoundedBelowAndAbove, "rate certificate");
  if (sector.dim() != sys.dim()) throw InputError("sector dimension does not match system");
  const ResolvedBounds rb = resolve_bounds(sys, t_grid, policy);
  const Criterion criterion =
      sys.delays().size() > 1 ? Criterion::MultiDelay : Criterion::ConstantBounds;
  return certify_from_bounds(rb.a_hat, rb.b_bars, sector, std::move(xi), criterion, rb.evidence);
}

std::variant<RateWindow, Rejection> nondelay_rate_window(const MatrixExpr& a,
                                                         const SectorBounds& sector,
                                                         std::span<const double> xi,
                                                         std::span<const double> t_grid) {
  const std::size_t n = a.dim();
  require_xi(xi, n);
  const Vector& delta = sector.delta();
  if (delta.size() != n) throw InputError("sector dimension does not match system");
  std::vector<double> times;
  if (a.is_constant())
    times.push_back(0.0);
  else if (t_grid.empty())
    throw InputError("time-varying A(t) requires a nonempty grid");
  else
    times.assign(t_grid.begin(), t_grid.end());

  double gamma = -std::numeric_limits<double>::infinity();
  for (double t : times) {
    const Matrix a_hat = metzlerize(a.at(t));
    for (std::size_t j = 0; j < n; ++j) {
      double col = 0.0;
      for (std::size_t i = 0; i < n; ++i) col += a_hat(i, j) * xi[i];
      gamma = std::max(gamma, col);
    }
  }
  if (!(gamma < 0.0)) {
    std::ostringstream os;
    os << "gamma = " << gamma << " is not negative";
    return Rejection{RejectReason::ConditionViolated, os.str()};
  }
  RateWindow w;
  w.gamma = gamma;
  w.delta0 = min_element(delta);
  w.d2 = max_element(xi);
  w.alpha_sup = -gamma * w.delta0 / w.d2;
  return w;
}

CertificateOutcome certify_positive_system(const Matrix& a, std::span<const DelayBound> delays,
                                           const SectorBounds& sector) {
  sector.require_kind(SectorBounds::Kind::BoundedBelowAndAbove, "positive system certificate");
  const std::size_t n = a.rows();
  require_square(a, n, "A");
  if (sector.dim() != n) throw InputError("sector dimension does not match system");
  if (!is_metzler(a)) throw InputError("A must be Metzler for the positive-system criterion");
  double prev = 0.0;
  for (const auto& d : delays) {
    require_square(d.b, n, "B");
    if (!is_nonnegative(d.b)) throw InputError("B must be nonnegative for the positive-system criterion");
    if (!(d.h > prev)) throw InputError("delays must be positive and strictly increasing");
    prev = d.h;
  }
  return certify_from_bounds(a, delays, sector, std::nullopt, Criterion::PositiveTimeInvariant,
                             Evidence::Exact);
}

bool necessary_condition_holds(const Matrix& a, const Matrix& b, std::span<const double> xi) {
  const std::size_t n = a.rows();
  require_square(a, n, "A");
  require_square(b, n, "B");
  require_xi(xi, n);
  const Matrix st = (a + b).transpose();
  const Vector v = st * xi;
  return metzler::strictly_negative(v, metzler::kStrictness * st.norm_inf() * norm1(xi));
}

DominanceReport dominance_sandwich_holds(const GeneralizedNonlinearity& g,
                                         std::span<const double> x_grid,
                                         std::span<const double> t_grid) {
  auto le = [](double a, double b) { return a <= b * (1.0 + 1e-12); };
  for (double t : t_grid)
    for (double x : x_grid)
      for (std::size_t j = 0; j < g.n; ++j) {
        const double base = std::abs(g.f(j, x));
        for (std::size_t i = 0; i < g.n; ++i) {
          const double v = std::abs(g.f_ij(i, j, x, t));
          const bool ok = (i == j) ? le(base, v) : le(v, base);
          if (!ok) return DominanceReport{false, i, j, x, t};
        }
      }
  return {};
}

}  // namespace aes::ct
