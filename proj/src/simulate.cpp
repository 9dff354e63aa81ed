#include "aes/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <thread>

namespace aes::sim {

namespace {

/// Bit-stable uniform in [lo, hi) from the standardized mt19937_64 stream.
double uniform(std::mt19937_64& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool two_sided(const SectorBounds& s) { return s.kind() == SectorBounds::Kind::BoundedBelowAndAbove; }

double blend_floor(const SectorBounds& s, std::size_t i) {
  return two_sided(s) ? s.delta()[i] : 0.25 * s.beta()[i];
}

struct MatrixSet {
  Matrix a;
  std::vector<Matrix> b;
};

MatrixSet evaluate(const ContinuousSystem& sys, double t) {
  MatrixSet m{sys.a().at(t), {}};
  m.b.reserve(sys.delays().size());
  for (const auto& d : sys.delays()) m.b.push_back(d.b.at(t));
  return m;
}

void require_finite(std::span<const double> x, double t) {
  for (double v : x)
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "non-finite state at t = " << t;
      throw SimulationError(os.str());
    }
}

}  // namespace

const char* to_string(Shape s) {
  switch (s) {
    case Shape::LowerEdge: return "LowerEdge";
    case Shape::UpperEdge: return "UpperEdge";
    case Shape::Blend: return "Blend";
    case Shape::Saturating: return "Saturating";
  }
  return "?";
}

NonlinearitySample::NonlinearitySample(SectorBounds sector, std::vector<CoordinateShape> shapes,
                                       std::uint64_t seed)
    : sector_(std::move(sector)), shapes_(std::move(shapes)), seed_(seed) {
  if (shapes_.size() != sector_.dim()) throw InputError("one shape per coordinate is required");
  for (const auto& s : shapes_) {
    if (s.shape == Shape::LowerEdge && !two_sided(sector_))
      throw InputError("LowerEdge needs a sector with a positive lower slope");
    if (s.shape == Shape::Saturating && two_sided(sector_))
      throw InputError("Saturating leaves a sector with a positive lower slope");
    if (s.shape == Shape::Blend && !std::isfinite(s.omega))
      throw InputError("Blend frequency must be finite");
  }
}

NonlinearitySample NonlinearitySample::uniform(const SectorBounds& sector, Shape shape, double omega) {
  return NonlinearitySample(sector, std::vector<CoordinateShape>(sector.dim(), {shape, omega}));
}

double NonlinearitySample::operator()(std::size_t i, double x) const {
  const double beta = sector_.beta()[i];
  switch (shapes_[i].shape) {
    case Shape::LowerEdge:
      return sector_.delta()[i] * x;
    case Shape::UpperEdge:
      return beta * x;
    case Shape::Blend: {
      const double lo = blend_floor(sector_, i);
      return x * (lo + (beta - lo) * 0.5 * (1.0 + std::sin(shapes_[i].omega * x)));
    }
    case Shape::Saturating:
      return beta * x / (1.0 + x * x);
  }
  return 0.0;
}

void NonlinearitySample::apply(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = (*this)(i, x[i]);
}

bool NonlinearitySample::in_sector(std::size_t i, double x) const {
  if (x == 0.0) return (*this)(i, x) == 0.0;
  const double xf = x * (*this)(i, x);
  const double x2 = x * x;
  constexpr double rel = 1e-12;
  const double upper = sector_.beta()[i] * x2 * (1.0 + rel);
  if (two_sided(sector_)) return sector_.delta()[i] * x2 * (1.0 - rel) <= xf && xf <= upper;
  return 0.0 < xf && xf <= upper;
}

NonlinearitySample sample_nonlinearity(const SectorBounds& sector, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Shape two[] = {Shape::LowerEdge, Shape::UpperEdge, Shape::Blend};
  const Shape one[] = {Shape::UpperEdge, Shape::Saturating, Shape::Blend};
  const Shape* pool = two_sided(sector) ? two : one;
  std::vector<CoordinateShape> shapes(sector.dim());
  for (auto& s : shapes) {
    s.shape = pool[rng() % 3];
    s.omega = uniform(rng, 0.5, 5.0);
  }
  return NonlinearitySample(sector, std::move(shapes), seed);
}

std::vector<double> membership_grid() {
  std::vector<double> grid;
  grid.reserve(2006);
  for (int k = -1000; k <= 1000; ++k)
    if (k != 0) grid.push_back(k * 0.01);
  for (double v : {-1e6, -1e-6, 1e-6, 1e6}) grid.push_back(v);
  return grid;
}

std::size_t count_membership_violations(const NonlinearitySample& f, std::span<const double> x_grid) {
  std::size_t bad = 0;
  for (std::size_t i = 0; i < f.dim(); ++i) {
    if (!f.in_sector(i, 0.0)) ++bad;
    for (double x : x_grid)
      if (!f.in_sector(i, x)) ++bad;
  }
  return bad;
}

InitialHistory InitialHistory::constant(Vector value) {
  if (value.empty()) throw InputError("history must be nonempty");
  InitialHistory h;
  h.kind_ = Kind::Constant;
  h.values_ = std::move(value);
  return h;
}

InitialHistory InitialHistory::sinusoid(Vector amplitude, double frequency) {
  if (amplitude.empty()) throw InputError("history must be nonempty");
  InitialHistory h;
  h.kind_ = Kind::Sinusoid;
  h.values_ = std::move(amplitude);
  h.frequency_ = frequency;
  return h;
}

InitialHistory InitialHistory::random_piecewise_linear(std::size_t n, double span, std::uint64_t seed,
                                                       std::size_t knots, bool nonnegative) {
  if (n == 0 || knots < 2) throw InputError("piecewise-linear history needs n >= 1 and >= 2 knots");
  if (!(span >= 0.0)) throw InputError("history span must be nonnegative");
  std::mt19937_64 rng(seed);
  InitialHistory h;
  h.kind_ = Kind::RandomPiecewiseLinear;
  h.values_.assign(n, 0.0);
  h.span_ = span;
  h.knots_.resize(knots);
  for (auto& k : h.knots_) {
    k.resize(n);
    for (double& v : k) v = uniform(rng, nonnegative ? 0.0 : -1.0, 1.0);
  }
  return h;
}

Vector InitialHistory::at(double theta) const {
  switch (kind_) {
    case Kind::Constant:
      return values_;
    case Kind::Sinusoid: {
      Vector v = values_;
      const double c = std::cos(frequency_ * theta);
      for (double& x : v) x *= c;
      return v;
    }
    case Kind::RandomPiecewiseLinear: {
      const std::size_t segments = knots_.size() - 1;
      if (span_ == 0.0) return knots_.back();
      const double pos = std::clamp((theta + span_) / span_, 0.0, 1.0) * static_cast<double>(segments);
      const std::size_t k = std::min(static_cast<std::size_t>(pos), segments - 1);
      const double w = pos - static_cast<double>(k);
      Vector v(values_.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = (1.0 - w) * knots_[k][i] + w * knots_[k + 1][i];
      return v;
    }
  }
  return values_;
}

double InitialHistory::norm(double h) const {
  switch (kind_) {
    case Kind::Constant:
    case Kind::Sinusoid:
      return norm1(values_);  // cos(0) = 1 attains the sup
    case Kind::RandomPiecewiseLinear: {
      // The l1 norm is convex along each segment, so the sup sits on a knot
      // or on the truncation point -h.
      const std::size_t segments = knots_.size() - 1;
      double best = norm1(at(-h));
      for (std::size_t k = 0; k <= segments; ++k) {
        const double theta = -span_ + span_ * static_cast<double>(k) / static_cast<double>(segments);
        if (theta >= -h) best = std::max(best, norm1(knots_[k]));
      }
      return best;
    }
  }
  return 0.0;
}

double InitialHistory::norm_discrete(int h) const {
  double best = 0.0;
  for (int k = -h; k <= 0; ++k) best = std::max(best, norm1(at(k)));
  return best;
}

double effective_step(const ContinuousSystem& sys, double requested) {
  if (!(requested > 0.0) || !std::isfinite(requested)) throw InputError("step must be positive");
  if (sys.delays().empty()) return requested;
  const double h_min = sys.delays().front().h;
  return h_min / std::ceil(h_min / requested - 1e-12);
}

SimulationTrace integrate_dde(const ContinuousSystem& sys, const NonlinearitySample& f,
                              const InitialHistory& phi, double horizon, double requested_step) {
  const std::size_t n = sys.dim();
  if (f.dim() != n || phi.dim() != n) throw InputError("nonlinearity/history dimension mismatch");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InputError("horizon must be positive");
  if (!sys.delays().empty() && horizon < 5.0 * sys.max_delay() * (1.0 - 1e-12))
    throw InputError("horizon must be at least 5 h_max");
  const double step = effective_step(sys, requested_step);
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / step - 1e-9));
  const auto& delays = sys.delays();
  std::vector<double> lags(delays.size());
  for (std::size_t l = 0; l < delays.size(); ++l) lags[l] = delays[l].h / step;

  SimulationTrace trace;
  trace.times.resize(steps + 1);
  trace.states.resize(steps + 1);
  trace.norms.resize(steps + 1);
  std::vector<Vector> derivs(steps + 1);

  // Delayed state at fractional grid position p (<= the latest stored index).
  auto state_at = [&](double p) -> Vector {
    if (p <= 0.0) return phi.at(p * step);
    const double r = std::round(p);
    if (std::abs(p - r) < 1e-9) return trace.states[static_cast<std::size_t>(r)];
    const auto k = static_cast<std::size_t>(std::floor(p));
    const double s = p - static_cast<double>(k);
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
    const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
    Vector v(n);
    for (std::size_t i = 0; i < n; ++i)
      v[i] = h00 * trace.states[k][i] + h10 * step * derivs[k][i] + h01 * trace.states[k + 1][i] +
             h11 * step * derivs[k + 1][i];
    return v;
  };

  Vector fx(n), fd(n);
  auto rhs = [&](const MatrixSet& m, const Vector& x, double position) {
    f.apply(x, fx);
    Vector r = m.a * fx;
    for (std::size_t l = 0; l < lags.size(); ++l) {
      const Vector xd = state_at(position - lags[l]);
      f.apply(xd, fd);
      const Vector bd = m.b[l] * fd;
      for (std::size_t i = 0; i < n; ++i) r[i] += bd[i];
    }
    return r;
  };

  trace.times[0] = 0.0;
  trace.states[0] = phi.at(0.0);
  trace.norms[0] = norm1(trace.states[0]);
  MatrixSet now = evaluate(sys, 0.0);
  Vector tmp(n);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * step;
    const double pos = static_cast<double>(k);
    const Vector& x = trace.states[k];

    const Vector k1 = rhs(now, x, pos);
    derivs[k] = k1;
    const MatrixSet mid = evaluate(sys, t + 0.5 * step);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * step * k1[i];
    const Vector k2 = rhs(mid, tmp, pos + 0.5);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * step * k2[i];
    const Vector k3 = rhs(mid, tmp, pos + 0.5);
    MatrixSet next = evaluate(sys, static_cast<double>(k + 1) * step);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + step * k3[i];
    const Vector k4 = rhs(next, tmp, pos + 1.0);

    Vector xn(n);
    for (std::size_t i = 0; i < n; ++i) xn[i] = x[i] + step / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    require_finite(xn, t + step);
    trace.times[k + 1] = static_cast<double>(k + 1) * step;
    trace.norms[k + 1] = norm1(xn);
    trace.states[k + 1] = std::move(xn);
    now = std::move(next);
  }
  return trace;
}

SimulationTrace iterate_discrete(const DiscreteSystem& sys, const NonlinearitySample& f,
                                 const InitialHistory& phi, int horizon) {
  const std::size_t n = sys.dim();
  if (f.dim() != n || phi.dim() != n) throw InputError("nonlinearity/history dimension mismatch");
  const int h_max = sys.max_delay();
  if (horizon < 1 || horizon < 5 * h_max) throw InputError("horizon must be at least 5 h_max (and >= 1)");

  // buffer[k + h_max] holds x(k) for k in [-h_max, horizon].
  std::vector<Vector> buffer(static_cast<std::size_t>(horizon + h_max + 1));
  for (int k = -h_max; k <= 0; ++k) buffer[static_cast<std::size_t>(k + h_max)] = phi.at(k);
  auto x_at = [&](int k) -> const Vector& { return buffer[static_cast<std::size_t>(k + h_max)]; };

  Vector fx(n), fd(n);
  for (int k = 0; k < horizon; ++k) {
    const double kk = k;
    f.apply(x_at(k), fx);
    Vector next = sys.a().at(kk) * fx;
    for (const auto& d : sys.delays()) {
      f.apply(x_at(k - d.h), fd);
      const Vector bd = d.b.at(kk) * fd;
      for (std::size_t i = 0; i < n; ++i) next[i] += bd[i];
    }
    require_finite(next, kk + 1);
    buffer[static_cast<std::size_t>(k + 1 + h_max)] = std::move(next);
  }

  SimulationTrace trace;
  for (int k = 0; k <= horizon; ++k) {
    trace.times.push_back(k);
    trace.states.push_back(x_at(k));
    trace.norms.push_back(norm1(x_at(k)));
  }
  return trace;
}

EnvelopeReport check_envelope(const SimulationTrace& trace, double rate, double norm_phi,
                              TimeKind kind, double slack) {
  if (trace.times.empty()) throw InputError("envelope check needs a nonempty trace");
  if (!(norm_phi > 0.0)) throw InputError("envelope check needs a nonzero initial function");
  if (kind == TimeKind::Discrete && !(rate > 0.0 && rate < 1.0))
    throw InputError("discrete rate must lie in (0, 1)");
  if (kind == TimeKind::Continuous && !(rate > 0.0)) throw InputError("decay rate must be positive");

  EnvelopeReport r;
  r.rate = rate;
  const double log_growth = kind == TimeKind::Continuous ? rate : -std::log(rate);
  const double log_phi = std::log(norm_phi);
  double log_m = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < trace.times.size(); ++k)
    if (trace.norms[k] > 0.0)
      log_m = std::max(log_m, std::log(trace.norms[k]) + log_growth * trace.times[k] - log_phi);
  r.m_fit = std::exp(log_m);

  const double t_end = trace.times.back();
  const double t_start = trace.times.front() + (1.0 - kTailFraction) * (t_end - trace.times.front());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < trace.times.size(); ++k) {
    if (trace.times[k] < t_start || !(trace.norms[k] > 0.0)) continue;
    const double x = trace.times[k], y = std::log(trace.norms[k]);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++count;
  }
  if (count < 2) {
    r.degenerate = true;
    r.slope_fit = -std::numeric_limits<double>::infinity();
    r.pass = std::isfinite(r.m_fit);
    return r;
  }
  const double c = static_cast<double>(count);
  r.slope_fit = (c * sxy - sx * sy) / (c * sxx - sx * sx);
  const double bound = kind == TimeKind::Continuous ? -rate + slack : std::log(rate) + slack;
  r.pass = std::isfinite(r.m_fit) && r.slope_fit <= bound;
  return r;
}

InitialHistory harness_history(std::size_t n, double h, std::size_t b, std::uint64_t seed) {
  const std::uint64_t s = mix_seed(seed, 1000003ULL + b);
  std::mt19937_64 rng(s);
  switch (b % 3) {
    case 0: {
      Vector v(n);
      for (double& x : v) x = uniform(rng, -1.0, 1.0);
      if (norm1(v) == 0.0) v[0] = 1.0;
      return InitialHistory::constant(std::move(v));
    }
    case 1: {
      Vector a(n);
      for (double& x : a) x = uniform(rng, -1.0, 1.0);
      if (norm1(a) == 0.0) a[0] = 1.0;
      return InitialHistory::sinusoid(std::move(a), uniform(rng, 0.5, 3.0));
    }
    default:
      return InitialHistory::random_piecewise_linear(n, h, s, 5);
  }
}

NonlinearitySample harness_nonlinearity(const SectorBounds& sector, std::size_t a, std::uint64_t seed) {
  if (a == 0) return NonlinearitySample::uniform(sector, two_sided(sector) ? Shape::LowerEdge : Shape::UpperEdge);
  if (a == 1) return NonlinearitySample::uniform(sector, two_sided(sector) ? Shape::UpperEdge : Shape::Saturating);
  return sample_nonlinearity(sector, mix_seed(seed, a));
}

namespace {

struct RunResult {
  bool ok = false;
  EnvelopeReport env;
  std::string error;
};

template <class RunFn>
ValidationReport run_harness(const ValidationOptions& opt, double rate, double horizon, RunFn run) {
  const std::size_t total = opt.nonlinearities * opt.histories;
  std::vector<RunResult> results(total);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t idx = next++; idx < total; idx = next++) {
      try {
        results[idx].env = run(idx / opt.histories, idx % opt.histories);
        results[idx].ok = true;
      } catch (const std::exception& e) {
        results[idx].error = e.what();
      }
    }
  };
  unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(total, 1)));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }

  ValidationReport rep;
  rep.runs = total;
  rep.rate = rate;
  rep.horizon = horizon;
  rep.worst_slope = -std::numeric_limits<double>::infinity();
  for (std::size_t idx = 0; idx < total; ++idx) {
    const auto& r = results[idx];
    std::string what;
    if (!r.ok) {
      what = "run aborted: " + r.error;
    } else {
      rep.worst_m_fit = std::max(rep.worst_m_fit, r.env.m_fit);
      rep.worst_slope = std::max(rep.worst_slope, r.env.slope_fit);
      if (!r.env.pass) {
        std::ostringstream os;
        os << "envelope violated: M_fit = " << r.env.m_fit << ", slope = " << r.env.slope_fit;
        what = os.str();
      }
    }
    if (!what.empty()) {
      ++rep.failed;
      if (rep.failures.size() < 10) rep.failures.push_back({idx / opt.histories, idx % opt.histories, what});
    }
  }
  rep.pass = total > 0 && rep.failed == 0;
  return rep;
}

}  // namespace

ValidationReport monte_carlo_validate(const ContinuousSystem& sys, const SectorBounds& sector,
                                      double alpha, const ValidationOptions& opt) {
  if (sector.dim() != sys.dim()) throw InputError("sector dimension does not match system");
  const double h = sys.max_delay();
  const double horizon = opt.horizon > 0.0 ? opt.horizon : (h > 0.0 ? 10.0 * h : 10.0);
  return run_harness(opt, alpha, horizon, [&](std::size_t a, std::size_t b) {
    const NonlinearitySample f = harness_nonlinearity(sector, a, opt.seed);
    const InitialHistory phi = harness_history(sys.dim(), h, b, opt.seed);
    const SimulationTrace trace = integrate_dde(sys, f, phi, horizon, opt.step);
    return check_envelope(trace, alpha, phi.norm(h), TimeKind::Continuous, opt.slack);
  });
}

ValidationReport monte_carlo_validate(const DiscreteSystem& sys, const SectorBounds& sector,
                                      double lambda, const ValidationOptions& opt) {
  if (sector.dim() != sys.dim()) throw InputError("sector dimension does not match system");
  const int h = sys.max_delay();
  const int horizon = opt.horizon > 0.0 ? static_cast<int>(std::lround(opt.horizon)) : std::max(50, 10 * h);
  return run_harness(opt, lambda, horizon, [&](std::size_t a, std::size_t b) {
    const NonlinearitySample f = harness_nonlinearity(sector, a, opt.seed);
    const InitialHistory phi = harness_history(sys.dim(), h, b, opt.seed);
    const SimulationTrace trace = iterate_discrete(sys, f, phi, horizon);
    return check_envelope(trace, lambda, phi.norm_discrete(h), TimeKind::Discrete, opt.slack);
  });
}

}  // namespace aes::sim
