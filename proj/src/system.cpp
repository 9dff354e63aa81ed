#include "aes/system.hpp"

#include <algorithm>
#include <cmath>

namespace aes {

namespace {

void require_positive_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!(x > 0.0) || !std::isfinite(x))
      throw InputError(std::string(what) + " entries must be positive and finite");
}

void check_bounds(const AssertedBounds& bounds, std::size_t n, std::size_t delays, bool metzler_a) {
  if (bounds.a) {
    require_square(*bounds.a, n, "bound on A");
    if (!bounds.a->all_finite()) throw InputError("bound on A has non-finite entries");
    if (metzler_a && !is_metzler(*bounds.a))
      throw InputError("bound on A must be Metzler (nonnegative off-diagonal)");
    if (!metzler_a && !is_nonnegative(*bounds.a))
      throw InputError("bound on |A| must be nonnegative");
  }
  if (!bounds.b.empty() && bounds.b.size() != delays)
    throw InputError("bounds list must have one entry per delay");
  for (const auto& b : bounds.b) {
    if (!b) continue;
    require_square(*b, n, "bound on B");
    if (!b->all_finite()) throw InputError("bound on B has non-finite entries");
    if (!is_nonnegative(*b)) throw InputError("bound on |B| must be nonnegative");
  }
}

}  // namespace

SectorBounds::SectorBounds(Kind kind, Vector delta, Vector beta)
    : kind_(kind), delta_(std::move(delta)), beta_(std::move(beta)) {}

SectorBounds SectorBounds::bounded(Vector delta, Vector beta) {
  if (delta.size() != beta.size() || beta.empty())
    throw InputError("sector delta and beta must be nonempty and of equal length");
  require_positive_finite(delta, "sector delta");
  require_positive_finite(beta, "sector beta");
  for (std::size_t i = 0; i < delta.size(); ++i)
    if (delta[i] > beta[i]) throw InputError("sector requires delta_i <= beta_i");
  return SectorBounds(Kind::BoundedBelowAndAbove, std::move(delta), std::move(beta));
}

SectorBounds SectorBounds::positive_up_to(Vector beta) {
  if (beta.empty()) throw InputError("sector beta must be nonempty");
  require_positive_finite(beta, "sector beta");
  return SectorBounds(Kind::PositiveUpTo, {}, std::move(beta));
}

const Vector& SectorBounds::delta() const {
  if (kind_ != Kind::BoundedBelowAndAbove) throw InputError("sector has no lower slope delta");
  return delta_;
}

void SectorBounds::require_kind(Kind k, const std::string& what) const {
  if (kind_ != k)
    throw InputError(what + (k == Kind::BoundedBelowAndAbove
                                 ? " requires a two-sided sector [delta, beta]"
                                 : " requires a sector (0, beta]"));
}

const char* to_string(Evidence e) {
  switch (e) {
    case Evidence::Exact: return "Exact";
    case Evidence::UserBounds: return "UserBounds";
    case Evidence::GridEvidence: return "GridEvidence";
  }
  return "?";
}

MatrixExpr::MatrixExpr(const Matrix& constant) : n_(constant.rows()), constant_(constant) {
  require_square(constant, n_, "matrix");
  if (!constant.all_finite()) throw InputError("matrix has non-finite entries");
  entries_.assign(constant.data().begin(), constant.data().end());
}

MatrixExpr::MatrixExpr(std::size_t n, std::vector<Entry> entries)
    : n_(n), entries_(std::move(entries)) {
  if (entries_.size() != n * n) throw InputError("matrix entry count does not match n*n");
  Matrix m(n, n);
  bool constant = true;
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    if (const double* v = std::get_if<double>(&entries_[k])) {
      if (!std::isfinite(*v)) throw InputError("matrix has non-finite entries");
      m(k / n, k % n) = *v;
    } else {
      const auto& e = std::get<expr::Expression>(entries_[k]);
      if (e.is_constant()) {
        const double v = e.eval(0.0);
        entries_[k] = v;
        m(k / n, k % n) = v;
      } else {
        constant = false;
      }
    }
  }
  if (constant) constant_ = std::move(m);
}

const Matrix& MatrixExpr::constant() const {
  if (!constant_) throw InputError("matrix is time-varying");
  return *constant_;
}

Matrix MatrixExpr::at(double t) const {
  if (constant_) return *constant_;
  Matrix m(n_, n_);
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    const Entry& e = entries_[k];
    m(k / n_, k % n_) = std::holds_alternative<double>(e)
                            ? std::get<double>(e)
                            : std::get<expr::Expression>(e).eval(t);
  }
  return m;
}

ContinuousSystem::ContinuousSystem(MatrixExpr a, std::vector<ContinuousDelay> delays,
                                   std::optional<AssertedBounds> bounds)
    : a_(std::move(a)), delays_(std::move(delays)), bounds_(std::move(bounds)) {
  if (a_.dim() == 0) throw InputError("system dimension must be positive");
  double prev = 0.0;
  for (const auto& d : delays_) {
    if (!(d.h > prev) || !std::isfinite(d.h))
      throw InputError("delays must be positive and strictly increasing");
    if (d.b.dim() != a_.dim()) throw InputError("delay matrix dimension mismatch");
    prev = d.h;
  }
  if (bounds_) check_bounds(*bounds_, dim(), delays_.size(), true);
}

bool ContinuousSystem::is_constant() const {
  return a_.is_constant() &&
         std::all_of(delays_.begin(), delays_.end(), [](const auto& d) { return d.b.is_constant(); });
}

DiscreteSystem::DiscreteSystem(MatrixExpr a, std::vector<DiscreteDelay> delays,
                               std::optional<AssertedBounds> bounds)
    : a_(std::move(a)), delays_(std::move(delays)), bounds_(std::move(bounds)) {
  if (a_.dim() == 0) throw InputError("system dimension must be positive");
  int prev = 0;
  for (const auto& d : delays_) {
    if (d.h <= prev) throw InputError("delays must be positive and strictly increasing integers");
    if (d.b.dim() != a_.dim()) throw InputError("delay matrix dimension mismatch");
    prev = d.h;
  }
  if (bounds_) check_bounds(*bounds_, dim(), delays_.size(), false);
}

bool DiscreteSystem::is_constant() const {
  return a_.is_constant() &&
         std::all_of(delays_.begin(), delays_.end(), [](const auto& d) { return d.b.is_constant(); });
}

Matrix metzlerize(const Matrix& m) {
  if (!m.square()) throw InputError("metzlerize requires a square matrix");
  if (!m.all_finite()) throw InputError("metzlerize: non-finite entry");
  Matrix r = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (i != j) r(i, j) = std::abs(m(i, j));
  return r;
}

Matrix entrywise_abs(const Matrix& m) {
  Matrix r = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) r(i, j) = std::abs(m(i, j));
  return r;
}

bool is_metzler(const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (i != j && m(i, j) < 0.0) return false;
  return true;
}

bool is_nonnegative(const Matrix& m) {
  const auto d = m.data();
  return std::all_of(d.begin(), d.end(), [](double v) { return v >= 0.0; });
}

Matrix sup_on_grid(const MatrixExpr& m, std::span<const double> t_grid, SupMode mode) {
  if (t_grid.empty()) throw InputError("sup_on_grid: empty grid");
  auto transform = [mode](const Matrix& x) {
    return mode == SupMode::Metzler ? metzlerize(x) : entrywise_abs(x);
  };
  if (m.is_constant()) return transform(m.constant());
  Matrix sup = transform(m.at(t_grid[0]));
  for (std::size_t k = 1; k < t_grid.size(); ++k) {
    const Matrix x = transform(m.at(t_grid[k]));
    for (std::size_t i = 0; i < sup.rows(); ++i)
      for (std::size_t j = 0; j < sup.cols(); ++j) sup(i, j) = std::max(sup(i, j), x(i, j));
  }
  return sup;
}

std::vector<double> make_grid(double t_max, double step) {
  if (!(step > 0.0) || !(t_max >= 0.0) || !std::isfinite(t_max))
    throw InputError("grid requires step > 0 and finite t_max >= 0");
  const auto count = static_cast<std::size_t>(std::floor(t_max / step + 1e-9));
  std::vector<double> grid(count + 1);
  for (std::size_t k = 0; k <= count; ++k) grid[k] = static_cast<double>(k) * step;
  return grid;
}

std::vector<double> default_grid(double h_max) {
  if (h_max <= 0.0) return make_grid(10.0, 0.01);
  return make_grid(10.0 * h_max, h_max / 100.0);
}

std::vector<double> step_grid(int k_max) {
  if (k_max < 0) throw InputError("step grid requires k_max >= 0");
  std::vector<double> grid(static_cast<std::size_t>(k_max) + 1);
  for (int k = 0; k <= k_max; ++k) grid[static_cast<std::size_t>(k)] = k;
  return grid;
}

std::vector<double> default_step_grid(int h_max) { return step_grid(std::max(100, 10 * h_max)); }

}  // namespace aes
