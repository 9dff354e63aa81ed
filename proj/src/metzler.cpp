#include "aes/metzler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "aes/system.hpp"

namespace aes::metzler {

namespace {

constexpr int kPerturbationRounds = 30;

void require_nonnegative(const Matrix& m, const char* what) {
  if (!m.square()) throw InputError(std::string(what) + ": matrix must be square");
  if (!m.all_finite()) throw InputError(std::string(what) + ": non-finite entry");
  if (!is_nonnegative(m)) throw InputError(std::string(what) + ": matrix must be nonnegative");
}

void require_metzler(const Matrix& m, const char* what) {
  if (!m.square()) throw InputError(std::string(what) + ": matrix must be square");
  if (!m.all_finite()) throw InputError(std::string(what) + ": non-finite entry");
  if (!is_metzler(m)) throw InputError(std::string(what) + ": matrix must be Metzler");
}

double diagonal_shift(const Matrix& m) {
  double c = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) c = std::max(c, std::abs(m(i, i)));
  return 1.0 + c;
}

/// Boolean transitive closure of the off-diagonal support graph.
std::vector<std::vector<bool>> reachability(const Matrix& m) {
  const std::size_t n = m.rows();
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i) {
    r[i][i] = true;
    for (std::size_t j = 0; j < n; ++j)
      if (i != j && m(i, j) != 0.0) r[i][j] = true;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      if (r[i][k])
        for (std::size_t j = 0; j < n; ++j)
          if (r[k][j]) r[i][j] = true;
  return r;
}

std::vector<std::vector<std::size_t>> strong_components(const Matrix& m) {
  const std::size_t n = m.rows();
  const auto r = reachability(m);
  std::vector<bool> placed(n, false);
  std::vector<std::vector<std::size_t>> blocks;
  for (std::size_t i = 0; i < n; ++i) {
    if (placed[i]) continue;
    std::vector<std::size_t> block;
    for (std::size_t j = i; j < n; ++j)
      if (!placed[j] && r[i][j] && r[j][i]) {
        block.push_back(j);
        placed[j] = true;
      }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

Matrix submatrix(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix s(idx.size(), idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a)
    for (std::size_t b = 0; b < idx.size(); ++b) s(a, b) = m(idx[a], idx[b]);
  return s;
}

/// Perron root of a nonnegative matrix whose diagonal is >= 1.
double shifted_perron_root(const Matrix& p) {
  double root = -std::numeric_limits<double>::infinity();
  for (const auto& block : strong_components(p)) {
    if (block.size() == 1) {
      root = std::max(root, p(block[0], block[0]));
      continue;
    }
    const PowerIteration it = power_iterate(submatrix(p, block));
    if (!it.converged) {
      std::ostringstream os;
      os << "power iteration did not converge after " << it.iterations
         << " iterations (block size " << block.size() << ", Collatz-Wielandt gap " << it.gap
         << ", estimate " << it.value << ")";
      throw ConvergenceError(os.str());
    }
    root = std::max(root, it.value);
  }
  return root;
}

Vector normalized(std::span<const double> v) {
  const double s = norm1(v);
  Vector out(v.begin(), v.end());
  for (double& x : out) x /= s;
  return out;
}

struct Defect {
  bool ok;
  double margin;
};

/// Hurwitz defect: -(m xi) must be strictly positive.
Defect hurwitz_defect(const Matrix& m, std::span<const double> xi) {
  if (std::any_of(xi.begin(), xi.end(), [](double v) { return !(v > 0.0); })) return {false, 0.0};
  const Vector mx = m * xi;
  const double band = kStrictness * m.norm_inf() * norm1(xi);
  return {strictly_negative(mx, band), -max_element(mx)};
}

/// Schur defect: xi - m xi must be strictly positive.
Defect schur_defect(const Matrix& m, std::span<const double> xi) {
  if (std::any_of(xi.begin(), xi.end(), [](double v) { return !(v > 0.0); })) return {false, 0.0};
  Vector d = m * xi;
  for (std::size_t i = 0; i < d.size(); ++i) d[i] -= xi[i];
  const Matrix shifted = m - Matrix::identity(m.rows());
  const double band = kStrictness * shifted.norm_inf() * norm1(xi);
  return {strictly_negative(d, band), -max_element(d)};
}

template <class DefectFn>
WitnessOutcome search_witness(const Matrix& m, double spectral_value, double eps0, double shift,
                              DefectFn defect) {
  const std::size_t n = m.rows();
  const Matrix shifted = m + shift * Matrix::identity(n);
  std::size_t total_iterations = 0;

  if (is_irreducible(m)) {
    const PowerIteration it = power_iterate(shifted);
    total_iterations += it.iterations;
    if (it.converged) {
      Vector xi = normalized(it.vector);
      const Defect d = defect(m, xi);
      if (d.ok) return WitnessResult{std::move(xi), d.margin, total_iterations, WitnessMethod::PerronEigenvector};
    }
  }

  double eps = eps0;
  for (int round = 0; round < kPerturbationRounds; ++round, eps *= 0.1) {
    const Matrix perturbed = shifted + eps * Matrix::ones(n, n);
    Vector found;
    const PowerIteration it = power_iterate(perturbed, [&](std::span<const double> x) {
      if (!defect(m, x).ok) return false;
      found.assign(x.begin(), x.end());
      return true;
    });
    total_iterations += it.iterations;
    if (found.empty() && it.converged && defect(m, it.vector).ok) found = it.vector;
    if (!found.empty()) {
      Vector xi = normalized(found);
      const Defect d = defect(m, xi);
      if (d.ok) return WitnessResult{std::move(xi), d.margin, total_iterations, WitnessMethod::PerturbedPerron};
    }
  }
  return Infeasible{spectral_value, "no positive witness satisfied the strictness band"};
}

}  // namespace

PowerIteration power_iterate(const Matrix& p,
                             const std::function<bool(std::span<const double>)>& accept) {
  const std::size_t n = p.rows();
  PowerIteration out;
  Vector x(n, 1.0 / static_cast<double>(n));
  if (accept && accept(x)) {
    out.accepted = true;
    out.vector = x;
    out.value = norm1(p * x);
    return out;
  }
  for (std::size_t it = 1; it <= kPowerIterationCap; ++it) {
    const Vector y = p * x;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i] > 0.0) {
        lo = std::min(lo, y[i] / x[i]);
        hi = std::max(hi, y[i] / x[i]);
      } else if (y[i] > 0.0) {
        hi = std::numeric_limits<double>::infinity();
      }
    }
    const double lambda = norm1(y);
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
      out.iterations = it;
      out.vector = x;
      out.value = lambda;
      return out;
    }
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double next = y[i] / lambda;
      diff = std::max(diff, std::abs(next - x[i]));
      x[i] = next;
    }
    out.iterations = it;
    out.value = lambda;
    out.gap = hi - lo;
    if (accept && accept(x)) {
      out.accepted = true;
      break;
    }
    if (diff < kPowerTolerance) {
      out.converged = true;
      break;
    }
  }
  out.vector = x;
  if (out.converged) out.value = norm1(p * x);
  return out;
}

bool is_irreducible(const Matrix& m) {
  if (m.rows() <= 1) return true;
  const auto r = reachability(m);
  for (const auto& row : r)
    if (std::find(row.begin(), row.end(), false) != row.end()) return false;
  return true;
}

double perron_root(const Matrix& nonneg) {
  require_nonnegative(nonneg, "perron_root");
  return shifted_perron_root(nonneg + Matrix::identity(nonneg.rows())) - 1.0;
}

double spectral_abscissa(const Matrix& m) {
  require_metzler(m, "spectral_abscissa");
  const double c = diagonal_shift(m);
  return shifted_perron_root(m + c * Matrix::identity(m.rows())) - c;
}

double spectral_radius(const Matrix& m) { return perron_root(m); }

const char* to_string(WitnessMethod m) {
  return m == WitnessMethod::PerronEigenvector ? "PerronEigenvector" : "PerturbedPerron";
}

WitnessOutcome find_hurwitz_witness(const Matrix& m) {
  const double mu = spectral_abscissa(m);
  if (mu >= 0.0) return Infeasible{mu, "spectral abscissa is nonnegative (not Hurwitz)"};
  const double eps0 = -mu / static_cast<double>(m.rows());
  return search_witness(m, mu, eps0, diagonal_shift(m), hurwitz_defect);
}

WitnessOutcome find_schur_witness(const Matrix& m) {
  const double rho = spectral_radius(m);
  if (rho >= 1.0) return Infeasible{rho, "spectral radius is >= 1 (not Schur)"};
  const double eps0 = (1.0 - rho) / static_cast<double>(m.rows());
  return search_witness(m, rho, eps0, 1.0, schur_defect);
}

bool strictly_negative(std::span<const double> v, double band) {
  return std::all_of(v.begin(), v.end(), [band](double x) { return x < 0.0 && x <= -band; });
}

}  // namespace aes::metzler
