#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>

#include "aes/matrix.hpp"

namespace aes::metzler {

/// Relative band used to read strict vector inequalities numerically:
/// v << 0 means v_i <= -kStrictness * ||M||_inf * ||xi||_1 for every i, where
/// M is the matrix whose action produced v.
inline constexpr double kStrictness = 1e-10;

/// Power iteration stops when successive l1-normalized iterates differ by less
/// than this in the max norm.
inline constexpr double kPowerTolerance = 1e-13;
inline constexpr std::size_t kPowerIterationCap = 100000;

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PowerIteration {
  double value = 0.0;  // Perron root estimate
  Vector vector;       // l1-normalized, entrywise >= 0
  std::size_t iterations = 0;
  bool converged = false;
  bool accepted = false;  // stopped early by the acceptance predicate
  double gap = 0.0;       // Collatz-Wielandt bracket width at exit
};

/// Plain power iteration from the all-ones vector on a nonnegative matrix with
/// positive diagonal (primitive whenever irreducible). Never throws on
/// non-convergence; inspect `converged`. If `accept` is given it is called on
/// every normalized iterate and a true return stops the iteration.
PowerIteration power_iterate(const Matrix& p,
                             const std::function<bool(std::span<const double>)>& accept = {});

/// True when the directed graph of nonzero off-diagonal entries is strongly
/// connected.
bool is_irreducible(const Matrix& m);

/// Perron root of a nonnegative matrix. Reducible matrices are split into
/// strongly connected blocks and the largest block root is returned.
/// Throws ConvergenceError if a block does not converge within the cap.
double perron_root(const Matrix& nonneg);

/// Largest real part of the spectrum of a Metzler matrix, which is itself an
/// eigenvalue: perron_root(m + cI) - c with c = 1 + max_i |m_ii|.
double spectral_abscissa(const Matrix& metzler);

/// Spectral radius of a nonnegative matrix (its Perron root).
double spectral_radius(const Matrix& nonneg);

enum class WitnessMethod { PerronEigenvector, PerturbedPerron };
const char* to_string(WitnessMethod m);

struct WitnessResult {
  Vector xi;  // ||xi||_1 = 1, xi >> 0
  double margin = 0.0;
  std::size_t iterations = 0;
  WitnessMethod method = WitnessMethod::PerronEigenvector;
};

/// No positive witness exists (or none could be certified within tolerance).
struct Infeasible {
  double spectral_value = 0.0;  // abscissa or radius that decided it
  std::string reason;
};

using WitnessOutcome = std::variant<WitnessResult, Infeasible>;

/*!
 * Finds xi >> 0 with m xi << 0 for a Metzler matrix m.
 *
 * The witness is the Perron vector of m + cI when m is irreducible. For
 * reducible m, whose Perron vector may have zero components, the Perron
 * vector of m + eps * ones is used with eps shrinking by 10x until the
 * inequality holds for the original m. margin = min_i -(m xi)_i.
 *
 * Returns Infeasible carrying the spectral abscissa when it is >= 0.
 */
WitnessOutcome find_hurwitz_witness(const Matrix& m);

/// Finds xi >> 0 with m xi << xi for a nonnegative matrix m, by the same
/// construction. margin = min_i (xi_i - (m xi)_i). Infeasible when the
/// spectral radius is >= 1.
WitnessOutcome find_schur_witness(const Matrix& m);

/// True when every v_i <= -band and v_i < 0.
bool strictly_negative(std::span<const double> v, double band);

}  // namespace aes::metzler
