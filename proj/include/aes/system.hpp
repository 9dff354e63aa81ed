#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "aes/expr.hpp"
#include "aes/matrix.hpp"

namespace aes {

/// Admissible sector for the diagonal nonlinearity f = (f_1, ..., f_n).
///
/// `BoundedBelowAndAbove`: delta_i x^2 <= x f_i(x) <= beta_i x^2, 0 < delta_i <= beta_i.
/// `PositiveUpTo`:        0 < x f_i(x) <= beta_i x^2 (delta unused).
class SectorBounds {
 public:
  enum class Kind { BoundedBelowAndAbove, PositiveUpTo };

  static SectorBounds bounded(Vector delta, Vector beta);
  static SectorBounds positive_up_to(Vector beta);

  Kind kind() const { return kind_; }
  std::size_t dim() const { return beta_.size(); }
  /// Throws InputError for `PositiveUpTo` sectors.
  const Vector& delta() const;
  const Vector& beta() const { return beta_; }

  Matrix d_delta() const { return Matrix::diagonal(delta()); }
  Matrix d_beta() const { return Matrix::diagonal(beta_); }

  /// Throws InputError unless kind() == k.
  void require_kind(Kind k, const std::string& what) const;

 private:
  SectorBounds(Kind kind, Vector delta, Vector beta);

  Kind kind_;
  Vector delta_;
  Vector beta_;
};

/// How a "for every t" hypothesis was discharged.
enum class Evidence {
  Exact,       // every matrix involved is constant
  UserBounds,  // time-varying entries replaced by user-asserted constant bounds
  GridEvidence // time-varying entries sampled on a finite grid (not a proof)
};

const char* to_string(Evidence e);

/// One entry of a coefficient matrix: a constant or a function of t.
using Entry = std::variant<double, expr::Expression>;

/// Square matrix whose entries may depend on time (continuous t or step k).
class MatrixExpr {
 public:
  MatrixExpr() = default;
  explicit MatrixExpr(const Matrix& constant);
  MatrixExpr(std::size_t n, std::vector<Entry> entries);

  std::size_t dim() const { return n_; }
  const Entry& entry(std::size_t i, std::size_t j) const { return entries_[i * n_ + j]; }

  /// True when no entry references t.
  bool is_constant() const { return constant_.has_value(); }
  /// Only valid when is_constant().
  const Matrix& constant() const;

  Matrix at(double t) const;

 private:
  std::size_t n_ = 0;
  std::vector<Entry> entries_;
  std::optional<Matrix> constant_;
};

/// Optional user-asserted entrywise bounds. For continuous systems `a` is a
/// Metzler upper bound of the Metzlerized A(t) and `b[l]` a nonnegative bound
/// of |B_l(t)|; for discrete systems `a` bounds |A(k)|.
struct AssertedBounds {
  std::optional<Matrix> a;
  std::vector<std::optional<Matrix>> b;  // empty or one slot per delay
};

struct ContinuousDelay {
  double h;
  MatrixExpr b;
};

/// x'(t) = A(t) f(x(t)) + sum_l B_l(t) f(x(t - h_l)).
class ContinuousSystem {
 public:
  ContinuousSystem(MatrixExpr a, std::vector<ContinuousDelay> delays,
                   std::optional<AssertedBounds> bounds = std::nullopt);

  std::size_t dim() const { return a_.dim(); }
  const MatrixExpr& a() const { return a_; }
  const std::vector<ContinuousDelay>& delays() const { return delays_; }
  const std::optional<AssertedBounds>& bounds() const { return bounds_; }
  double max_delay() const { return delays_.empty() ? 0.0 : delays_.back().h; }
  bool is_constant() const;

 private:
  MatrixExpr a_;
  std::vector<ContinuousDelay> delays_;
  std::optional<AssertedBounds> bounds_;
};

struct DiscreteDelay {
  int h;
  MatrixExpr b;
};

/// x(k+1) = A(k) f(x(k)) + sum_l B_l(k) f(x(k - h_l)).
class DiscreteSystem {
 public:
  DiscreteSystem(MatrixExpr a, std::vector<DiscreteDelay> delays,
                 std::optional<AssertedBounds> bounds = std::nullopt);

  std::size_t dim() const { return a_.dim(); }
  const MatrixExpr& a() const { return a_; }
  const std::vector<DiscreteDelay>& delays() const { return delays_; }
  const std::optional<AssertedBounds>& bounds() const { return bounds_; }
  int max_delay() const { return delays_.empty() ? 0 : delays_.back().h; }
  bool is_constant() const;

 private:
  MatrixExpr a_;
  std::vector<DiscreteDelay> delays_;
  std::optional<AssertedBounds> bounds_;
};

/// Keeps the diagonal and replaces off-diagonal entries by their absolute value.
Matrix metzlerize(const Matrix& m);
Matrix entrywise_abs(const Matrix& m);

bool is_metzler(const Matrix& m);
bool is_nonnegative(const Matrix& m);

enum class SupMode {
  Absolute,  // max_t |m_ij(t)|
  Metzler    // max_t of the Metzlerized entries (diagonal keeps its sign)
};

/// Entrywise maximum over a time grid. Grid evidence only, never a proof.
Matrix sup_on_grid(const MatrixExpr& m, std::span<const double> t_grid,
                   SupMode mode = SupMode::Absolute);

/// Uniform grid {0, step, 2 step, ...} up to and including t_max (within
/// rounding).
std::vector<double> make_grid(double t_max, double step);

/// [0, 10 h_max] with step h_max / 100; [0, 10] with step 0.01 without delays.
std::vector<double> default_grid(double h_max);

/// Integer steps {0, 1, ..., k_max}.
std::vector<double> step_grid(int k_max);

/// {0, ..., max(100, 10 h_max)}.
std::vector<double> default_step_grid(int h_max);

}  // namespace aes
