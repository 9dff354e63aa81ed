#pragma once

#include <vector>

#include "aes/certify_ct.hpp"
#include "aes/certify_dt.hpp"
#include "aes/system.hpp"

/// Worked examples shipped with the tool, plus their published values.
namespace aes::fixtures {

/// Two-dimensional continuous system with one unit delay:
///   A(t) = [[-4t - 12, 0], [t, -2t - 5]],
///   B(t) = [[sin t / 3, cos t / 8], [e^{-t} cos t / 3, e^{-t} sin t / 8]],
/// f in K[(1/3, 1/2), (3/2, 2)]. With `with_bounds` the constant bound
/// Bbar = [[1/3, 1/8], [1/3, 1/8]] is attached; A(t) stays unbounded below.
ContinuousSystem example1_system(bool with_bounds = true);
SectorBounds example1_sector();
Matrix example1_b_bound();

/// Two-dimensional discrete system with one unit delay:
///   A(k) = [[-sin k, 2 e^{-3k}], [3 cos k, -sin k]],
///   B(k) = [[e^{-k} / 2, sin k / 3], [e^{-2k} / 2, cos k / 4]],
/// f in K(0, (1/8, 1/14)], with bounds |A(k)| <= [[1, 2], [3, 1]] and
/// |B(k)| <= [[1/2, 1/3], [1/2, 1/4]] attached.
DiscreteSystem example2_system();
SectorBounds example2_sector();
Matrix example2_a_bound();
std::vector<dt::DelayBound> example2_b_bounds();

/// Published maximal convergence rate of the discrete example for xi = (1, 1).
inline constexpr double kExample2LambdaMax = 0.5840213813;

/// Scalar x' = -2 f(x) + f(x(t - 1)) with f in K[1, 1].
ContinuousSystem scalar_delay_system();
SectorBounds unit_sector(std::size_t n = 1);

}  // namespace aes::fixtures
