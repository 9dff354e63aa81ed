#include "aes/fixtures.hpp"

#include <string>

namespace aes::fixtures {

namespace {

MatrixExpr parse2(const char* a, const char* b, const char* c, const char* d) {
  std::vector<Entry> e;
  for (const char* s : {a, b, c, d}) e.emplace_back(expr::Expression::parse(s));
  return MatrixExpr(2, std::move(e));
}

}  // namespace

ContinuousSystem example1_system(bool with_bounds) {
  MatrixExpr a = parse2("-4*t-12", "0", "t", "-2*t-5");
  MatrixExpr b = parse2("(1/3)*sin(t)", "(1/8)*cos(t)", "(1/3)*exp(-t)*cos(t)", "(1/8)*exp(-t)*sin(t)");
  std::optional<AssertedBounds> bounds;
  if (with_bounds) bounds = AssertedBounds{std::nullopt, {example1_b_bound()}};
  return ContinuousSystem(std::move(a), {{1.0, std::move(b)}}, std::move(bounds));
}

SectorBounds example1_sector() { return SectorBounds::bounded({1.0 / 3, 0.5}, {1.5, 2.0}); }

Matrix example1_b_bound() { return Matrix{{1.0 / 3, 1.0 / 8}, {1.0 / 3, 1.0 / 8}}; }

DiscreteSystem example2_system() {
  MatrixExpr a = parse2("-sin(t)", "2*exp(-3*t)", "3*cos(t)", "-sin(t)");
  MatrixExpr b = parse2("(1/2)*exp(-t)", "(1/3)*sin(t)", "(1/2)*exp(-2*t)", "(1/4)*cos(t)");
  AssertedBounds bounds{example2_a_bound(), {example2_b_bounds().front().b}};
  return DiscreteSystem(std::move(a), {{1, std::move(b)}}, std::move(bounds));
}

SectorBounds example2_sector() { return SectorBounds::positive_up_to({1.0 / 8, 1.0 / 14}); }

Matrix example2_a_bound() { return Matrix{{1.0, 2.0}, {3.0, 1.0}}; }

std::vector<dt::DelayBound> example2_b_bounds() {
  return {{1, Matrix{{0.5, 1.0 / 3}, {0.5, 0.25}}}};
}

ContinuousSystem scalar_delay_system() {
  return ContinuousSystem(MatrixExpr(Matrix{{-2.0}}), {{1.0, MatrixExpr(Matrix{{1.0}})}});
}

SectorBounds unit_sector(std::size_t n) { return SectorBounds::bounded(Vector(n, 1.0), Vector(n, 1.0)); }

}  // namespace aes::fixtures
