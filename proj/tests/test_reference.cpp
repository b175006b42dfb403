#include <cmath>
#include <random>

#include "doctest.h"
#include "pnorm/flows.hpp"
#include "pnorm/linalg.hpp"
#include "pnorm/reference.hpp"
#include "pnorm/residual.hpp"

using namespace pnorm;
using namespace pnorm::reference;

TEST_CASE("dense_reference on least squares matches the KKT solve") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n;
  Vector dense(4 * 10), b(4);
  for (auto& v : dense) v = n(rng);
  for (auto& v : b) v = n(rng);
  auto a = SparseMatrix::from_dense(4, 10, dense);
  auto x = dense_reference(pnorm_objective(10, 2), a, b, 1e-12);
  auto ls = solve_linear({Vector(10, 1.0), a, b}, 1e-12);
  for (std::size_t i = 0; i < 10; ++i) CHECK(x[i] == doctest::Approx(ls[i]).epsilon(1e-10));
}

TEST_CASE("dense_reference on the p = 4 two-route flow") {
  FlowInstance inst{3, {{0, 2}, {0, 1}, {1, 2}}, {}, {1, 0, -1}};
  auto pr = flow_problem(inst, 4);
  auto x = dense_reference(pnorm_objective(3, 4), pr.a, pr.b, 1e-13);
  CHECK(x[0] == doctest::Approx(0.557506665975557897).epsilon(1e-9));
}

TEST_CASE("residual maximum by dense and grid reference") {
  ResidualProblem rp{{1}, {1}, 2, {1}};
  auto obj = negated_residual(rp);
  auto x = dense_reference(obj, SparseMatrix::empty(1), Vector{}, 1e-13);
  CHECK(-obj.value(x) == doctest::Approx(1.0 / 12).epsilon(1e-12));
  auto g = grid_reference(obj, Vector{-1}, Vector{1}, 1e-6);
  CHECK(g.point[0] == doctest::Approx(1.0 / 6).epsilon(1e-5));
  CHECK(-g.value == doctest::Approx(1.0 / 12).epsilon(1e-10));
}

TEST_CASE("grid reference on a symmetric quadratic and an empty box") {
  SeparableObjective q;
  q.size = 2;
  q.linear = {-2, -4};
  q.quadratic = {1, 1};
  auto g = grid_reference(q, Vector{-3, -3}, Vector{5, 5}, 0.01);
  CHECK(g.point[0] == doctest::Approx(1).epsilon(1e-9));
  CHECK(g.point[1] == doctest::Approx(2).epsilon(1e-9));
  CHECK_THROWS_AS(grid_reference(q, Vector{1, 0}, Vector{0, 1}, 0.1), Error);
  SeparableObjective four;
  four.size = 4;
  four.quadratic = {1, 1, 1, 1};
  four.linear = {0, 0, 0, 0};
  CHECK_THROWS_AS(grid_reference(four, Vector(4, 0.0), Vector(4, 1.0), 0.5), Error);
}

TEST_CASE("dense and grid references agree on 2-D fixtures") {
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-1, 1), w(0.5, 2);
  for (int t = 0; t < 20; ++t) {
    SeparableObjective o;
    o.size = 2;
    o.linear = {u(rng), u(rng)};
    o.quadratic = {w(rng), w(rng)};
    o.powers.push_back({0.5, 4});
    auto x = dense_reference(o, SparseMatrix::empty(2), Vector{}, 1e-12);
    const double step = 2e-3;
    auto g = grid_reference(o, Vector{-2, -2}, Vector{2, 2}, step);
    Vector grad, hess;
    o.derivatives(g.point, grad, hess);
    const double lip = std::abs(grad[0]) + std::abs(grad[1]) + 10;
    CHECK(g.value >= o.value(x) - 1e-12);
    CHECK(g.value - o.value(x) <= 2 * step * lip);
  }
}

TEST_CASE("exact min congestion") {
  FlowInstance parallel{2, {{0, 1}, {0, 1}}, {}, {1, -1}};
  CHECK(min_congestion(parallel) == doctest::Approx(0.5));
  FlowInstance cycle{4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}, {}, {1, 0, -1, 0}};
  CHECK(min_congestion(cycle) == doctest::Approx(0.5));
  FlowInstance two{3, {{0, 2}, {0, 1}, {1, 2}}, {}, {2, 0, -2}};
  CHECK(min_congestion(two) == doctest::Approx(1));
}

TEST_CASE("infeasible constraints are reported") {
  const double dense[] = {1, 1, 1, 1};
  auto a = SparseMatrix::from_dense(2, 2, dense);
  CHECK_THROWS_AS(dense_reference(pnorm_objective(2, 2), a, Vector{1, 2}, 1e-10), Error);
}
