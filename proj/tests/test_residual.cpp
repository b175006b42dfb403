#include <cmath>
#include <random>

#include "doctest.h"
#include "pnorm/linalg.hpp"
#include "pnorm/oracle.hpp"
#include "pnorm/reference.hpp"
#include "pnorm/residual.hpp"

using namespace pnorm;

TEST_CASE("build_residual examples") {
  auto a = build_residual(Vector{1, -1}, 2);
  CHECK(a.g == Vector{1, -1});
  CHECK(a.r == Vector{1, 1});
  auto b = build_residual(Vector{2, -1, 0}, 4);
  CHECK(b.g[0] == doctest::Approx(8));
  CHECK(b.g[1] == doctest::Approx(-1));
  CHECK(b.g[2] == 0.0);
  CHECK(b.r[0] == doctest::Approx(4));
  CHECK(b.r[2] == 0.0);
  auto c = build_residual(Vector{3}, 3);
  CHECK(c.g[0] == doctest::Approx(9));
  CHECK(c.r[0] == doctest::Approx(3));
  CHECK(c.base_point == Vector{3});
}

TEST_CASE("residual_objective examples") {
  ResidualProblem rp{{1}, {1}, 2, {1}};
  CHECK(residual_objective(rp, Vector{0}) == 0.0);
  CHECK(residual_objective(rp, Vector{0.25}) == doctest::Approx(0.0625).epsilon(1e-15));
  double scale = 0;
  const double best = ray_residual(rp, Vector{1}, &scale);
  CHECK(best == doctest::Approx(1.0 / 12).epsilon(1e-12));
  CHECK(scale == doctest::Approx(1.0 / 6).epsilon(1e-9));
  auto grid = reference::grid_reference(reference::negated_residual(rp), Vector{-1}, Vector{1}, 1e-6);
  CHECK(-grid.value == doctest::Approx(1.0 / 12).epsilon(1e-10));
}

TEST_CASE("nu_grid examples") {
  SUBCASE("[4, 10]") {
    Vector x(16, std::pow(64.0, 0.25));  // ||x||_4^4 = 1024
    auto g = nu_grid(x, 4, 16, 1.0);
    CHECK(g.lo == 4);
    CHECK(g.hi == 10);
    CHECK(g.size() == 7);
    auto v = g.values();
    CHECK(v.front() == 16);
    CHECK(v.back() == 1024);
  }
  SUBCASE("[1, 3]") {
    auto g = nu_grid(Vector{2, 2}, 2, 2, 1.0);
    CHECK(g.lo == 1);
    CHECK(g.hi == 3);
  }
  SUBCASE("[-13, 0]") {
    auto g = nu_grid(Vector{1, 0, 0, 0}, 2, 4, 1e-3);
    CHECK(g.lo == -13);
    CHECK(g.hi == 0);
  }
  SUBCASE("zero start") {
    CHECK_THROWS_AS(nu_grid(Vector{0, 0}, 2, 2, 1.0), Error);
  }
}

TEST_CASE("line_minimize finds the one-dimensional minimizer") {
  // |1 - c|^4 + |1 - 2c|^4 is minimized where (1-c)^3 + 2(1-2c)^3 = 0
  const double c = line_minimize(Vector{1, 1}, Vector{1, 2}, 4);
  CHECK(std::pow(1 - c, 3) + 2 * std::pow(1 - 2 * c, 3) == doctest::Approx(0).epsilon(1e-10));
  CHECK(line_minimize(Vector{1, 1}, Vector{-1, -1}, 4) == 0.0);
}

namespace {

ConstrainedProblem random_problem(std::size_t n, std::size_t m, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  Vector dense(n * m), b(n);
  for (auto& v : dense) v = dist(rng);
  for (auto& v : b) v = dist(rng);
  return {SparseMatrix::from_dense(n, m, dense), b, p};
}

Vector least_squares(const ConstrainedProblem& pr) {
  return solve_linear({Vector(pr.a.cols(), 1.0), pr.a, pr.b}, 1e-12);
}

}  // namespace

TEST_CASE("refine at k = 2 reaches the least-squares optimum") {
  auto pr = random_problem(5, 12, 2, 9);
  const auto ls = least_squares(pr);
  Vector x0(ls);
  // move off the optimum inside the feasible set
  ConstraintSet cs(pr.a);
  KktSolver unit(cs, Vector(12, 1.0));
  Vector z(12);
  for (std::size_t i = 0; i < 12; ++i) z[i] = std::sin(1.0 + i);
  auto pz = unit.project(z);
  for (std::size_t i = 0; i < 12; ++i) x0[i] += pz[i];
  SmoothedOracle oracle(OracleConfig::defaults(OracleKind::Exact2));
  auto res = refine(pr, x0, 2, 1e-10, oracle);
  CHECK(pnorm_objective(res.x, 2) == doctest::Approx(pnorm_objective(ls, 2)).epsilon(1e-8));
  CHECK(res.report.oracle_calls >= 1);
  CHECK(feasibility_residual(pr.a, pr.b, res.x) < 1e-8);
}

TEST_CASE("refine leaves a singleton feasible set unchanged") {
  const double dense[] = {2, 1, 1, 3};
  ConstrainedProblem pr{SparseMatrix::from_dense(2, 2, dense), {3, 4}, 4};
  const Vector x0{1, 1};
  SmoothedOracle oracle(OracleConfig::defaults(OracleKind::Newton));
  auto res = refine(pr, x0, 4, 0.1, oracle);
  CHECK(res.x == x0);
  CHECK(res.report.iterations == 0);
}

TEST_CASE("refine at an optimal start takes no step") {
  const double dense[] = {1, 1};
  ConstrainedProblem pr{SparseMatrix::from_dense(1, 2, dense), {2}, 4};
  const Vector x0{1, 1};
  SmoothedOracle oracle(OracleConfig::defaults(OracleKind::Newton));
  auto res = refine(pr, x0, 4, 1e-3, oracle);
  CHECK(res.x[0] == doctest::Approx(1).epsilon(1e-12));
  CHECK(res.x[1] == doctest::Approx(1).epsilon(1e-12));
}

TEST_CASE("refine is monotone and feasible on every route") {
  auto pr = random_problem(4, 10, 6, 21);
  const auto x0 = least_squares(pr);
  for (auto route : {ReductionRoute::Smoothed, ReductionRoute::Qstoc, ReductionRoute::Box}) {
    RefineOptions opts;
    opts.route = route;
    opts.q = route == ReductionRoute::Box ? 2 : 3;
    SmoothedOracle oracle(OracleConfig::defaults(route == ReductionRoute::Box ? OracleKind::Box
                                                                              : OracleKind::Newton));
    auto res = refine(pr, x0, 6, 0.05, oracle, opts);
    const auto& tr = res.report.objective_trace;
    for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr[i] <= tr[i - 1] * (1 + 1e-14));
    CHECK(feasibility_residual(pr.a, pr.b, res.x) <= 1e-8 * (1 + norm2(pr.b)));
    CHECK(pnorm_objective(res.x, 6) <= pnorm_objective(x0, 6));
  }
}

TEST_CASE("refine reaches the requested accuracy against the reference") {
  auto pr = random_problem(3, 8, 4, 33);
  const auto ref = reference::pnorm_regression(pr, 1e-12);
  const double opt = pnorm_objective(ref, 4);
  const auto x0 = least_squares(pr);
  SmoothedOracle oracle(OracleConfig::defaults(OracleKind::Newton));
  RefineOptions opts;
  opts.q = 2;
  auto res = refine(pr, x0, 4, 1e-4, oracle, opts);
  CHECK(pnorm_objective(res.x, 4) <= (1 + 1e-4) * opt + 1e-12);
}

TEST_CASE("grid iteration cap raises IterationLimit") {
  auto pr = random_problem(3, 9, 8, 4);
  const auto x0 = least_squares(pr);
  SmoothedOracle oracle(OracleConfig::defaults(OracleKind::Exact2));
  RefineOptions opts;
  opts.max_iterations = 1;
  opts.line_search = false;
  try {
    refine(pr, x0, 8, 1e-9, oracle, opts);
    FAIL("expected IterationLimit");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IterationLimit);
  }
}

TEST_CASE("stationarity bracket at the residual optimum") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  for (double p : {2.0, 3.0, 4.0, 7.0}) {
    ResidualProblem rp;
    Vector x(3);
    for (auto& v : x) v = n(rng);
    rp = build_residual(x, p);
    auto d = reference::dense_reference(reference::negated_residual(rp), SparseMatrix::empty(3),
                                        Vector{}, 1e-12);
    double quad = 0;
    for (std::size_t i = 0; i < 3; ++i) quad += rp.r[i] * d[i] * d[i];
    const double lhs = 2 * quad + (p - 1) * pnorm_objective(d, p);
    CHECK(lhs <= residual_objective(rp, d) + 1e-6);
  }
}
