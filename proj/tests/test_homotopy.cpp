#include <cmath>
#include <random>

#include "doctest.h"
#include "pnorm/homotopy.hpp"
#include "pnorm/linalg.hpp"
#include "pnorm/reference.hpp"
#include "pnorm/report.hpp"

using namespace pnorm;

namespace {

ConstrainedProblem random_problem(std::size_t n, std::size_t m, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  Vector dense(n * m), b(n);
  for (auto& v : dense) v = dist(rng);
  for (auto& v : b) v = dist(rng);
  return {SparseMatrix::from_dense(n, m, dense), b, p};
}

ConstrainedProblem row_problem(std::initializer_list<double> row, double b, double p) {
  Vector r(row);
  return {SparseMatrix::from_dense(1, r.size(), r), {b}, p};
}

}  // namespace

TEST_CASE("homotopy schedule") {
  CHECK(homotopy_schedule(16, 2) == std::vector<double>{4, 8, 16});
  CHECK(homotopy_schedule(12, 2) == std::vector<double>{4, 8});
  CHECK(homotopy_schedule(3, 2).empty());
  CHECK(homotopy_schedule(2, 4).empty());
}

TEST_CASE("p = 2 matches least squares") {
  auto pr = random_problem(6, 14, 2, 5);
  auto ls = solve_linear({Vector(14, 1.0), pr.a, pr.b}, 1e-12);
  auto res = solve_pnorm(pr, 1e-6, 2, OracleConfig::defaults(OracleKind::Exact2));
  CHECK(pnorm_objective(res.x, 2) == doctest::Approx(pnorm_objective(ls, 2)).epsilon(1e-6));
}

TEST_CASE("symmetric two-variable p = 4") {
  for (auto kind : {OracleKind::Exact2, OracleKind::Newton, OracleKind::Box}) {
    auto res = solve_pnorm(row_problem({1, 1}, 2, 4), 1e-6, 2, OracleConfig::defaults(kind));
    CHECK(pnorm_objective(res.x, 4) <= 2 * (1 + 1e-6));
    CHECK(res.x[0] + res.x[1] == doctest::Approx(2).epsilon(1e-9));
  }
}

TEST_CASE("A = (1, 2), b = 3, p = 4") {
  auto res = solve_pnorm(row_problem({1, 2}, 3, 4), 1e-6, 2, OracleConfig::defaults(OracleKind::Newton));
  CHECK(pnorm_objective(res.x, 4) <= 1.85744291116077766 * (1 + 1e-6));
  CHECK(res.x[0] == doctest::Approx(0.852310960249950277).epsilon(1e-3));
  CHECK(res.x[1] == doctest::Approx(1.07384451987502486).epsilon(1e-3));
}

TEST_CASE("initial_q_solution examples") {
  auto cfg = OracleConfig::defaults(OracleKind::Newton);
  auto a = initial_q_solution(row_problem({1, 1}, 2, 2), 2, cfg);
  CHECK(a[0] == doctest::Approx(1));
  CHECK(a[1] == doctest::Approx(1));
  const double eye[] = {1, 0, 0, 1};
  ConstrainedProblem id{SparseMatrix::from_dense(2, 2, eye), {1, 2}, 2};
  auto b = initial_q_solution(id, 2, cfg);
  CHECK(b[0] == doctest::Approx(1));
  CHECK(b[1] == doctest::Approx(2));
  auto c = initial_q_solution(row_problem({1, 1}, 2, 4), 4, cfg);
  CHECK(c[0] == doctest::Approx(1).epsilon(1e-9));
  CHECK(c[1] == doctest::Approx(1).epsilon(1e-9));
}

TEST_CASE("initial_q_solution is within a factor 2 of the q-norm optimum") {
  auto pr = random_problem(5, 20, 6, 17);
  auto x = initial_q_solution(pr, 6, OracleConfig::defaults(OracleKind::Newton));
  auto ref = reference::pnorm_regression(pr, 1e-12);
  CHECK(pnorm_objective(x, 6) <= 2 * pnorm_objective(ref, 6));
}

TEST_CASE("prescale") {
  const double two[] = {1, 1};
  ConstrainedProblem pr{SparseMatrix::from_dense(1, 2, two), {2}, 2};
  auto same = prescale(pr, Vector{1, 1}, 2);
  CHECK(same.factor == doctest::Approx(1));
  auto s = prescale(pr, Vector{2, 0}, 2);
  CHECK(s.factor == doctest::Approx(std::sqrt(0.5)));
  CHECK(pnorm_objective(s.x0, 2) == doctest::Approx(2));
  CHECK(s.problem.b[0] == doctest::Approx(2 * std::sqrt(0.5)));
  CHECK_THROWS_AS(prescale(pr, Vector{0, 0}, 2), Error);
}

TEST_CASE("solving a prescaled problem and dividing by the factor recovers the optimum") {
  auto pr = random_problem(3, 8, 4, 40);
  auto cfg = OracleConfig::defaults(OracleKind::Newton);
  auto direct = solve_pnorm(pr, 1e-6, 2, cfg);
  auto s = prescale(pr, direct.x, 4);
  auto scaled = solve_pnorm(s.problem, 1e-6, 2, cfg);
  Vector back(scaled.x);
  for (auto& v : back) v /= s.factor;
  CHECK(pnorm_objective(back, 4) ==
        doctest::Approx(pnorm_objective(direct.x, 4)).epsilon(3e-6));
}

TEST_CASE("dual certificate bounds the optimum from below") {
  auto pr = random_problem(4, 12, 6, 8);
  auto ref = reference::pnorm_regression(pr, 1e-12);
  const double opt = pnorm_objective(ref, 6);
  auto at_opt = dual_certificate(pr, ref);
  CHECK(at_opt.lower_bound <= opt * (1 + 1e-12));
  CHECK(at_opt.relative_gap < 1e-8);
  auto ls = solve_linear({Vector(12, 1.0), pr.a, pr.b}, 1e-12);
  auto far = dual_certificate(pr, ls);
  CHECK(far.lower_bound <= opt * (1 + 1e-12));
  CHECK(far.relative_gap > 0);
}

TEST_CASE("end-to-end accuracy and determinism across oracles") {
  for (double p : {3.0, 5.0, 8.0}) {
    auto pr = random_problem(6, 20, p, static_cast<std::uint64_t>(p * 10));
    const double opt = pnorm_objective(reference::pnorm_regression(pr, 1e-13), p);
    for (auto kind : {OracleKind::Exact2, OracleKind::Newton}) {
      auto cfg = OracleConfig::defaults(kind);
      auto a = solve_pnorm(pr, 1e-4, 2, cfg);
      auto b = solve_pnorm(pr, 1e-4, 2, cfg);
      CHECK(pnorm_objective(a.x, p) <= (1 + 1e-4) * opt + 1e-9);
      CHECK(a.x == b.x);
      CHECK(deterministic_fingerprint(a.report) == deterministic_fingerprint(b.report));
    }
  }
}

TEST_CASE("homotopy start sandwich at each doubling") {
  auto pr = random_problem(4, 16, 16, 77);
  auto cfg = OracleConfig::defaults(OracleKind::Exact2);
  const std::size_t m = 16;
  Vector x = initial_q_solution(pr, 2, cfg);
  for (double k : homotopy_schedule(16, 2)) {
    auto stage = pr;
    stage.p = k;
    const double opt = pnorm_objective(reference::pnorm_regression(stage, 1e-12), k);
    CHECK(pnorm_objective(x, k) <= 4.0 * m * opt);
    x = solve_pnorm(stage, 0.5, 2, cfg).x;
  }
}

TEST_CASE("invalid inputs") {
  auto pr = row_problem({1, 1}, 2, 4);
  auto cfg = OracleConfig::defaults(OracleKind::Newton);
  CHECK_THROWS_AS(solve_pnorm(pr, 0, 2, cfg), Error);
  CHECK_THROWS_AS(solve_pnorm(pr, 2, 2, cfg), Error);
  pr.p = 1.5;
  CHECK_THROWS_AS(solve_pnorm(pr, 0.1, 2, cfg), Error);
}
