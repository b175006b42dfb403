#include "pnorm/model.hpp"

#include <cmath>
#include <string>

#include "pnorm/kernels.hpp"

namespace pnorm {

double pnorm_objective(std::span<const double> x, double p) {
  if (!(p >= 1.0)) throw Error(ErrorCode::BadExponent, "pnorm_objective requires p >= 1");
  for (double v : x)
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "pnorm_objective: non-finite entry");
  return kernels::pow_sum(x, p);
}

double smoothed_objective(const SmoothedProblem& sp, std::span<const double> x) {
  double quad = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) quad += sp.r[i] * x[i] * x[i];
  const double power = sp.s == 0.0 ? 0.0 : sp.s * kernels::pow_sum(x, sp.q);
  if (sp.form == SmoothedForm::UnconstrainedGradient) {
    return kernels::dot(sp.g, x) + 2.0 * quad + power;
  }
  return quad + power;
}

void SolveReport::append(const SolveReport& other) {
  iterations += other.iterations;
  oracle_calls += other.oracle_calls;
  objective_trace.insert(objective_trace.end(), other.objective_trace.begin(),
                         other.objective_trace.end());
  nu_trace.insert(nu_trace.end(), other.nu_trace.begin(), other.nu_trace.end());
  wall_time += other.wall_time;
}

double feasibility_residual(const SparseMatrix& a, std::span<const double> b,
                            std::span<const double> x) {
  Vector r = a.multiply(x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return norm2(r);
}

std::optional<Error> validate(const ConstrainedProblem& problem, double tolerance,
                              double max_exponent) {
  if (!std::isfinite(problem.p) || problem.p < 2.0 || problem.p > max_exponent) {
    return Error(ErrorCode::BadExponent,
                 "exponent p = " + std::to_string(problem.p) + " outside [2, " +
                     std::to_string(max_exponent) + "]");
  }
  if (problem.a.rows() != problem.b.size()) {
    return Error(ErrorCode::DimensionMismatch,
                 "A has " + std::to_string(problem.a.rows()) + " rows but b has " +
                     std::to_string(problem.b.size()) + " entries");
  }
  if (problem.a.cols() == 0) {
    return Error(ErrorCode::DimensionMismatch, "problem has no variables");
  }
  for (double v : problem.b)
    if (!std::isfinite(v)) return Error(ErrorCode::NonFinite, "b has a non-finite entry");
  if (problem.a.rows() == 0) return std::nullopt;

  try {
    LinearSolverOptions opts;
    ConstraintSet cs(problem.a, opts);
    KktSolver solver(cs, Vector(problem.a.cols(), 1.0), opts);
    const Vector x = solver.solve(problem.b);
    const double resid = feasibility_residual(problem.a, problem.b, x);
    if (!(resid <= tolerance * (1.0 + norm2(problem.b)))) {
      return Error(ErrorCode::InfeasibleRhs,
                   "b is not in the range of A (least-squares residual " + std::to_string(resid) +
                       ")");
    }
  } catch (const Error& e) {
    return e;
  }
  return std::nullopt;
}

void require_valid(const ConstrainedProblem& problem, double tolerance) {
  if (auto err = validate(problem, tolerance)) throw *err;
}

}  // namespace pnorm
