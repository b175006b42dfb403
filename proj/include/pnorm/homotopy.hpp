#pragma once

#include <span>
#include <vector>

#include "pnorm/model.hpp"
#include "pnorm/oracle.hpp"
#include "pnorm/residual.hpp"

namespace pnorm {

struct SolveResult {
  Vector x;
  SolveReport report;
};

// Exponents visited before the final stage: 2q, 4q, ... while <= p.
std::vector<double> homotopy_schedule(double p, double q);

// (1 + eps)-approximate minimizer of ||x||_p^p over A x = b, built from a
// q-norm start and a doubling exponent schedule.
SolveResult solve_pnorm(const ConstrainedProblem& problem, double eps, double q,
                        const OracleConfig& cfg, const RefineOptions& opts = {});

// Least-squares point, refined at exponent q when q > 2.
Vector initial_q_solution(const ConstrainedProblem& problem, double q, const OracleConfig& cfg,
                          const RefineOptions& opts = {});

// Rescales b and x0 by c = (m / ||x0||_k^k)^{1/k}, so the scaled start has
// objective m. Throws ZeroInitial when x0 = 0.
struct Prescaled {
  ConstrainedProblem problem;
  Vector x0;
  double factor = 1.0;
};
Prescaled prescale(const ConstrainedProblem& problem, std::span<const double> x0, double k);

// Lower bound on the optimum from a dual point fitted to the gradient at x.
struct DualCertificate {
  double objective = 0.0;
  double lower_bound = 0.0;
  // (objective - lower_bound) / objective
  double relative_gap = 0.0;
};
DualCertificate dual_certificate(const ConstrainedProblem& problem, std::span<const double> x,
                                 const LinearSolverOptions& lin = {});

}  // namespace pnorm
