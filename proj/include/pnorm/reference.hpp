#pragma once

// Slow, independent solvers used to check the main code path. Dense linear
// algebra throughout; intended for a few hundred variables at most.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "pnorm/flows.hpp"
#include "pnorm/model.hpp"

namespace pnorm::reference {

// c^T x + sum w x^2 + sum_k s_k ||x||_{q_k}^{q_k} + scale * gamma_q(t, x)
struct SeparableObjective {
  std::size_t size = 0;
  Vector linear;
  Vector quadratic;
  struct Power {
    double scale = 1.0;
    double exponent = 2.0;
  };
  std::vector<Power> powers;
  struct Gamma {
    Vector t;
    double exponent = 2.0;
    double scale = 1.0;
  };
  std::optional<Gamma> gamma;

  double value(std::span<const double> x) const;
  void derivatives(std::span<const double> x, Vector& grad, Vector& hess) const;
};

SeparableObjective pnorm_objective(std::size_t m, double p);
// Negated residual objective, so minimizing it maximizes the residual.
SeparableObjective negated_residual(const ResidualProblem& rp);
// The smoothed objective; a gradient constraint must be appended to A by the caller.
SeparableObjective smoothed(const SmoothedProblem& sp);

// Projected Newton in a nullspace basis of A. Stops when the projected
// gradient norm is at most tolerance. Throws NoConvergence at the cap and
// InfeasibleRhs when A x = b has no solution.
Vector dense_reference(const SeparableObjective& objective, const SparseMatrix& a,
                       std::span<const double> b, double tolerance);

// min ||x||_p^p over A x = b via dense_reference, after rescaling b so the
// least-squares point has objective m (the tolerance is absolute).
Vector pnorm_regression(const ConstrainedProblem& problem, double tolerance);

struct GridResult {
  Vector point;
  double value = 0.0;
};

// Exhaustive scan of the box [lo, hi] with the given step, dimension <= 3.
// Throws EmptyBox when some lo > hi.
GridResult grid_reference(const SeparableObjective& objective, std::span<const double> lo,
                          std::span<const double> hi, double step);

// Exact min over flows of ||f||_inf for a single source and a single sink
// (demand D / unit-capacity max-flow value).
double min_congestion(const FlowInstance& instance);

}  // namespace pnorm::reference
