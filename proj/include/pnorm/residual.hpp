#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "pnorm/model.hpp"
#include "pnorm/oracle.hpp"
#include "pnorm/reduction.hpp"

namespace pnorm {

ResidualProblem build_residual(std::span<const double> x, double p);

// g^T D - 2 sum r D^2 - ||D||_p^p
double residual_objective(const ResidualProblem& rp, std::span<const double> delta);

// max_{c >= 0} residual_objective(c d); the maximizing c goes to *scale.
double ray_residual(const ResidualProblem& rp, std::span<const double> d, double* scale = nullptr);

// Powers of two 2^i for i in [lo, hi], with
// lo = floor(log2(accuracy ||x0||_k^k / (k m))) and hi = ceil(log2 ||x0||_k^k).
struct NuGrid {
  int lo = 0;
  int hi = -1;

  std::size_t size() const noexcept { return hi < lo ? 0 : static_cast<std::size_t>(hi - lo + 1); }
  std::vector<double> values() const;
};

// Throws EmptyGrid when the range is empty (x0 = 0 or accuracy too large).
NuGrid nu_grid(std::span<const double> x0, double k, std::size_t m, double accuracy);

// Minimizer over c >= 0 of sum |x - c d|^k (convex, one-dimensional).
double line_minimize(std::span<const double> x, std::span<const double> d, double k);

enum class ReductionRoute { Smoothed, Qstoc, Box };

struct RefineOptions {
  // Multiplier in the iteration bound c k m^e log(m / accuracy).
  double c = 2.0;
  ReductionRoute route = ReductionRoute::Smoothed;
  double q = 2.0;
  // 0 uses the bound above.
  std::size_t max_iterations = 0;
  // Adds the exact line-search point along each candidate direction.
  bool line_search = true;
  // Relative ||A x - b|| drift that triggers a projection back.
  double feasibility_tolerance = 1e-9;
  // Reused across calls when set; must describe the problem's A.
  std::shared_ptr<const ConstraintSet> constraints;
  LinearSolverOptions linear;
};

struct RefineResult {
  Vector x;
  SolveReport report;
  // Steps whose alpha candidate passed certify.
  std::size_t certified_steps = 0;
  bool stalled = false;
};

// Iterative refinement of a feasible x0 for min ||x||_k^k over A x = b until
// the best residual along the grid drops below accuracy f / (16 k m).
// Throws IterationLimit when the bound is exhausted first.
RefineResult refine(const ConstrainedProblem& problem, std::span<const double> x0, double k,
                    double accuracy, const SmoothedOracle& oracle, const RefineOptions& opts = {});

}  // namespace pnorm
