#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pnorm/errors.hpp"
#include "pnorm/linalg.hpp"
#include "pnorm/sparse.hpp"

namespace pnorm {

// Default upper bound on the exponent; configuration, not a derived limit.
inline constexpr double kMaxExponent = 1e12;

// min ||x||_p^p  s.t.  A x = b.   A is n x m (n constraints, m variables).
struct ConstrainedProblem {
  SparseMatrix a;
  Vector b;
  double p = 2.0;

  std::size_t variables() const noexcept { return a.cols(); }
  std::size_t constraints() const noexcept { return a.rows(); }
};

// Local model at base_point for the exponent p:
//   max g^T D - 2 sum_e r_e D_e^2 - ||D||_p^p   s.t.  A D = 0
// with g = |x|^{p-2} x and r = |x|^{p-2}.
struct ResidualProblem {
  Vector g;
  Vector r;
  double p = 2.0;
  Vector base_point;

  std::size_t size() const noexcept { return g.size(); }
};

enum class SmoothedForm {
  // min sum r D^2 + s ||D||_q^q  s.t. g^T D = target, A D = 0
  ConstrainedLargeP,
  ConstrainedSmallP,
  // min g^T D + 2 sum r D^2 + s ||D||_q^q  s.t. A D = 0
  UnconstrainedGradient,
};

struct SmoothedProblem {
  Vector r;
  double s = 0.0;
  double q = 2.0;
  Vector g;
  double target = 0.0;
  std::shared_ptr<const ConstraintSet> constraints;
  SmoothedForm form = SmoothedForm::ConstrainedLargeP;

  bool has_gradient_constraint() const noexcept {
    return form != SmoothedForm::UnconstrainedGradient;
  }
  std::size_t size() const noexcept { return r.size(); }
};

// Objective of a smoothed problem at x (form-dependent).
double smoothed_objective(const SmoothedProblem& sp, std::span<const double> x);

struct ApproxSolution {
  Vector x;
  double objective = 0.0;
  std::optional<double> kappa_certificate;
  double feasibility_residual = 0.0;
};

struct SolveReport {
  std::size_t iterations = 0;
  std::size_t oracle_calls = 0;
  std::vector<double> objective_trace;
  std::vector<double> nu_trace;
  double wall_time = 0.0;

  void append(const SolveReport& other);
};

// sum_e |x_e|^p, evaluated in the log domain per entry.
double pnorm_objective(std::span<const double> x, double p);

// Checks dimensions, the exponent range, finiteness and that b lies in the
// range of A. Returns the diagnostic on failure.
std::optional<Error> validate(const ConstrainedProblem& problem, double tolerance = 1e-9,
                              double max_exponent = kMaxExponent);
// Throws the diagnostic returned by validate.
void require_valid(const ConstrainedProblem& problem, double tolerance = 1e-9);

// ||A x - b||_2
double feasibility_residual(const SparseMatrix& a, std::span<const double> b,
                            std::span<const double> x);

}  // namespace pnorm
