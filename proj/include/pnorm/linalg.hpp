#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "pnorm/sparse.hpp"

namespace pnorm {

struct LinearSolverOptions {
  double tolerance = 1e-10;
  // Direct factorization up to this many variables, PCG above.
  std::size_t direct_limit = 2000;
  std::size_t max_cg_iterations = 20000;
  // Weights below floor * max(weights) are raised to that value.
  double weight_floor = 1e-12;
  // Relative pivot threshold for dropping redundant constraint rows.
  double rank_tolerance = 1e-10;
};

// Quadratic weights d_e and stacked equality constraints C Delta = rhs.
struct KktSystem {
  Vector diagonal;
  SparseMatrix constraints;
  Vector rhs;
};

// Applies the weight floor policy. Weights must be nonnegative; an all-zero
// vector becomes all ones.
Vector floor_weights(std::span<const double> weights, double floor);

// Constraint matrix with redundant rows removed (rank-revealing QR for the
// direct path). Immutable after construction and shareable across threads.
class ConstraintSet {
 public:
  explicit ConstraintSet(SparseMatrix a, const LinearSolverOptions& opts = {});

  const SparseMatrix& original() const noexcept { return original_; }
  const SparseMatrix& reduced() const noexcept { return reduced_; }
  const SparseMatrix& reduced_transpose() const noexcept { return reduced_t_; }
  std::span<const std::size_t> kept_rows() const noexcept { return kept_; }
  std::size_t variables() const noexcept { return original_.cols(); }

  // rhs indexed by original rows -> rhs for the kept rows.
  Vector restrict_rhs(std::span<const double> rhs) const;

 private:
  SparseMatrix original_;
  SparseMatrix reduced_;
  SparseMatrix reduced_t_;
  std::vector<std::size_t> kept_;
};

// Factorization of the weighted quadratic on the constraint set:
//   solve(h)   = argmin sum_e w_e D_e^2   s.t. C D = h
//   project(c) = P c, with -P c / 2 = argmin sum_e w_e D_e^2 + c^T D  s.t. C D = 0
// Weights are floored on construction.
class KktSolver {
 public:
  KktSolver(const ConstraintSet& constraints, std::span<const double> weights,
            const LinearSolverOptions& opts = {});
  ~KktSolver();
  KktSolver(KktSolver&&) noexcept;
  KktSolver& operator=(KktSolver&&) noexcept;

  Vector solve(std::span<const double> rhs) const;
  Vector project(std::span<const double> c) const;
  std::span<const double> weights() const noexcept { return weights_; }
  const ConstraintSet& constraints() const noexcept { return *constraints_; }

 private:
  Vector solve_schur(std::span<const double> h) const;

  struct Factor;
  const ConstraintSet* constraints_;
  LinearSolverOptions opts_;
  Vector weights_;
  Vector inverse_weights_;
  std::unique_ptr<Factor> factor_;
};

// Minimizes sum_e diagonal_e D_e^2 subject to constraints D = rhs.
// Post: ||C D - rhs||_2 <= tolerance (1 + ||rhs||_2), else SingularSystem.
Vector solve_linear(const KktSystem& system, double tolerance);

// Exact minimizer of sum_e w_e D_e^2 subject to A D = b and g^T D = target.
// Throws InfeasibleConstraint when g lies in the row space of A and target
// cannot be reached.
Vector min_quadratic_on_affine(std::span<const double> weights, const SparseMatrix& a,
                               std::span<const double> b, std::span<const double> g,
                               double target, double tolerance);
// Same, reusing a prepared constraint set for A.
Vector min_quadratic_on_affine(const KktSolver& solver, std::span<const double> b,
                               std::span<const double> g, double target, double tolerance);

double norm2(std::span<const double> v);
double norm_inf(std::span<const double> v);

}  // namespace pnorm
