#pragma once

#include <cstddef>
#include <span>

#include "pnorm/linalg.hpp"
#include "pnorm/model.hpp"
#include "pnorm/reduction.hpp"

namespace pnorm {

enum class OracleKind { Exact2, Newton, Box };

struct OracleConfig {
  OracleKind kind = OracleKind::Newton;
  std::size_t max_inner_iterations = 100;
  double tolerance = 1e-10;
  // Multiplicative accuracy promised on the smoothed objective.
  double beta_promise = 2.0;
  LinearSolverOptions linear;

  static OracleConfig defaults(OracleKind kind);
};

std::string_view to_string(OracleKind kind);
OracleKind parse_oracle_kind(std::string_view name);

// Solves a smoothed problem with the configured method. exact2 requires
// q = 2; newton runs damped Newton on the constraint manifold.
// Throws OracleFailure or LineSearchStalled when no beta-approximate answer
// is reached.
ApproxSolution solve_smoothed(const SmoothedProblem& sp, const OracleConfig& cfg);

// Displacement of one damped Newton step from a feasible current point.
Vector newton_step(const SmoothedProblem& sp, std::span<const double> current,
                   const OracleConfig& cfg);

struct BoxSolution {
  ApproxSolution solution;
  // Achieved objective factor (upper bound / value) and box slack.
  double alpha = 1.0;
  double beta = 1.0;
  double upper_bound = 0.0;
};

// Log-barrier interior point for max g^T D - 2 sum r D^2 over the box and A D = 0.
BoxSolution solve_box(const BoxProblem& bp, const OracleConfig& cfg);
BoxSolution solve_box(std::span<const double> g, std::span<const double> r, double radius,
                      const SparseMatrix& a, const OracleConfig& cfg);

// Dispatch point used by the refinement loop; override to inject a
// different solver.
class SmoothedOracle {
 public:
  explicit SmoothedOracle(OracleConfig cfg = {}) : cfg_(cfg) {}
  virtual ~SmoothedOracle() = default;

  virtual ApproxSolution solve(const SmoothedProblem& sp) const { return solve_smoothed(sp, cfg_); }
  virtual BoxSolution solve_box(const BoxProblem& bp) const { return pnorm::solve_box(bp, cfg_); }

  const OracleConfig& config() const noexcept { return cfg_; }

 private:
  OracleConfig cfg_;
};

}  // namespace pnorm
