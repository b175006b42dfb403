#include "pnorm/homotopy.hpp"

#include <chrono>
#include <cmath>
#include <memory>

#include "pnorm/kernels.hpp"

namespace pnorm {
namespace {

ReductionRoute route_for(const OracleConfig& cfg, const RefineOptions& opts) {
  if (cfg.kind == OracleKind::Box) return ReductionRoute::Box;
  return opts.route == ReductionRoute::Box ? ReductionRoute::Smoothed : opts.route;
}

void scale_trace(SolveReport& report, double factor_k) {
  for (double& v : report.objective_trace) v /= factor_k;
  for (double& v : report.nu_trace) v /= factor_k;
}

// One refinement stage run on the prescaled problem, mapped back.
Vector stage(const ConstrainedProblem& problem, std::span<const double> x, double k, double acc,
             const SmoothedOracle& oracle, RefineOptions opts, SolveReport& report) {
  const Prescaled ps = prescale(problem, x, k);
  ConstrainedProblem scaled = ps.problem;
  scaled.p = k;
  RefineResult rr = refine(scaled, ps.x0, k, acc, oracle, opts);
  scale_trace(rr.report, std::pow(ps.factor, k));
  report.append(rr.report);
  for (double& v : rr.x) v /= ps.factor;
  return rr.x;
}

}  // namespace

std::vector<double> homotopy_schedule(double p, double q) {
  std::vector<double> ks;
  if (p < q) return ks;
  for (double k = 2.0 * q; k <= p; k *= 2.0) ks.push_back(k);
  return ks;
}

Prescaled prescale(const ConstrainedProblem& problem, std::span<const double> x0, double k) {
  const double log_f = kernels::log_pow_sum(x0, k);
  if (!std::isfinite(log_f)) throw Error(ErrorCode::ZeroInitial, "initial point is zero");
  const double m = static_cast<double>(problem.variables());
  Prescaled out;
  out.factor = std::exp((std::log(m) - log_f) / k);
  out.problem = problem;
  for (double& v : out.problem.b) v *= out.factor;
  out.x0.assign(x0.begin(), x0.end());
  for (double& v : out.x0) v *= out.factor;
  return out;
}

Vector initial_q_solution(const ConstrainedProblem& problem, double q, const OracleConfig& cfg,
                          const RefineOptions& opts) {
  auto cs = opts.constraints ? opts.constraints
                             : std::make_shared<ConstraintSet>(problem.a, opts.linear);
  KktSolver solver(*cs, Vector(problem.variables(), 1.0), opts.linear);
  Vector x = solver.solve(problem.b);
  if (q <= 2.0 + 1e-12 || norm_inf(x) == 0.0) return x;

  RefineOptions ro = opts;
  ro.constraints = cs;
  ro.route = route_for(cfg, opts);
  const SmoothedOracle oracle(cfg);
  SolveReport ignored;
  for (int round = 0; round < 4; ++round) {
    x = stage(problem, x, q, 0.5, oracle, ro, ignored);
    ConstrainedProblem at_q = problem;
    at_q.p = q;
    const DualCertificate dc = dual_certificate(at_q, x, opts.linear);
    if (dc.objective <= 2.0 * dc.lower_bound) break;
  }
  return x;
}

SolveResult solve_pnorm(const ConstrainedProblem& problem, double eps, double q,
                        const OracleConfig& cfg, const RefineOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  require_valid(problem);
  if (!(eps > 0.0 && eps <= 1.0)) throw Error(ErrorCode::InvalidArgument, "eps must lie in (0, 1]");
  if (problem.p < 2.0) throw Error(ErrorCode::BadExponent, "solver needs p >= 2");
  if (cfg.kind == OracleKind::Exact2) q = 2.0;
  if (!(q >= 2.0)) throw Error(ErrorCode::BadExponent, "q must be at least 2");

  RefineOptions ro = opts;
  ro.q = q;
  ro.route = route_for(cfg, opts);
  if (!ro.constraints) ro.constraints = std::make_shared<ConstraintSet>(problem.a, opts.linear);
  const SmoothedOracle oracle(cfg);

  SolveResult result;
  Vector x = initial_q_solution(problem, q, cfg, ro);
  if (norm_inf(x) == 0.0) {
    result.x = std::move(x);
    result.report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
  }
  const double p = problem.p;
  for (double k : homotopy_schedule(p, q)) {
    if (k == p) break;
    x = stage(problem, x, k, 0.5, oracle, ro, result.report);
  }
  x = stage(problem, x, p, eps, oracle, ro, result.report);
  result.x = std::move(x);
  result.report.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

DualCertificate dual_certificate(const ConstrainedProblem& problem, std::span<const double> x,
                                 const LinearSolverOptions& lin) {
  const double p = problem.p;
  const std::size_t m = problem.variables();
  DualCertificate dc;
  dc.objective = pnorm_objective(x, p);
  if (dc.objective == 0.0) return dc;

  // gradient p |x|^{p-2} x, normalized to avoid overflow
  const double top = norm_inf(x);
  Vector z(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double a = std::abs(x[i]) / top;
    z[i] = (x[i] < 0.0 ? -1.0 : 1.0) * std::pow(a, p - 1.0);
  }
  const ConstraintSet cs(problem.a, lin);
  const KktSolver solver(cs, Vector(m, 1.0), lin);
  // A^T y = z - P z, the row-space part of z
  const Vector pz = solver.project(z);
  Vector v(m);
  for (std::size_t i = 0; i < m; ++i) v[i] = z[i] - pz[i];
  // b^T y = x^T A^T y for feasible x
  const double a = kernels::dot(x, v);
  if (!(a > 0.0)) return dc;
  const double pc = p / (p - 1.0);
  // D(t) = t a - t^{p'} B, B = (p-1) sum (|v|/p)^{p'}
  const double log_b = std::log(p - 1.0) + kernels::log_pow_sum(v, pc) - pc * std::log(p);
  const double log_t = (p - 1.0) * (std::log(a) - std::log(pc) - log_b);
  dc.lower_bound = std::exp(log_t + std::log(a) - std::log(p));
  dc.relative_gap = (dc.objective - dc.lower_bound) / dc.objective;
  return dc;
}

}  // namespace pnorm
