#include "pnorm/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>

#include "pnorm/kernels.hpp"

namespace pnorm {
namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMaxHalvings = 60;
constexpr double kLooseDecrement = 1e-6;
// Barrier curvature spans many decades near the boundary.
constexpr double kNewtonWeightFloor = 1e-30;

double loose_decrement(const OracleConfig& cfg) {
  return std::max(kLooseDecrement, 1e-3 * (cfg.beta_promise - 1.0));
}

struct Objective {
  std::function<double(std::span<const double>)> value;
  // gradient and Hessian diagonal
  std::function<void(std::span<const double>, Vector&, Vector&)> derivatives;
  // largest step keeping the iterate in the domain; null means unbounded
  std::function<double(std::span<const double>, std::span<const double>)> max_step;
};

struct NewtonState {
  Vector x;
  double value = 0.0;
  std::size_t iterations = 0;
  double decrement = 0.0;
  bool converged = false;
};

// Newton direction on {C d = 0, extra^T d = 0} for the quadratic model with
// diagonal Hessian.
Vector newton_direction(const ConstraintSet& cs, const Vector& grad, const Vector& hess,
                        const Vector* extra, const LinearSolverOptions& lin) {
  Vector half(hess.size());
  for (std::size_t i = 0; i < hess.size(); ++i) half[i] = std::max(hess[i], 0.0) / 2.0;
  LinearSolverOptions opts = lin;
  opts.weight_floor = std::min(opts.weight_floor, kNewtonWeightFloor);
  KktSolver solver(cs, half, opts);
  Vector d = solver.project(grad);
  if (extra != nullptr) {
    const Vector pg = solver.project(*extra);
    const double gpg = kernels::dot(*extra, pg);
    if (gpg > 0.0) {
      const double coef = kernels::dot(*extra, d) / gpg;
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= coef * pg[i];
    }
  }
  for (double& v : d) v *= -0.5;
  return d;
}

// Returns false when the step made no progress.
bool damped_step(const Objective& fn, const ConstraintSet& cs, const Vector* extra,
                 const LinearSolverOptions& lin, NewtonState& st, double tolerance,
                 bool absolute, double loose) {
  Vector grad, hess;
  fn.derivatives(st.x, grad, hess);
  const Vector d = newton_direction(cs, grad, hess, extra, lin);
  const double slope = kernels::dot(grad, d);
  st.decrement = std::max(-slope, 0.0);
  const double scale = absolute ? 1.0 : std::max(std::abs(st.value), 1e-300);
  // rounding floor of the objective itself
  const double floor = 1e-14 * std::abs(st.value);
  if (st.decrement / 2.0 <= std::max(tolerance * scale, floor)) {
    st.converged = true;
    return false;
  }
  double t = 1.0;
  if (fn.max_step) t = std::min(1.0, 0.99 * fn.max_step(st.x, d));
  Vector trial(st.x.size());
  for (int h = 0; h <= kMaxHalvings; ++h) {
    for (std::size_t i = 0; i < trial.size(); ++i) trial[i] = st.x[i] + t * d[i];
    const double v = fn.value(trial);
    if (std::isfinite(v) && v <= st.value + kArmijo * t * slope) {
      st.x.swap(trial);
      st.value = v;
      ++st.iterations;
      return true;
    }
    t *= 0.5;
  }
  if (st.decrement / 2.0 <= std::max(loose * scale, 1e3 * floor)) {
    st.converged = true;
    return false;
  }
  throw Error(ErrorCode::LineSearchStalled,
              "no sufficient decrease after " + std::to_string(kMaxHalvings) + " halvings");
}

NewtonState minimize(const Objective& fn, Vector x0, const ConstraintSet& cs, const Vector* extra,
                     const OracleConfig& cfg, double tolerance, bool absolute) {
  NewtonState st;
  st.x = std::move(x0);
  st.value = fn.value(st.x);
  if (!std::isfinite(st.value)) throw Error(ErrorCode::OracleFailure, "start point outside domain");
  for (std::size_t it = 0; it < cfg.max_inner_iterations; ++it) {
    if (!damped_step(fn, cs, extra, cfg.linear, st, tolerance, absolute, loose_decrement(cfg))) {
      return st;
    }
  }
  const double scale = absolute ? 1.0 : std::max(std::abs(st.value), 1e-300);
  if (st.decrement / 2.0 <= std::max(loose_decrement(cfg) * scale, 1e-11 * std::abs(st.value))) {
    st.converged = true;
    return st;
  }
  throw Error(ErrorCode::OracleFailure,
              "newton did not converge in " + std::to_string(cfg.max_inner_iterations) +
                  " iterations");
}

Objective smoothed_function(const SmoothedProblem& sp) {
  const bool gradient_term = !sp.has_gradient_constraint();
  const double quad = gradient_term ? 2.0 : 1.0;
  Objective fn;
  fn.value = [&sp](std::span<const double> x) { return smoothed_objective(sp, x); };
  fn.derivatives = [&sp, gradient_term, quad](std::span<const double> x, Vector& grad, Vector& hess) {
    const std::size_t m = x.size();
    grad.assign(m, 0.0);
    hess.assign(m, 0.0);
    const double q = sp.q;
    for (std::size_t i = 0; i < m; ++i) {
      const double ax = std::abs(x[i]);
      const double pw = std::pow(ax, q - 2.0);
      grad[i] = 2.0 * quad * sp.r[i] * x[i] + sp.s * q * pw * x[i];
      if (gradient_term) grad[i] += sp.g[i];
      hess[i] = 2.0 * quad * sp.r[i] + sp.s * q * (q - 1.0) * pw;
    }
  };
  return fn;
}

// min_{c >= 0} a c + b c^2 + s c^q n with a < 0; convex in c.
double best_ray_scale(double a, double b, double sn, double q) {
  if (!(a < 0.0)) return 0.0;
  auto deriv = [&](double c) { return a + 2.0 * b * c + q * sn * std::pow(c, q - 1.0); };
  double hi = 1.0;
  for (int i = 0; i < 400 && deriv(hi) < 0.0; ++i) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (deriv(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Vector smoothed_start(const SmoothedProblem& sp, const OracleConfig& cfg) {
  const std::size_t m = sp.size();
  const ConstraintSet& cs = *sp.constraints;
  const Vector zeros(cs.original().rows(), 0.0);
  Vector best(m, 0.0);
  double best_value = std::numeric_limits<double>::infinity();
  bool have = false;
  const Vector ones(m, 1.0);
  for (const Vector* base : {&sp.r, &ones}) {
    Vector w(m);
    const double quad = sp.has_gradient_constraint() ? 1.0 : 2.0;
    for (std::size_t i = 0; i < m; ++i) w[i] = quad * (*base)[i];
    KktSolver solver(cs, w, cfg.linear);
    Vector cand;
    if (sp.has_gradient_constraint()) {
      cand = min_quadratic_on_affine(solver, zeros, sp.g, sp.target, cfg.linear.tolerance);
    } else {
      cand = solver.project(sp.g);
      for (double& v : cand) v *= -0.5;
      double b = 0.0;
      for (std::size_t i = 0; i < m; ++i) b += 2.0 * sp.r[i] * cand[i] * cand[i];
      const double c = best_ray_scale(kernels::dot(sp.g, cand), b,
                                      sp.s * kernels::pow_sum(cand, sp.q), sp.q);
      for (double& v : cand) v *= c;
    }
    const double v = smoothed_objective(sp, cand);
    if (std::isfinite(v) && (!have || v < best_value)) {
      best = std::move(cand);
      best_value = v;
      have = true;
    }
  }
  return best;
}

// g and its null(A) component agree on every feasible step.
Vector nullspace_part(const ConstraintSet& cs, std::span<const double> g,
                      const LinearSolverOptions& lin) {
  if (cs.reduced().rows() == 0) return Vector(g.begin(), g.end());
  const KktSolver unit(cs, Vector(g.size(), 1.0), lin);
  return unit.project(g);
}

SmoothedProblem reduced_gradient(const SmoothedProblem& sp, const LinearSolverOptions& lin) {
  SmoothedProblem out = sp;
  out.g = nullspace_part(*sp.constraints, sp.g, lin);
  return out;
}

ApproxSolution package(const SmoothedProblem& sp, Vector x) {
  ApproxSolution sol;
  sol.objective = smoothed_objective(sp, x);
  double feas = norm2(sp.constraints->original().multiply(x));
  if (sp.has_gradient_constraint()) feas += std::abs(kernels::dot(sp.g, x) - sp.target);
  sol.feasibility_residual = feas;
  sol.x = std::move(x);
  return sol;
}

ApproxSolution solve_exact2(const SmoothedProblem& sp, const OracleConfig& cfg) {
  if (std::abs(sp.q - 2.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "exact2 oracle requires q = 2");
  }
  const std::size_t m = sp.size();
  Vector w(m);
  const ConstraintSet& cs = *sp.constraints;
  if (sp.has_gradient_constraint()) {
    for (std::size_t i = 0; i < m; ++i) w[i] = sp.r[i] + sp.s;
    KktSolver solver(cs, w, cfg.linear);
    const Vector zeros(cs.original().rows(), 0.0);
    return package(sp, min_quadratic_on_affine(solver, zeros, sp.g, sp.target, cfg.linear.tolerance));
  }
  for (std::size_t i = 0; i < m; ++i) w[i] = 2.0 * sp.r[i] + sp.s;
  KktSolver solver(cs, w, cfg.linear);
  Vector x = solver.project(sp.g);
  for (double& v : x) v *= -0.5;
  return package(sp, std::move(x));
}

void check_smoothed(const SmoothedProblem& sp) {
  if (!sp.constraints) throw Error(ErrorCode::InvalidArgument, "smoothed problem has no constraint set");
  if (sp.r.size() != sp.g.size() || sp.constraints->variables() != sp.size()) {
    throw Error(ErrorCode::DimensionMismatch, "smoothed problem dimensions disagree");
  }
  if (!(sp.q >= 2.0)) throw Error(ErrorCode::BadExponent, "smoothed problem needs q >= 2");
}

}  // namespace

OracleConfig OracleConfig::defaults(OracleKind kind) {
  OracleConfig cfg;
  cfg.kind = kind;
  cfg.beta_promise = kind == OracleKind::Exact2 ? 1.0 + 1e-9 : 2.0;
  if (kind == OracleKind::Box) {
    cfg.tolerance = 1e-3;
    cfg.max_inner_iterations = 200;
  }
  return cfg;
}

std::string_view to_string(OracleKind kind) {
  switch (kind) {
    case OracleKind::Exact2: return "exact2";
    case OracleKind::Newton: return "newton";
    case OracleKind::Box: return "box";
  }
  return "unknown";
}

OracleKind parse_oracle_kind(std::string_view name) {
  if (name == "exact2") return OracleKind::Exact2;
  if (name == "newton") return OracleKind::Newton;
  if (name == "box") return OracleKind::Box;
  throw Error(ErrorCode::InvalidArgument, "unknown oracle '" + std::string(name) + "'");
}

ApproxSolution solve_smoothed(const SmoothedProblem& sp, const OracleConfig& cfg) {
  check_smoothed(sp);
  if (cfg.kind == OracleKind::Exact2) return solve_exact2(sp, cfg);
  if (cfg.kind == OracleKind::Box) {
    throw Error(ErrorCode::InvalidArgument, "box oracle does not solve smoothed problems");
  }
  const SmoothedProblem work = reduced_gradient(sp, cfg.linear);
  Vector start = smoothed_start(work, cfg);
  const Objective fn = smoothed_function(work);
  const Vector* extra = work.has_gradient_constraint() ? &work.g : nullptr;
  NewtonState st = minimize(fn, std::move(start), *work.constraints, extra, cfg, cfg.tolerance, false);
  return package(sp, std::move(st.x));
}

Vector newton_step(const SmoothedProblem& sp, std::span<const double> current,
                   const OracleConfig& cfg) {
  check_smoothed(sp);
  if (current.size() != sp.size()) throw Error(ErrorCode::DimensionMismatch, "current point size");
  const SmoothedProblem work = reduced_gradient(sp, cfg.linear);
  const Objective fn = smoothed_function(work);
  const Vector* extra = work.has_gradient_constraint() ? &work.g : nullptr;
  NewtonState st;
  st.x.assign(current.begin(), current.end());
  st.value = fn.value(st.x);
  damped_step(fn, *work.constraints, extra, cfg.linear, st, cfg.tolerance, false,
              loose_decrement(cfg));
  for (std::size_t i = 0; i < st.x.size(); ++i) st.x[i] -= current[i];
  return st.x;
}

BoxSolution solve_box(const BoxProblem& bp, const OracleConfig& cfg) {
  const std::size_t m = bp.g.size();
  if (!bp.constraints || bp.constraints->variables() != m || bp.r.size() != m) {
    throw Error(ErrorCode::DimensionMismatch, "box problem dimensions disagree");
  }
  const bool inf_norm = bp.norm == BoxNorm::Infinity;
  const double bound = inf_norm ? bp.radius : bp.budget;
  if (!(bound > 0.0)) throw Error(ErrorCode::InvalidArgument, "box radius must be positive");

  const Vector g = nullspace_part(*bp.constraints, bp.g, cfg.linear);
  {
    // box-free maximizer 1/2 P_{2r} g; exact when it fits in the box
    Vector w(m);
    for (std::size_t i = 0; i < m; ++i) w[i] = 2.0 * bp.r[i];
    const KktSolver solver(*bp.constraints, w, cfg.linear);
    Vector free = solver.project(g);
    for (double& v : free) v *= 0.5;
    const bool inside = inf_norm ? norm_inf(free) < bp.radius
                                 : kernels::pow_sum(free, bp.p) < bp.budget;
    double value = 0.0;
    for (std::size_t i = 0; i < m; ++i) value += g[i] * free[i] - 2.0 * bp.r[i] * free[i] * free[i];
    if (inside && value > 0.0) {
      BoxSolution out;
      out.upper_bound = value;
      out.alpha = 1.0;
      out.beta = inf_norm ? std::max(norm_inf(free) / bp.radius, 1e-300)
                          : std::max(kernels::pow_sum(free, bp.p) / bp.budget, 1e-300);
      out.solution.objective = value;
      out.solution.feasibility_residual = norm2(bp.constraints->original().multiply(free));
      out.solution.x = std::move(free);
      return out;
    }
  }
  const double radius2 = bp.radius * bp.radius;
  const double p = bp.p;
  double t = 0.0;
  auto phi = [&](std::span<const double> x) {
    double v = 0.0;
    for (std::size_t i = 0; i < m; ++i) v += g[i] * x[i] - 2.0 * bp.r[i] * x[i] * x[i];
    return v;
  };

  Objective fn;
  if (inf_norm) {
    fn.value = [&](std::span<const double> x) {
      double barrier = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double slack = radius2 - x[i] * x[i];
        if (!(slack > 0.0)) return std::numeric_limits<double>::infinity();
        barrier -= std::log(slack);
      }
      return -t * phi(x) + barrier;
    };
    fn.derivatives = [&](std::span<const double> x, Vector& grad, Vector& hess) {
      grad.assign(m, 0.0);
      hess.assign(m, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        const double slack = radius2 - x[i] * x[i];
        grad[i] = t * (-g[i] + 4.0 * bp.r[i] * x[i]) + 2.0 * x[i] / slack;
        hess[i] = 4.0 * t * bp.r[i] + 2.0 * (radius2 + x[i] * x[i]) / (slack * slack);
      }
    };
    fn.max_step = [&](std::span<const double> x, std::span<const double> d) {
      double step = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        if (d[i] > 0.0) step = std::min(step, (bp.radius - x[i]) / d[i]);
        if (d[i] < 0.0) step = std::min(step, (bp.radius + x[i]) / -d[i]);
      }
      return step;
    };
  } else {
    fn.value = [&](std::span<const double> x) {
      const double slack = bp.budget - kernels::pow_sum(x, p);
      if (!(slack > 0.0)) return std::numeric_limits<double>::infinity();
      return -t * phi(x) - std::log(slack);
    };
    fn.derivatives = [&](std::span<const double> x, Vector& grad, Vector& hess) {
      grad.assign(m, 0.0);
      hess.assign(m, 0.0);
      const double slack = bp.budget - kernels::pow_sum(x, p);
      for (std::size_t i = 0; i < m; ++i) {
        const double ax = std::abs(x[i]);
        const double d1 = p * std::pow(ax, p - 1.0) * (x[i] < 0.0 ? -1.0 : 1.0);
        grad[i] = t * (-g[i] + 4.0 * bp.r[i] * x[i]) + d1 / slack;
        hess[i] = 4.0 * t * bp.r[i] + p * (p - 1.0) * std::pow(ax, p - 2.0) / slack +
                  d1 * d1 / (slack * slack);
      }
    };
  }

  const double inequalities = inf_norm ? 2.0 * static_cast<double>(m) : 1.0;
  double g1 = 0.0;
  for (double v : g) g1 += std::abs(v);
  const double scale_r = inf_norm ? bp.radius : std::pow(bp.budget, 1.0 / p);
  const double trivial = std::max(g1 * scale_r, 1e-300);
  t = inequalities / trivial;

  Vector x(m, 0.0);
  double gap = inequalities / t;
  for (int outer = 0; outer < 60; ++outer) {
    NewtonState st;
    try {
      st = minimize(fn, x, *bp.constraints, nullptr, cfg, 1e-6, true);
    } catch (const Error& e) {
      // keep the last centered point and its gap
      if (outer == 0 || e.code() != ErrorCode::OracleFailure) throw;
      break;
    }
    x = std::move(st.x);
    gap = inequalities / t;
    const double value = phi(x);
    if (gap <= cfg.tolerance * std::max(value, 0.0)) break;
    if (gap <= 1e-300) break;
    t *= 10.0;
  }

  BoxSolution out;
  const double value = phi(x);
  out.upper_bound = value + gap;
  out.alpha = value > 0.0 ? out.upper_bound / value : std::numeric_limits<double>::infinity();
  if (inf_norm) {
    out.beta = std::max(norm_inf(x) / bp.radius, 1e-300);
  } else {
    out.beta = std::max(kernels::pow_sum(x, p) / bp.budget, 1e-300);
  }
  out.solution.objective = value;
  out.solution.feasibility_residual = norm2(bp.constraints->original().multiply(x));
  out.solution.x = std::move(x);
  return out;
}

BoxSolution solve_box(std::span<const double> g, std::span<const double> r, double radius,
                      const SparseMatrix& a, const OracleConfig& cfg) {
  BoxProblem bp;
  bp.g.assign(g.begin(), g.end());
  bp.r.assign(r.begin(), r.end());
  bp.radius = radius;
  bp.norm = BoxNorm::Infinity;
  bp.constraints = std::make_shared<ConstraintSet>(a, cfg.linear);
  return solve_box(bp, cfg);
}

}  // namespace pnorm
