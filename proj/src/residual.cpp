#include "pnorm/residual.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include <omp.h>

#include "pnorm/kernels.hpp"

namespace pnorm {
namespace {

// Sign of d/dc sum |x - c d|^k scaled by a positive factor, and the ratio
// first / second derivative.
struct LineDerivative {
  double slope = 0.0;
  double newton = 0.0;
};

LineDerivative line_derivative(std::span<const double> x, std::span<const double> d, double c,
                               double k) {
  double top = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) top = std::max(top, std::abs(x[i] - c * d[i]));
  if (top == 0.0) return {};
  double first = 0.0;
  double second = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double y = x[i] - c * d[i];
    const double a = std::abs(y) / top;
    const double sgn = y < 0.0 ? -1.0 : 1.0;
    first -= d[i] * sgn * std::pow(a, k - 1.0);
    second += d[i] * d[i] * std::pow(a, k - 2.0);
  }
  LineDerivative out;
  out.slope = first;
  out.newton = second > 0.0 ? top * first / ((k - 1.0) * second) : 0.0;
  return out;
}

double iteration_exponent(ReductionRoute route, double q, double k) {
  switch (route) {
    case ReductionRoute::Smoothed:
    case ReductionRoute::Qstoc:
      return approximation_exponent(q, k);
    case ReductionRoute::Box:
      return 1.0 / (k - 1.0);
  }
  return 0.0;
}

struct Candidate {
  Vector step;       // full move is x - scale * step / k
  double scale = 0.0;
  double value = std::numeric_limits<double>::infinity();
  double ray = 0.0;
  bool certified = false;
  std::exception_ptr error;
};

}  // namespace

ResidualProblem build_residual(std::span<const double> x, double p) {
  if (!(p >= 2.0)) throw Error(ErrorCode::BadExponent, "residual needs p >= 2");
  ResidualProblem rp;
  rp.p = p;
  rp.g.resize(x.size());
  rp.r.resize(x.size());
  kernels::residual_terms(x, p, rp.g, rp.r);
  rp.base_point.assign(x.begin(), x.end());
  return rp;
}

double residual_objective(const ResidualProblem& rp, std::span<const double> delta) {
  if (delta.size() != rp.size()) throw Error(ErrorCode::DimensionMismatch, "residual step size");
  double quad = 0.0;
  for (std::size_t i = 0; i < delta.size(); ++i) quad += rp.r[i] * delta[i] * delta[i];
  return kernels::dot(rp.g, delta) - 2.0 * quad - kernels::pow_sum(delta, rp.p);
}

double ray_residual(const ResidualProblem& rp, std::span<const double> d, double* scale) {
  const double a = kernels::dot(rp.g, d);
  if (scale != nullptr) *scale = 0.0;
  if (!(a > 0.0)) return 0.0;
  double b = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) b += rp.r[i] * d[i] * d[i];
  const double k = rp.p;
  const double log_n = kernels::log_pow_sum(d, k);
  // a - 4 c b - k c^{k-1} n is decreasing in c
  auto deriv = [&](double c) {
    return a - 4.0 * c * b - k * std::exp((k - 1.0) * std::log(c) + log_n);
  };
  double hi = std::exp((std::log(a) - std::log(k) - log_n) / (k - 1.0));
  if (b > 0.0) hi = std::min(hi, a / (4.0 * b));
  double lo = 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (deriv(mid) > 0.0 ? lo : hi) = mid;
  }
  const double c = lo;
  if (!(c > 0.0)) return 0.0;
  const double value = c * a - 2.0 * c * c * b - std::exp(k * std::log(c) + log_n);
  if (scale != nullptr) *scale = c;
  return std::max(value, 0.0);
}

std::vector<double> NuGrid::values() const {
  std::vector<double> out;
  for (int i = lo; i <= hi; ++i) out.push_back(std::ldexp(1.0, i));
  return out;
}

namespace {

// Log-domain rounding must not push an exact power of two across an integer.
double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) <= 1e-9 * std::max(1.0, std::abs(v)) ? r : v;
}

}  // namespace

NuGrid nu_grid(std::span<const double> x0, double k, std::size_t m, double accuracy) {
  const double log_f = kernels::log_pow_sum(x0, k);
  if (!std::isfinite(log_f)) throw Error(ErrorCode::EmptyGrid, "objective is zero; nothing to refine");
  const double l2 = 1.0 / std::log(2.0);
  NuGrid grid;
  grid.lo = static_cast<int>(std::floor(
      snap((std::log(accuracy) + log_f - std::log(k * static_cast<double>(m))) * l2)));
  grid.hi = static_cast<int>(std::ceil(snap(log_f * l2)));
  if (grid.lo > grid.hi) throw Error(ErrorCode::EmptyGrid, "empty nu grid");
  return grid;
}

double line_minimize(std::span<const double> x, std::span<const double> d, double k) {
  if (!(line_derivative(x, d, 0.0, k).slope < 0.0)) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 2000 && line_derivative(x, d, hi, k).slope < 0.0; ++i) {
    lo = hi;
    hi *= 2.0;
  }
  double c = 0.5 * (lo + hi);
  for (int i = 0; i < 200 && hi - lo > 1e-14 * hi; ++i) {
    const LineDerivative ld = line_derivative(x, d, c, k);
    if (ld.slope < 0.0) {
      lo = c;
    } else if (ld.slope > 0.0) {
      hi = c;
    } else {
      return c;
    }
    const double newton = c - ld.newton;
    c = (newton > lo && newton < hi) ? newton : 0.5 * (lo + hi);
  }
  return c;
}

RefineResult refine(const ConstrainedProblem& problem, std::span<const double> x0, double k,
                    double accuracy, const SmoothedOracle& oracle, const RefineOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t m = problem.variables();
  if (x0.size() != m) throw Error(ErrorCode::DimensionMismatch, "x0 has wrong length");
  if (!(k >= 2.0)) throw Error(ErrorCode::BadExponent, "refine needs k >= 2");
  if (!(accuracy > 0.0 && accuracy <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "accuracy must lie in (0, 1]");
  }
  const double b_norm = norm2(problem.b);
  if (feasibility_residual(problem.a, problem.b, x0) > 1e-6 * (1.0 + b_norm)) {
    throw Error(ErrorCode::InvalidArgument, "x0 is not feasible");
  }

  RefineResult result;
  result.x.assign(x0.begin(), x0.end());
  auto finish = [&]() {
    result.report.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
  };

  std::shared_ptr<const ConstraintSet> cs = opts.constraints;
  if (!cs) cs = std::make_shared<ConstraintSet>(problem.a, opts.linear);
  if (cs->kept_rows().size() >= m) return finish();

  double f = pnorm_objective(result.x, k);
  if (f == 0.0) return finish();
  NuGrid grid;
  try {
    grid = nu_grid(result.x, k, m, accuracy);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::EmptyGrid) return finish();
    throw;
  }

  const double q = opts.q;
  const double beta = std::max(oracle.config().beta_promise, 1.0);
  Regime regime = Regime::Box;
  if (opts.route == ReductionRoute::Smoothed) regime = k >= q ? Regime::LargeP : Regime::SmallP;
  if (opts.route == ReductionRoute::Qstoc) regime = k >= q ? Regime::QstocLarge : Regime::QstocSmall;
  const bool box = regime == Regime::Box;
  const ScaleBack sb = box ? ScaleBack{} : scale_back(regime, q, k, m, beta);
  const double kappa = box ? 0.0 : kappa_bound(regime, q, k, m, beta);

  std::size_t limit = opts.max_iterations;
  if (limit == 0) {
    const double md = static_cast<double>(m);
    const double bound = opts.c * k * std::pow(md, iteration_exponent(opts.route, q, k)) *
                         std::log(std::max(md / accuracy, 2.0));
    limit = static_cast<std::size_t>(std::ceil(std::min(bound, 1e9)));
  }

  // unit-weight projector; also keeps every candidate step inside null(A)
  const KktSolver projector(*cs, Vector(m, 1.0), opts.linear);
  const bool constrained = problem.a.rows() > 0;
  double a_scale = 0.0;
  for (const Triplet& t : problem.a.entries()) a_scale = std::max(a_scale, std::abs(t.value));
  a_scale *= std::sqrt(static_cast<double>(m));
  const int threads = kernels::threads();

  for (std::size_t iter = 0; iter < limit; ++iter) {
    const ResidualProblem rp = build_residual(result.x, k);
    // the grid is relative to the current objective
    try {
      grid = nu_grid(result.x, k, m, accuracy);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::EmptyGrid) return finish();
      throw;
    }
    const std::vector<double> nus = grid.values();
    std::vector<Candidate> cands(nus.size());

#pragma omp parallel for schedule(dynamic) num_threads(threads) if (threads > 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(nus.size()); ++i) {
      Candidate& cand = cands[static_cast<std::size_t>(i)];
      const double nu = nus[static_cast<std::size_t>(i)];
      try {
        Vector step;
        bool certified = false;
        if (box) {
          const BoxProblem bp = lp_box_problem(rp, nu, BoxNorm::Infinity, cs);
          const BoxSolution bs = oracle.solve_box(bp);
          if (std::isfinite(bs.alpha)) {
            const double beta_lp = static_cast<double>(m) * std::pow(std::max(bs.beta, 1.0), k);
            step = lp_box_scale_back(bs.solution.x, bs.alpha, beta_lp, k);
            const double kap = 16.0 * std::pow(std::pow(bs.alpha, k) * beta_lp, 1.0 / (k - 1.0));
            certified = residual_objective(rp, step) >= nu / kap;
          }
        } else {
          SmoothedProblem sp;
          if (regime == Regime::LargeP) sp = build_smoothed_large_p(rp, nu, q, cs);
          if (regime == Regime::SmallP) sp = build_smoothed_small_p(rp, nu, q, cs);
          if (regime == Regime::QstocLarge || regime == Regime::QstocSmall) {
            sp = build_qstoc(rp, nu, q, m, cs);
          }
          const ApproxSolution sol = oracle.solve(sp);
          step = apply_scale_back(sb, rp, sol.x, nu);
          certified = residual_objective(rp, step) >= nu / kappa;
        }
        if (!step.empty()) {
          if (constrained) step = projector.project(step);
          // rounding noise, not a direction
          const double size = norm_inf(step);
          if (size <= 1e-13 * norm_inf(result.x) ||
              (constrained && norm2(problem.a.multiply(step)) > 1e-8 * a_scale * norm2(step))) {
            step.clear();
          }
        }
        if (!step.empty()) {
          cand.certified = certified;
          cand.ray = ray_residual(rp, step);
          cand.scale = 1.0;
          cand.value = kernels::serial::shifted_pow_sum(result.x, step, 1.0 / k, k);
          if (opts.line_search) {
            Vector dk(step);
            for (double& v : dk) v /= k;
            const double c = line_minimize(result.x, dk, k);
            const double v = kernels::serial::shifted_pow_sum(result.x, step, c / k, k);
            if (c > 0.0 && v < cand.value) {
              cand.value = v;
              cand.scale = c;
            }
          }
          cand.step = std::move(step);
        }
      } catch (const Error& e) {
        // g in the row space of A: no feasible direction improves x
        if (e.code() != ErrorCode::InfeasibleConstraint) cand.error = std::current_exception();
      } catch (...) {
        cand.error = std::current_exception();
      }
    }

    for (const Candidate& cand : cands) {
      if (cand.error) std::rethrow_exception(cand.error);
    }
    result.report.oracle_calls += nus.size();

    std::size_t best = cands.size();
    double best_ray = 0.0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      best_ray = std::max(best_ray, cands[i].ray);
      if (cands[i].step.empty()) continue;
      if (best == cands.size() || cands[i].value < cands[best].value) best = i;
    }

    const double threshold = accuracy * f / (16.0 * k * static_cast<double>(m));
    if (best == cands.size() || !(cands[best].value < f)) {
      result.stalled = best_ray >= threshold;
      return finish();
    }

    const Candidate& win = cands[best];
    for (std::size_t e = 0; e < m; ++e) result.x[e] -= win.scale * win.step[e] / k;
    if (win.certified) ++result.certified_steps;

    if (feasibility_residual(problem.a, problem.b, result.x) >
        opts.feasibility_tolerance * (1.0 + b_norm)) {
      Vector miss = problem.a.multiply(result.x);
      for (std::size_t i = 0; i < miss.size(); ++i) miss[i] -= problem.b[i];
      const Vector fix = projector.solve(miss);
      for (std::size_t e = 0; e < m; ++e) result.x[e] -= fix[e];
    }
    f = pnorm_objective(result.x, k);
    ++result.report.iterations;
    result.report.objective_trace.push_back(f);
    result.report.nu_trace.push_back(nus[best]);

    if (best_ray < threshold) return finish();
  }
  throw Error(ErrorCode::IterationLimit,
              "refinement did not terminate within " + std::to_string(limit) + " iterations");
}

}  // namespace pnorm

