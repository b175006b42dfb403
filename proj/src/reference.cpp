#include "pnorm/reference.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include <Eigen/Dense>

namespace pnorm::reference {
namespace {

constexpr int kMaxIterations = 20000;

double sgn(double v) { return v < 0.0 ? -1.0 : 1.0; }

}  // namespace

double SeparableObjective::value(std::span<const double> x) const {
  double v = 0.0;
  for (std::size_t i = 0; i < size; ++i) {
    if (!linear.empty()) v += linear[i] * x[i];
    if (!quadratic.empty()) v += quadratic[i] * x[i] * x[i];
    for (const Power& pw : powers) v += pw.scale * std::pow(std::abs(x[i]), pw.exponent);
    if (gamma) {
      const double q = gamma->exponent;
      const double t = gamma->t[i];
      const double ax = std::abs(x[i]);
      v += gamma->scale * (ax <= t ? 0.5 * q * std::pow(t, q - 2.0) * x[i] * x[i]
                                   : std::pow(ax, q) + (0.5 * q - 1.0) * std::pow(t, q));
    }
  }
  return v;
}

void SeparableObjective::derivatives(std::span<const double> x, Vector& grad, Vector& hess) const {
  grad.assign(size, 0.0);
  hess.assign(size, 0.0);
  for (std::size_t i = 0; i < size; ++i) {
    if (!linear.empty()) grad[i] += linear[i];
    if (!quadratic.empty()) {
      grad[i] += 2.0 * quadratic[i] * x[i];
      hess[i] += 2.0 * quadratic[i];
    }
    const double ax = std::abs(x[i]);
    for (const Power& pw : powers) {
      const double q = pw.exponent;
      grad[i] += pw.scale * q * std::pow(ax, q - 1.0) * sgn(x[i]);
      hess[i] += pw.scale * q * (q - 1.0) * std::pow(ax, q - 2.0);
    }
    if (gamma) {
      const double q = gamma->exponent;
      const double t = gamma->t[i];
      if (ax <= t) {
        grad[i] += gamma->scale * q * std::pow(t, q - 2.0) * x[i];
        hess[i] += gamma->scale * q * std::pow(t, q - 2.0);
      } else {
        grad[i] += gamma->scale * q * std::pow(ax, q - 1.0) * sgn(x[i]);
        hess[i] += gamma->scale * q * (q - 1.0) * std::pow(ax, q - 2.0);
      }
    }
  }
}

SeparableObjective pnorm_objective(std::size_t m, double p) {
  SeparableObjective obj;
  obj.size = m;
  obj.powers.push_back({1.0, p});
  return obj;
}

SeparableObjective negated_residual(const ResidualProblem& rp) {
  SeparableObjective obj;
  obj.size = rp.size();
  obj.linear.resize(obj.size);
  obj.quadratic.resize(obj.size);
  for (std::size_t i = 0; i < obj.size; ++i) {
    obj.linear[i] = -rp.g[i];
    obj.quadratic[i] = 2.0 * rp.r[i];
  }
  obj.powers.push_back({1.0, rp.p});
  return obj;
}

SeparableObjective smoothed(const SmoothedProblem& sp) {
  SeparableObjective obj;
  obj.size = sp.size();
  const bool gradient_term = !sp.has_gradient_constraint();
  obj.quadratic = sp.r;
  if (gradient_term) {
    obj.linear = sp.g;
    for (double& w : obj.quadratic) w *= 2.0;
  }
  obj.powers.push_back({sp.s, sp.q});
  return obj;
}

Vector dense_reference(const SeparableObjective& objective, const SparseMatrix& a,
                       std::span<const double> b, double tolerance) {
  const std::size_t m = objective.size;
  if (a.cols() != m || b.size() != a.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "reference: dimensions disagree");
  }
  const std::size_t n = a.rows();
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (const Triplet& t : a.entries()) {
    dense(static_cast<Eigen::Index>(t.row), static_cast<Eigen::Index>(t.col)) = t.value;
  }
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) rhs(static_cast<Eigen::Index>(i)) = b[i];

  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  Eigen::MatrixXd z = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  if (n > 0) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(dense, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    const double cut = 1e-10 * std::max(1.0, sv.size() > 0 ? sv(0) : 0.0);
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > cut) ++rank;
    svd.setThreshold(cut / std::max(1.0, sv.size() > 0 ? sv(0) : 1.0));
    x0 = svd.solve(rhs);
    if ((dense * x0 - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) {
      throw Error(ErrorCode::InfeasibleRhs, "reference: A x = b has no solution");
    }
    z = svd.matrixV().rightCols(static_cast<Eigen::Index>(m) - rank);
  }
  if (z.cols() == 0) return Vector(x0.data(), x0.data() + m);

  Vector x(x0.data(), x0.data() + m), grad, hess, trial(m);
  double f = objective.value(x);
  double damping = 0.0;
  for (int it = 0; it < kMaxIterations; ++it) {
    objective.derivatives(x, grad, hess);
    const Eigen::Map<const Eigen::VectorXd> gv(grad.data(), static_cast<Eigen::Index>(m));
    const Eigen::Map<const Eigen::VectorXd> hv(hess.data(), static_cast<Eigen::Index>(m));
    const Eigen::VectorXd pg = z.transpose() * gv;
    if (pg.norm() <= tolerance) return x;
    Eigen::MatrixXd h = z.transpose() * hv.asDiagonal() * z;
    const double hscale = std::max(h.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    Eigen::VectorXd dy;
    double step_floor = 1e-300;
    for (double reg = std::max(damping, 1e-14); ; reg *= 10.0) {
      Eigen::MatrixXd hr = h;
      hr.diagonal().array() += reg * hscale;
      Eigen::LLT<Eigen::MatrixXd> llt(hr);
      if (llt.info() == Eigen::Success) {
        dy = -llt.solve(pg);
        break;
      }
      if (reg > 1e10) {
        dy = -pg;
        break;
      }
    }
    const Eigen::VectorXd dx = z * dy;
    const double slope = pg.dot(dy);
    double t = 1.0;
    bool moved = false;
    while (t > step_floor) {
      for (std::size_t i = 0; i < m; ++i) trial[i] = x[i] + t * dx(static_cast<Eigen::Index>(i));
      const double ft = objective.value(trial);
      if (std::isfinite(ft) && ft < f && ft <= f + 1e-4 * t * slope) {
        x.swap(trial);
        f = ft;
        moved = true;
        break;
      }
      t *= 0.5;
      if (t < 1e-20) break;
    }
    if (!moved) {
      // stagnation at machine precision counts as converged when the
      // remaining decrease is negligible
      if (-slope <= 1e-14 * std::abs(f) + 1e-30) return x;
      damping = damping == 0.0 ? 1e-6 : damping * 10.0;
      if (damping > 1e12) throw Error(ErrorCode::NoConvergence, "reference: line search failed");
      continue;
    }
    damping *= 0.1;
    if (damping < 1e-14) damping = 0.0;
  }
  throw Error(ErrorCode::NoConvergence, "reference: iteration cap reached");
}

Vector pnorm_regression(const ConstrainedProblem& problem, double tolerance) {
  const std::size_t m = problem.variables();
  const Vector ls = dense_reference(pnorm_objective(m, 2.0), problem.a, problem.b, 1e-13);
  double f = 0.0;
  for (double v : ls) f += std::pow(std::abs(v), problem.p);
  if (f == 0.0) return ls;
  const double c = std::pow(static_cast<double>(m) / f, 1.0 / problem.p);
  Vector b = problem.b;
  for (double& v : b) v *= c;
  Vector x = dense_reference(pnorm_objective(m, problem.p), problem.a, b, tolerance);
  for (double& v : x) v /= c;
  return x;
}

GridResult grid_reference(const SeparableObjective& objective, std::span<const double> lo,
                          std::span<const double> hi, double step) {
  const std::size_t d = objective.size;
  if (lo.size() != d || hi.size() != d) throw Error(ErrorCode::DimensionMismatch, "grid bounds");
  if (d == 0 || d > 3) throw Error(ErrorCode::InvalidArgument, "grid_reference needs dimension 1..3");
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid step must be positive");
  std::vector<std::size_t> count(d);
  for (std::size_t i = 0; i < d; ++i) {
    if (lo[i] > hi[i]) throw Error(ErrorCode::EmptyBox, "grid box is empty");
    count[i] = static_cast<std::size_t>(std::floor((hi[i] - lo[i]) / step + 1e-9)) + 1;
  }
  GridResult best;
  best.value = std::numeric_limits<double>::infinity();
  Vector x(d);
  std::vector<std::size_t> idx(d, 0);
  while (true) {
    for (std::size_t i = 0; i < d; ++i) x[i] = lo[i] + static_cast<double>(idx[i]) * step;
    const double v = objective.value(x);
    if (v < best.value) {
      best.value = v;
      best.point = x;
    }
    std::size_t i = 0;
    while (i < d && ++idx[i] == count[i]) idx[i++] = 0;
    if (i == d) break;
  }
  return best;
}

double min_congestion(const FlowInstance& inst) {
  validate_flow(inst);
  std::size_t s = inst.vertex_count, t = inst.vertex_count;
  double demand = 0.0;
  for (std::size_t v = 0; v < inst.vertex_count; ++v) {
    if (inst.demands[v] > 0.0) {
      if (s != inst.vertex_count) throw Error(ErrorCode::InvalidArgument, "min_congestion needs one source");
      s = v;
      demand = inst.demands[v];
    } else if (inst.demands[v] < 0.0) {
      if (t != inst.vertex_count) throw Error(ErrorCode::InvalidArgument, "min_congestion needs one sink");
      t = v;
    }
  }
  if (s == inst.vertex_count) return 0.0;

  // Edmonds-Karp on unit undirected capacities
  const std::size_t n = inst.vertex_count;
  std::vector<std::vector<double>> cap(n, std::vector<double>(n, 0.0));
  for (const auto& [u, v] : inst.edges) {
    cap[u][v] += 1.0;
    cap[v][u] += 1.0;
  }
  double flow = 0.0;
  while (true) {
    std::vector<std::size_t> prev(n, n);
    prev[s] = s;
    std::deque<std::size_t> queue{s};
    while (!queue.empty() && prev[t] == n) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t v = 0; v < n; ++v) {
        if (prev[v] == n && cap[u][v] > 1e-12) {
          prev[v] = u;
          queue.push_back(v);
        }
      }
    }
    if (prev[t] == n) break;
    double push = std::numeric_limits<double>::infinity();
    for (std::size_t v = t; v != s; v = prev[v]) push = std::min(push, cap[prev[v]][v]);
    for (std::size_t v = t; v != s; v = prev[v]) {
      cap[prev[v]][v] -= push;
      cap[v][prev[v]] += push;
    }
    flow += push;
  }
  return demand / flow;
}

}  // namespace pnorm::reference
