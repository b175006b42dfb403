#include "pnorm/linalg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "pnorm/errors.hpp"
#include "pnorm/kernels.hpp"

namespace pnorm {

double norm2(std::span<const double> v) { return std::sqrt(kernels::dot(v, v)); }

double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

Vector floor_weights(std::span<const double> weights, double floor) {
  double wmax = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::InvalidArgument, "quadratic weights must be finite and nonnegative");
    }
    wmax = std::max(wmax, w);
  }
  Vector out(weights.begin(), weights.end());
  if (wmax == 0.0) {
    std::fill(out.begin(), out.end(), 1.0);
    return out;
  }
  const double lo = floor * wmax;
  for (double& w : out) w = std::max(w, lo);
  return out;
}

namespace {

SparseMatrix transpose(const SparseMatrix& m) {
  auto t = m.entries();
  for (auto& e : t) std::swap(e.row, e.col);
  return SparseMatrix(m.cols(), m.rows(), std::move(t));
}

}  // namespace

ConstraintSet::ConstraintSet(SparseMatrix a, const LinearSolverOptions& opts)
    : original_(std::move(a)) {
  const std::size_t rows = original_.rows();
  const std::size_t cols = original_.cols();
  if (rows > 0 && cols <= opts.direct_limit) {
    const auto dense = original_.to_dense_row_major();
    // Columns of A^T are rows of A; pivoted QR picks an independent subset.
    Eigen::MatrixXd at(cols, rows);
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j) at(j, i) = dense[i * cols + j];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(at.rows(), at.cols());
    qr.setThreshold(opts.rank_tolerance);
    qr.compute(at);
    const auto rank = static_cast<std::size_t>(qr.rank());
    const auto& perm = qr.colsPermutation().indices();
    for (std::size_t i = 0; i < rank; ++i) kept_.push_back(static_cast<std::size_t>(perm[i]));
    std::sort(kept_.begin(), kept_.end());
  } else {
    const auto view = original_.view();
    for (std::size_t r = 0; r < rows; ++r)
      if (view.row_ptr[r + 1] > view.row_ptr[r]) kept_.push_back(r);
  }
  reduced_ = original_.select_rows(kept_);
  reduced_t_ = transpose(reduced_);
}

Vector ConstraintSet::restrict_rhs(std::span<const double> rhs) const {
  if (rhs.size() != original_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "rhs length differs from constraint rows");
  }
  Vector h(kept_.size());
  for (std::size_t i = 0; i < kept_.size(); ++i) h[i] = rhs[kept_[i]];
  return h;
}

struct KktSolver::Factor {
  // Direct path.
  Eigen::MatrixXd schur;
  std::optional<Eigen::LLT<Eigen::MatrixXd>> llt;
  std::optional<Eigen::LDLT<Eigen::MatrixXd>> ldlt;
  // Iterative path: Jacobi preconditioner.
  Vector inverse_diagonal;
  bool direct = true;
};

KktSolver::KktSolver(const ConstraintSet& constraints, std::span<const double> weights,
                     const LinearSolverOptions& opts)
    : constraints_(&constraints), opts_(opts), factor_(std::make_unique<Factor>()) {
  if (weights.size() != constraints.variables()) {
    throw Error(ErrorCode::DimensionMismatch, "weight length differs from variable count");
  }
  weights_ = floor_weights(weights, opts.weight_floor);
  inverse_weights_.resize(weights_.size());
  for (std::size_t i = 0; i < weights_.size(); ++i) inverse_weights_[i] = 1.0 / weights_[i];

  const auto& c = constraints.reduced();
  const std::size_t n = c.rows();
  if (n == 0) return;
  if (constraints.variables() <= opts.direct_limit) {
    factor_->schur.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::vector<double> s(n * n);
    kernels::weighted_gram_dense(c.view(), constraints.reduced_transpose().view(),
                                 inverse_weights_, s);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        factor_->schur(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s[i * n + j];
    factor_->llt.emplace(factor_->schur);
    if (factor_->llt->info() != Eigen::Success) {
      factor_->llt.reset();
      factor_->ldlt.emplace(factor_->schur);
      if (factor_->ldlt->info() != Eigen::Success) {
        throw Error(ErrorCode::SingularSystem, "KKT Schur complement factorization failed");
      }
    }
  } else {
    factor_->direct = false;
    factor_->inverse_diagonal.assign(n, 0.0);
    const auto v = c.view();
    for (std::size_t r = 0; r < n; ++r) {
      double d = 0.0;
      for (std::size_t k = v.row_ptr[r]; k < v.row_ptr[r + 1]; ++k)
        d += v.values[k] * v.values[k] * inverse_weights_[v.col_index[k]];
      factor_->inverse_diagonal[r] = d > 0.0 ? 1.0 / d : 1.0;
    }
  }
}

KktSolver::~KktSolver() = default;
KktSolver::KktSolver(KktSolver&&) noexcept = default;
KktSolver& KktSolver::operator=(KktSolver&&) noexcept = default;

Vector KktSolver::solve_schur(std::span<const double> h) const {
  const std::size_t n = h.size();
  Vector mu(n, 0.0);
  if (n == 0) return mu;
  if (factor_->direct) {
    Eigen::Map<const Eigen::VectorXd> rhs(h.data(), static_cast<Eigen::Index>(n));
    auto solve = [&](const Eigen::VectorXd& b) -> Eigen::VectorXd {
      return factor_->llt ? Eigen::VectorXd(factor_->llt->solve(b))
                          : Eigen::VectorXd(factor_->ldlt->solve(b));
    };
    Eigen::VectorXd x = solve(rhs);
    // One step of iterative refinement against the assembled Schur matrix.
    const Eigen::VectorXd resid = rhs - factor_->schur * x;
    x += solve(resid);
    for (std::size_t i = 0; i < n; ++i) mu[i] = x(static_cast<Eigen::Index>(i));
    return mu;
  }

  // Preconditioned conjugate gradient on S = C W^{-1} C^T, matrix-free.
  const auto c = constraints_->reduced().view();
  const auto ct = constraints_->reduced_transpose().view();
  Vector r(h.begin(), h.end()), z(n), p(n), q(n), scratch(constraints_->variables());
  const double hnorm = norm2(h);
  if (hnorm == 0.0) return mu;
  for (std::size_t i = 0; i < n; ++i) z[i] = factor_->inverse_diagonal[i] * r[i];
  p = z;
  double rz = kernels::dot(r, z);
  for (std::size_t it = 0; it < opts_.max_cg_iterations; ++it) {
    kernels::weighted_gram_apply(c, ct, inverse_weights_, p, scratch, q);
    const double pq = kernels::dot(p, q);
    if (!(pq > 0.0)) break;
    const double alpha = rz / pq;
    for (std::size_t i = 0; i < n; ++i) {
      mu[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    if (norm2(r) <= opts_.tolerance * 1e-2 * hnorm) return mu;
    for (std::size_t i = 0; i < n; ++i) z[i] = factor_->inverse_diagonal[i] * r[i];
    const double rz_next = kernels::dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  if (norm2(r) > opts_.tolerance * hnorm) {
    throw Error(ErrorCode::SingularSystem, "conjugate gradient did not converge on the KKT system");
  }
  return mu;
}

Vector KktSolver::solve(std::span<const double> rhs) const {
  const Vector h = constraints_->restrict_rhs(rhs);
  const Vector mu = solve_schur(h);
  Vector delta = constraints_->reduced().multiply_transpose(mu);
  for (std::size_t i = 0; i < delta.size(); ++i) delta[i] *= inverse_weights_[i];
  return delta;
}

Vector KktSolver::project(std::span<const double> c) const {
  if (c.size() != weights_.size()) throw Error(ErrorCode::DimensionMismatch, "project: size");
  Vector u(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) u[i] = inverse_weights_[i] * c[i];
  if (constraints_->reduced().rows() == 0) return u;
  const Vector h = constraints_->reduced().multiply(u);
  const Vector mu = solve_schur(h);
  const Vector back = constraints_->reduced().multiply_transpose(mu);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] -= inverse_weights_[i] * back[i];
  return u;
}

namespace {

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v)
    if (!std::isfinite(x)) throw Error(ErrorCode::NonFinite, what);
}

}  // namespace

Vector solve_linear(const KktSystem& system, double tolerance) {
  if (!(tolerance > 0.0)) throw Error(ErrorCode::InvalidArgument, "tolerance must be positive");
  if (system.constraints.rows() != system.rhs.size()) {
    throw Error(ErrorCode::DimensionMismatch, "constraint rows differ from rhs length");
  }
  if (system.constraints.cols() != system.diagonal.size()) {
    throw Error(ErrorCode::DimensionMismatch, "diagonal length differs from variable count");
  }
  LinearSolverOptions opts;
  opts.tolerance = std::min(opts.tolerance, tolerance);
  ConstraintSet cs(system.constraints, opts);
  KktSolver solver(cs, system.diagonal, opts);
  Vector delta = solver.solve(system.rhs);
  require_finite(delta, "KKT solution overflowed");
  Vector resid = system.constraints.multiply(delta);
  for (std::size_t i = 0; i < resid.size(); ++i) resid[i] -= system.rhs[i];
  if (norm2(resid) > tolerance * (1.0 + norm2(system.rhs))) {
    throw Error(ErrorCode::SingularSystem,
                "constraints are rank deficient and the right-hand side is inconsistent");
  }
  return delta;
}

Vector min_quadratic_on_affine(const KktSolver& solver, std::span<const double> b,
                               std::span<const double> g, double target, double tolerance) {
  const std::size_t m = solver.weights().size();
  if (g.size() != m) throw Error(ErrorCode::DimensionMismatch, "gradient length");
  Vector delta = solver.constraints().original().rows() > 0 ? solver.solve(b) : Vector(m, 0.0);
  const Vector pg = solver.project(g);
  const double gpg = kernels::dot(g, pg);
  double scale = 0.0;
  const auto w = solver.weights();
  for (std::size_t i = 0; i < m; ++i) scale += g[i] * g[i] / w[i];
  const double gap = target - kernels::dot(g, delta);
  if (!(gpg > 1e-13 * scale)) {
    if (std::abs(gap) <= tolerance * (1.0 + std::abs(target))) return delta;
    throw Error(ErrorCode::InfeasibleConstraint,
                "gradient row lies in the row space of A; target unreachable");
  }
  const double lambda = gap / gpg;
  for (std::size_t i = 0; i < m; ++i) delta[i] += lambda * pg[i];
  require_finite(delta, "quadratic minimizer overflowed");
  return delta;
}

Vector min_quadratic_on_affine(std::span<const double> weights, const SparseMatrix& a,
                               std::span<const double> b, std::span<const double> g,
                               double target, double tolerance) {
  if (a.cols() != weights.size() || a.rows() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch, "min_quadratic_on_affine: A/b/weights sizes");
  }
  LinearSolverOptions opts;
  opts.tolerance = std::min(opts.tolerance, tolerance);
  ConstraintSet cs(a, opts);
  KktSolver solver(cs, weights, opts);
  return min_quadratic_on_affine(solver, b, g, target, tolerance);
}

}  // namespace pnorm
