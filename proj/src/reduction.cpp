#include "pnorm/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pnorm/kernels.hpp"
#include "pnorm/residual.hpp"

namespace pnorm {
namespace {

void require_positive_nu(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw Error(ErrorCode::InvalidArgument, "nu must be positive and finite");
  }
}

SmoothedProblem base_problem(const ResidualProblem& rp, double q,
                             std::shared_ptr<const ConstraintSet> constraints) {
  SmoothedProblem sp;
  sp.r = rp.r;
  sp.g = rp.g;
  sp.q = q;
  if (!constraints) constraints = std::make_shared<ConstraintSet>(SparseMatrix::empty(rp.size()));
  sp.constraints = std::move(constraints);
  return sp;
}

}  // namespace

SmoothedProblem build_smoothed_large_p(const ResidualProblem& rp, double nu, double q,
                                       std::shared_ptr<const ConstraintSet> constraints) {
  require_positive_nu(nu);
  const double k = rp.p;
  const double m = static_cast<double>(rp.size());
  auto sp = base_problem(rp, q, std::move(constraints));
  sp.s = 0.5 * std::pow(nu / m, 1.0 - q / k);
  sp.target = nu / 2.0;
  sp.form = SmoothedForm::ConstrainedLargeP;
  return sp;
}

SmoothedProblem build_smoothed_small_p(const ResidualProblem& rp, double nu, double q,
                                       std::shared_ptr<const ConstraintSet> constraints) {
  require_positive_nu(nu);
  const double k = rp.p;
  auto sp = base_problem(rp, q, std::move(constraints));
  sp.s = std::pow(nu, 1.0 - q / k) / std::pow(2.0, q / k);
  sp.target = nu / 2.0;
  sp.form = SmoothedForm::ConstrainedSmallP;
  return sp;
}

SmoothedProblem build_qstoc(const ResidualProblem& rp, double nu, double q, std::size_t m,
                            std::shared_ptr<const ConstraintSet> constraints) {
  require_positive_nu(nu);
  const double p = rp.p;
  auto sp = base_problem(rp, q, std::move(constraints));
  if (p >= q) {
    sp.s = 0.25 * std::pow(nu / static_cast<double>(m), 1.0 - q / p);
  } else {
    sp.s = std::pow(nu, 1.0 - q / p) / 4.0;
  }
  sp.target = 0.0;
  sp.form = SmoothedForm::UnconstrainedGradient;
  return sp;
}

double approximation_exponent(double q, double k) {
  return (k / (k - 1.0)) * std::abs(1.0 / q - 1.0 / k);
}

ScaleBack scale_back(Regime regime, double q, double k, std::size_t m, double beta) {
  if (!(std::min(q, k) >= 2.0)) throw Error(ErrorCode::BadExponent, "scale_back needs q, k >= 2");
  if (!(beta >= 1.0)) throw Error(ErrorCode::InvalidArgument, "scale_back needs beta >= 1");
  const double md = static_cast<double>(m);
  ScaleBack sb;
  sb.beta = beta;
  sb.regime = regime;
  switch (regime) {
    case Regime::LargeP:
      sb.alpha = std::pow(md, -(k / (k - 1.0)) * (1.0 / q - 1.0 / k)) / (16.0 * beta);
      break;
    case Regime::SmallP:
      sb.alpha = std::pow(md, -(k / (k - 1.0)) * (1.0 / k - 1.0 / q)) / (16.0 * beta);
      break;
    case Regime::QstocLarge:
    case Regime::QstocSmall:
      sb.alpha = std::pow(md, -approximation_exponent(q, k)) / 256.0;
      break;
    case Regime::Box:
      sb.alpha = std::pow(4.0 * beta, -1.0 / (k - 1.0));
      break;
  }
  return sb;
}

double kappa_bound(Regime regime, double q, double k, std::size_t m, double beta) {
  const ScaleBack sb = scale_back(regime, q, k, m, beta);
  switch (regime) {
    case Regime::LargeP:
    case Regime::SmallP:
      // residual >= alpha nu / 4
      return 4.0 / sb.alpha;
    case Regime::QstocLarge:
    case Regime::QstocSmall:
      // residual >= alpha nu / 64
      return 64.0 / sb.alpha;
    case Regime::Box:
      // 16 (alpha^p beta^p m)^{1/(p-1)} with beta already combined
      return 16.0 * std::pow(beta, 1.0 / (k - 1.0));
  }
  return 0.0;
}

Vector apply_scale_back(const ScaleBack& sb, const ResidualProblem& rp,
                        std::span<const double> oracle_answer, double nu) {
  Vector out(oracle_answer.begin(), oracle_answer.end());
  double factor = sb.alpha;
  if (sb.regime == Regime::QstocLarge || sb.regime == Regime::QstocSmall) {
    const double slope = std::abs(kernels::dot(rp.g, oracle_answer));
    const double z = slope > nu ? nu / (2.0 * slope) : 1.0;
    factor = -sb.alpha * z;
  }
  for (double& v : out) v *= factor;
  return out;
}

ApproxSolution certify(const ResidualProblem& rp, std::span<const double> delta_scaled, double nu,
                       double kappa_target, const SparseMatrix* a) {
  require_positive_nu(nu);
  if (!(kappa_target >= 1.0)) throw Error(ErrorCode::InvalidArgument, "kappa_target must be >= 1");
  const double value = residual_objective(rp, delta_scaled);
  const double required = nu / kappa_target;
  if (!(value >= required)) {
    throw CertificationError("residual value " + std::to_string(value) + " below required " +
                                 std::to_string(required),
                             value / required);
  }
  ApproxSolution sol;
  sol.x.assign(delta_scaled.begin(), delta_scaled.end());
  sol.objective = value;
  sol.kappa_certificate = nu / value;
  if (a != nullptr) sol.feasibility_residual = norm2(a->multiply(delta_scaled));
  return sol;
}

BoxProblem lp_box_problem(const ResidualProblem& rp, double nu, BoxNorm norm,
                          std::shared_ptr<const ConstraintSet> constraints) {
  require_positive_nu(nu);
  BoxProblem bp;
  bp.g = rp.g;
  bp.r = rp.r;
  bp.p = rp.p;
  bp.radius = std::pow(nu, 1.0 / rp.p);
  bp.budget = nu;
  bp.norm = norm;
  if (!constraints) constraints = std::make_shared<ConstraintSet>(SparseMatrix::empty(rp.size()));
  bp.constraints = std::move(constraints);
  return bp;
}

Vector lp_box_scale_back(std::span<const double> delta, double alpha, double beta, double p) {
  const double factor = std::pow(4.0 * alpha * beta, -1.0 / (p - 1.0));
  Vector out(delta.begin(), delta.end());
  for (double& v : out) v *= factor;
  return out;
}

double gamma_q(std::span<const double> t, std::span<const double> x, double q) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double ax = std::abs(x[i]);
    if (ax <= t[i]) {
      sum += 0.5 * q * std::pow(t[i], q - 2.0) * x[i] * x[i];
    } else {
      sum += std::pow(ax, q) + (0.5 * q - 1.0) * std::pow(t[i], q);
    }
  }
  return sum;
}

double h_q(std::span<const double> r, std::span<const double> x, double q) {
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += 2.0 * r[i] * x[i] * x[i] + std::pow(std::abs(x[i]), q);
  return sum;
}

GammaRescale gamma_rescale(const ResidualProblem& rp, double nu, double q, double p) {
  require_positive_nu(nu);
  if (std::abs(q - 2.0) < 1e-12) {
    throw Error(ErrorCode::DegenerateQ, "gamma rescaling is undefined at q = 2");
  }
  if (!(p >= q && q >= 2.0)) throw Error(ErrorCode::BadExponent, "gamma_rescale needs p >= q >= 2");
  const double m = static_cast<double>(rp.size());
  const double d = 1.0 / q - 1.0 / p;
  const double coef = std::pow(std::pow(nu, -2.0 * d) * std::pow(m, 2.0 * d), 1.0 / (q - 2.0));
  const double shrink = std::pow(2.0 * q * nu, -1.0 / q);
  const double lo = std::pow(m, -1.0 / q);

  GammaRescale out;
  out.t.resize(rp.size());
  out.t_hat.resize(rp.size());
  for (std::size_t i = 0; i < rp.size(); ++i) {
    out.t[i] = coef * std::abs(rp.base_point[i]);
    out.t_hat[i] = std::clamp(shrink * out.t[i], lo, 1.0);
  }
  out.gradient_target = std::pow(2.0, 0.5 - 1.0 / q) * std::pow(q, -0.5 - 1.0 / q) *
                        std::pow(m, -d) * std::pow(nu, 1.0 - 1.0 / p);
  out.back_scale = std::sqrt(q / 2.0) * std::pow(2.0 * q * nu, 1.0 / q);
  return out;
}

}  // namespace pnorm
