#pragma once

#include <cstddef>
#include <memory>
#include <span>

#include "pnorm/model.hpp"

namespace pnorm {

enum class Regime { LargeP, SmallP, QstocLarge, QstocSmall, Box };

struct ScaleBack {
  double alpha = 1.0;
  double beta = 1.0;
  Regime regime = Regime::LargeP;
};

// min sum r D^2 + 1/2 (nu/m)^{1-q/k} ||D||_q^q  s.t. g^T D = nu/2, A D = 0.
// Optimum is at most nu whenever the k-residual optimum lies in (nu/2, nu].
SmoothedProblem build_smoothed_large_p(const ResidualProblem& rp, double nu, double q,
                                       std::shared_ptr<const ConstraintSet> constraints = {});
// Same constraints, coefficient nu^{1-q/k} / 2^{q/k}; for k < q.
SmoothedProblem build_smoothed_small_p(const ResidualProblem& rp, double nu, double q,
                                       std::shared_ptr<const ConstraintSet> constraints = {});
// min g^T D + 2 sum r D^2 + s ||D||_q^q  s.t. A D = 0, with
// s = 1/4 (nu/m)^{1-q/p} for p >= q and s = nu^{1-q/p} / 4 otherwise.
// Optimum is at most -nu/4 whenever the residual optimum lies in (nu/2, nu].
SmoothedProblem build_qstoc(const ResidualProblem& rp, double nu, double q, std::size_t m,
                            std::shared_ptr<const ConstraintSet> constraints = {});

// (k/(k-1)) |1/q - 1/k|: the power of m lost when a q-norm answer stands in
// for a k-norm residual step.
double approximation_exponent(double q, double k);

// Closed-form step scaling per regime. For Box, beta is the product of the
// achieved (alpha, beta) pair and alpha = (4 beta)^{-1/(k-1)}.
ScaleBack scale_back(Regime regime, double q, double k, std::size_t m, double beta);

// Residual approximation factor the regime guarantees when the oracle meets
// its beta promise (the kappa passed to certify).
double kappa_bound(Regime regime, double q, double k, std::size_t m, double beta);

// Raw oracle answer -> candidate residual step. Applies alpha; the qstoc
// regimes also negate and, when |g^T D| > nu, shrink by nu / (2 |g^T D|).
Vector apply_scale_back(const ScaleBack& sb, const ResidualProblem& rp,
                        std::span<const double> oracle_answer, double nu);

// Evaluates the residual objective at delta_scaled and passes when it is at
// least nu / kappa_target (the residual optimum is at most nu). Throws
// CertificationError carrying achieved / required otherwise.
ApproxSolution certify(const ResidualProblem& rp, std::span<const double> delta_scaled, double nu,
                       double kappa_target, const SparseMatrix* a = nullptr);

enum class BoxNorm { Infinity, Lp };

// max g^T D - 2 sum r D^2  s.t. ||D||_inf <= radius (or ||D||_p^p <= budget), A D = 0.
struct BoxProblem {
  Vector g;
  Vector r;
  double p = 2.0;
  double radius = 1.0;
  double budget = 1.0;
  BoxNorm norm = BoxNorm::Infinity;
  std::shared_ptr<const ConstraintSet> constraints;
};

BoxProblem lp_box_problem(const ResidualProblem& rp, double nu, BoxNorm norm = BoxNorm::Infinity,
                          std::shared_ptr<const ConstraintSet> constraints = {});

// (4 alpha beta)^{-1/(p-1)} delta.
Vector lp_box_scale_back(std::span<const double> delta, double alpha, double beta, double p);

// gamma_q(t, x) summed over coordinates: q/2 t^{q-2} x^2 inside |x| <= t,
// |x|^q + (q/2 - 1) t^q outside.
double gamma_q(std::span<const double> t, std::span<const double> x, double q);
// 2 sum r x^2 + ||x||_q^q
double h_q(std::span<const double> r, std::span<const double> x, double q);

struct GammaRescale {
  Vector t;        // before scaling and clamping
  Vector t_hat;    // clamped into [m^{-1/q}, 1]
  double gradient_target = 0.0;
  double back_scale = 1.0;
};

// Rescaled gamma-program data for the smoothed large-p problem at nu.
// Throws DegenerateQ for q = 2.
GammaRescale gamma_rescale(const ResidualProblem& rp, double nu, double q, double p);

}  // namespace pnorm
