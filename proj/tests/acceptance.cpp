// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "pnorm/flows.hpp"
#include "pnorm/homotopy.hpp"
#include "pnorm/linalg.hpp"
#include "pnorm/oracle.hpp"
#include "pnorm/reduction.hpp"
#include "pnorm/reference.hpp"
#include "pnorm/report.hpp"
#include "pnorm/residual.hpp"

using namespace pnorm;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* name, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (!out.pass) ++failures;
  std::printf("%s %d %s: %s [%.2fs]\n", out.pass ? "PASS" : "FAIL", id, name, out.detail.c_str(),
              secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double elapsed(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

ConstrainedProblem gaussian_problem(std::size_t n, std::size_t m, double p, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  Vector dense(n * m), b(n);
  for (auto& v : dense) v = dist(rng);
  for (auto& v : b) v = dist(rng);
  return {SparseMatrix::from_dense(n, m, dense), b, p};
}

Vector least_squares(const ConstrainedProblem& pr) {
  return solve_linear({Vector(pr.a.cols(), 1.0), pr.a, pr.b}, 1e-12);
}

FlowInstance random_graph(std::size_t vertices, std::size_t extra_edges, std::mt19937_64& rng) {
  FlowInstance inst;
  inst.vertex_count = vertices;
  std::uniform_int_distribution<std::size_t> pick(0, vertices - 1);
  for (std::size_t v = 1; v < vertices; ++v) {
    std::uniform_int_distribution<std::size_t> parent(0, v - 1);
    inst.edges.push_back({parent(rng), v});
  }
  while (inst.edges.size() < vertices - 1 + extra_edges) {
    const auto u = pick(rng), v = pick(rng);
    if (u != v) inst.edges.push_back({u, v});
  }
  inst.demands.assign(vertices, 0.0);
  const auto s = pick(rng);
  auto t = pick(rng);
  while (t == s) t = pick(rng);
  inst.demands[s] = 1.0;
  inst.demands[t] = -1.0;
  return inst;
}

double route_share(double p) {
  const double a = std::pow(2.0, 1.0 / (p - 1));
  return a / (1 + a);
}

// Reference optimum of a smoothed problem, with the gradient row appended for the constrained forms.
double smoothed_optimum(const SmoothedProblem& sp, const SparseMatrix& a) {
  const auto obj = reference::smoothed(sp);
  if (sp.has_gradient_constraint()) {
    auto c = a.append_row(sp.g);
    Vector rhs(a.rows(), 0.0);
    rhs.push_back(sp.target);
    return obj.value(reference::dense_reference(obj, c, rhs, 1e-12));
  }
  return obj.value(reference::dense_reference(obj, a, Vector(a.rows(), 0.0), 1e-12));
}

}  // namespace

int main() {
  criterion(1, "least-squares equivalence", [] {
    std::mt19937_64 rng(1001);
    const auto t0 = Clock::now();
    double worst = 0;
    const auto cfg = OracleConfig::defaults(OracleKind::Exact2);
    for (int i = 0; i < 50; ++i) {
      auto pr = gaussian_problem(50, 100, 2, rng);
      const double ref = pnorm_objective(least_squares(pr), 2);
      const double got = pnorm_objective(solve_pnorm(pr, 1e-8, 2, cfg).x, 2);
      worst = std::max(worst, std::abs(got - ref) / ref);
    }
    const double secs = elapsed(t0);
    return Outcome{worst <= 1e-8 && secs < 5,
                   fmt("worst relative error %.3g over 50 instances, %.2fs", worst, secs)};
  });

  criterion(2, "two-route flow closed form", [] {
    const FlowInstance inst{3, {{0, 2}, {0, 1}, {1, 2}}, {}, {1, 0, -1}};
    const auto t0 = Clock::now();
    double worst = 0;
    for (double p : {2.0, 4.0, 8.0}) {
      auto r = solve_flow(inst, p, 1e-8, OracleConfig::defaults(OracleKind::Newton));
      worst = std::max(worst, std::abs(r.flow[0] - route_share(p)));
    }
    const double secs = elapsed(t0);
    return Outcome{worst <= 1e-6 && secs < 1, fmt("max deviation %.3g, %.2fs", worst, secs)};
  });

  criterion(3, "(1+eps) certification", [] {
    std::mt19937_64 rng(3003);
    const auto t0 = Clock::now();
    const double eps = 1e-3;
    double worst = -INFINITY;
    int count = 0;
    const auto cfg = OracleConfig::defaults(OracleKind::Exact2);
    for (double p : {3.0, 4.0, 8.0, 16.0}) {
      for (std::size_t m : {20, 60, 120, 200}) {
        auto pr = gaussian_problem(m / 2, m, p, rng);
        const double opt = pnorm_objective(reference::pnorm_regression(pr, 1e-12), p);
        const double got = pnorm_objective(solve_pnorm(pr, eps, 2, cfg).x, p);
        // slack relative to the allowed bound; <= 0 passes
        worst = std::max(worst, got - ((1 + eps) * opt + 1e-9));
        ++count;
      }
    }
    const double secs = elapsed(t0);
    return Outcome{worst <= 0 && secs < 60,
                   fmt("%g instances, max excess over bound %.3g, %.2fs", count, worst, secs)};
  });

  criterion(4, "approximate max-flow", [] {
    std::mt19937_64 rng(4004);
    const auto t0 = Clock::now();
    const double delta = 0.1;
    double worst = 0;
    const auto cfg = OracleConfig::defaults(OracleKind::Exact2);
    for (int i = 0; i < 20; ++i) {
      std::uniform_int_distribution<std::size_t> nv(3, 12), extra(0, 10);
      const auto inst = random_graph(nv(rng), extra(rng), rng);
      const double exact = reference::min_congestion(inst);
      const auto r = approx_maxflow(inst, delta, cfg);
      worst = std::max(worst, r.congestion / exact);
    }
    const double secs = elapsed(t0);
    return Outcome{worst <= 1 + delta && secs < 30,
                   fmt("worst congestion ratio %.4f over 20 graphs, %.2fs", worst, secs)};
  });

  criterion(5, "reduction optimum bounds", [] {
    std::mt19937_64 rng(5005);
    std::normal_distribution<double> n;
    std::uniform_real_distribution<double> pd(2, 8);
    std::uniform_int_distribution<int> dim(2, 4), qpick(0, 3);
    const double qs[] = {2, 3, 4, 6};
    int violations = 0, checks = 0;
    double worst = -INFINITY;  // max of (optimum - bound) / nu
    for (int t = 0; t < 200; ++t) {
      const std::size_t m = static_cast<std::size_t>(dim(rng));
      Vector x(m);
      for (auto& v : x) v = n(rng);
      const double p = pd(rng), q = qs[qpick(rng)];
      const auto rp = build_residual(x, p);
      SparseMatrix a = SparseMatrix::empty(m);
      if (m >= 3) {
        Vector row(m);
        for (auto& v : row) v = n(rng);
        a = SparseMatrix::from_dense(1, m, row);
      }
      const auto neg = reference::negated_residual(rp);
      const double opt = -neg.value(reference::dense_reference(neg, a, Vector(a.rows(), 0.0), 1e-13));
      if (!(opt > 0)) continue;
      // the grid value bracketing the optimum: nu / 2 < opt <= nu
      const double nu = std::exp2(std::ceil(std::log2(opt)));
      auto cs = std::make_shared<ConstraintSet>(a);
      const auto smooth = p >= q ? build_smoothed_large_p(rp, nu, q, cs)
                                 : build_smoothed_small_p(rp, nu, q, cs);
      const double s_opt = smoothed_optimum(smooth, a);
      const auto qstoc = build_qstoc(rp, nu, q, m, cs);
      const double q_opt = smoothed_optimum(qstoc, a);
      for (double excess : {(s_opt - nu) / nu, (q_opt + nu / 4) / nu}) {
        ++checks;
        worst = std::max(worst, excess);
        if (excess > 1e-6) ++violations;
      }
    }
    return Outcome{violations == 0 && checks >= 390,
                   fmt("%g bounds checked, %g violations, max normalized excess %.3g", checks,
                       violations, worst)};
  });

  criterion(6, "gamma sandwich", [] {
    std::mt19937_64 rng(6006);
    std::uniform_real_distribution<double> qd(2, 8), logt(-4, 2), xd(-5, 5);
    int violations = 0;
    for (int i = 0; i < 10000; ++i) {
      const double q = qd(rng);
      const Vector t{std::exp(logt(rng))}, x{xd(rng) * (i % 3 == 0 ? 1e-2 : 1.0)};
      const Vector r{std::pow(t[0], q - 2)};
      const double g = gamma_q(t, x, q), h = h_q(r, x, q);
      if (g / q > h + 1e-12 || h > 3 * g + 1e-12) ++violations;
    }
    return Outcome{violations == 0, fmt("10000 triples, %g violations", violations)};
  });

  criterion(7, "scaling constants", [] {
    const double large = scale_back(Regime::LargeP, 2, 4, 16, 1).alpha;
    const double small = scale_back(Regime::SmallP, 4, 2, 16, 1).alpha;
    const double e1 = std::abs(large - std::pow(16.0, -4.0 / 3)), e2 = std::abs(small - 1.0 / 64);
    return Outcome{e1 <= 1e-15 && e2 <= 1e-15,
                   fmt("large-p alpha %.17g, small-p alpha %.17g, max error %.2g", large, small,
                       std::max(e1, e2))};
  });

  criterion(8, "oracle-call scaling", [] {
    std::mt19937_64 rng(8008);
    const std::size_t m = 128;
    auto base = gaussian_problem(m / 2, m, 2, rng);
    const auto t0 = Clock::now();
    const double ps[] = {4, 8, 16, 32};
    std::vector<double> lx, ly;
    std::string calls;
    for (double p : ps) {
      auto pr = base;
      pr.p = p;
      const auto r = solve_pnorm(pr, 1e-3, 2, OracleConfig::defaults(OracleKind::Exact2));
      lx.push_back(std::log(p));
      ly.push_back(std::log(static_cast<double>(r.report.oracle_calls)));
      calls += std::to_string(r.report.oracle_calls) + " ";
    }
    const double mx = (lx[0] + lx[1] + lx[2] + lx[3]) / 4, my = (ly[0] + ly[1] + ly[2] + ly[3]) / 4;
    double sxy = 0, sxx = 0;
    for (int i = 0; i < 4; ++i) {
      sxy += (lx[i] - mx) * (ly[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    const double slope = sxy / sxx, secs = elapsed(t0);
    return Outcome{slope <= 1.3 && secs < 120,
                   "oracle calls " + calls + fmt("slope %.3f, %.2fs", slope, secs)};
  });

  criterion(9, "invariant suite", [] {
    std::mt19937_64 rng(9009);
    std::uniform_real_distribution<double> pd(2, 8);
    std::uniform_int_distribution<std::size_t> nd(1, 4), extra(1, 6), nv(2, 6);
    const SmoothedOracle oracle(OracleConfig::defaults(OracleKind::Exact2));
    int feas = 0, mono = 0, sandwich = 0, determinism = 0, errors = 0;
    for (int t = 0; t < 1000; ++t) {
      const std::size_t n = nd(rng), m = n + extra(rng);
      const double p = pd(rng);
      auto pr = gaussian_problem(n, m, p, rng);
      const auto x0 = least_squares(pr);
      try {
        const auto a = refine(pr, x0, p, 1e-3, oracle);
        const auto b = refine(pr, x0, p, 1e-3, oracle);
        if (feasibility_residual(pr.a, pr.b, a.x) > 1e-8 * (1 + norm2(pr.b))) ++feas;
        const auto& tr = a.report.objective_trace;
        for (std::size_t i = 1; i < tr.size(); ++i)
          if (tr[i] > tr[i - 1] * (1 + 1e-14)) {
            ++mono;
            break;
          }
        if (pnorm_objective(a.x, p) > pnorm_objective(x0, p)) ++mono;
        if (a.x != b.x || deterministic_fingerprint(a.report) != deterministic_fingerprint(b.report))
          ++determinism;
      } catch (const Error&) {
        ++errors;
      }

      const auto inst = random_graph(nv(rng), extra(rng) - 1, rng);
      try {
        const auto f = solve_flow(inst, p, 1e-3, OracleConfig::defaults(OracleKind::Exact2));
        double inf = 0;
        for (double v : f.flow) inf = std::max(inf, std::abs(v));
        const double lp = std::pow(pnorm_objective(f.flow, p), 1 / p);
        const double cap = std::pow(static_cast<double>(f.flow.size()), 1 / p) * inf;
        if (inf > lp * (1 + 1e-12) || lp > cap * (1 + 1e-12)) ++sandwich;
      } catch (const Error&) {
        ++errors;
      }
    }
    const bool ok = feas + mono + sandwich + determinism + errors == 0;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "1000 trials each: feasibility %d, descent %d, norm sandwich %d, determinism %d "
                  "failures, %d solver errors",
                  feas, mono, sandwich, determinism, errors);
    return Outcome{ok, buf};
  });

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
