// pnorm: command-line front end for p-norm regression, p-norm flows,
// approximate max-flow and call-count benchmarks.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pnorm/flows.hpp"
#include "pnorm/homotopy.hpp"
#include "pnorm/kernels.hpp"
#include "pnorm/reference.hpp"
#include "pnorm/report.hpp"

namespace {

using namespace pnorm;

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitUncertified = 2;

struct Common {
  double eps = 1e-6;
  std::optional<double> q;
  std::string oracle = "newton";
  std::string reduction = "smoothed";
  std::string report;
  std::string out;
  int threads = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--eps", c.eps, "relative accuracy")->check(CLI::PositiveNumber);
  cmd->add_option("--q", c.q, "oracle exponent (default max(2, ceil(sqrt(log2 m))))");
  cmd->add_option("--oracle", c.oracle, "exact2 | newton | box")
      ->check(CLI::IsMember({"exact2", "newton", "box"}));
  cmd->add_option("--reduction", c.reduction, "smoothed | qstoc")
      ->check(CLI::IsMember({"smoothed", "qstoc"}));
  cmd->add_option("--report", c.report, "write the JSON report here instead of stdout");
  cmd->add_option("--out", c.out, "write the solution here instead of stdout");
  cmd->add_option("--threads", c.threads, "worker threads (env PNORM_THREADS)");
}

void apply_threads(int requested) {
  int threads = requested;
  if (threads <= 0) {
    if (const char* env = std::getenv("PNORM_THREADS")) threads = std::atoi(env);
  }
  kernels::set_threads(threads > 0 ? threads : 1);
}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::BadExponent:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::NonFinite:
    case ErrorCode::InfeasibleRhs:
    case ErrorCode::InvalidArgument:
    case ErrorCode::SelfLoop:
    case ErrorCode::UnbalancedDemand:
    case ErrorCode::DisconnectedDemand:
    case ErrorCode::ZeroInitial:
    case ErrorCode::EmptyBox:
      return true;
    default:
      return false;
  }
}

double resolve_q(const Common& c, std::size_t m, OracleKind kind) {
  double q = c.q ? *c.q : default_q(m);
  if (kind == OracleKind::Exact2 && q != 2.0) {
    if (c.q) std::cerr << "warning: exact2 oracle forces q = 2\n";
    q = 2.0;
  }
  return q;
}

RefineOptions refine_options(const Common& c) {
  RefineOptions ro;
  ro.route = c.reduction == "qstoc" ? ReductionRoute::Qstoc : ReductionRoute::Smoothed;
  return ro;
}

template <typename Writer>
void emit(const std::string& path, Writer&& write) {
  if (path.empty()) {
    write(std::cout);
    return;
  }
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  write(f);
}

void emit_report(const Common& c, const SolveReport& report) {
  const nlohmann::json j = report;
  emit(c.report, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

int certify_exit(const ConstrainedProblem& problem, const Vector& x, double eps) {
  const DualCertificate dc = dual_certificate(problem, x);
  // the bound is conservative; a small absolute slack covers rounding
  if (dc.relative_gap <= eps + 1e-12) return kExitOk;
  std::cerr << "CertificationFailed: certified relative gap " << dc.relative_gap
            << " exceeds eps " << eps << '\n';
  return kExitUncertified;
}

int run_regress(const std::string& matrix, const std::string& rhs, double p, const Common& c) {
  ConstrainedProblem problem;
  problem.a = read_matrix_market_file(matrix);
  problem.b = read_vector_file(rhs);
  problem.p = p;
  require_valid(problem);
  const OracleKind kind = parse_oracle_kind(c.oracle);
  const double q = resolve_q(c, problem.variables(), kind);
  const SolveResult sr = solve_pnorm(problem, c.eps, q, OracleConfig::defaults(kind), refine_options(c));
  emit(c.out, [&](std::ostream& os) { write_vector(os, sr.x); });
  emit_report(c, sr.report);
  return certify_exit(problem, sr.x, c.eps);
}

int run_flow(const std::string& graph, std::optional<double> p, std::optional<double> delta,
             const Common& c) {
  const FlowInstance inst = read_flow_instance_file(graph);
  validate_flow(inst);
  const OracleKind kind = parse_oracle_kind(c.oracle);
  const double q = resolve_q(c, inst.edges.size(), kind);
  const OracleConfig cfg = OracleConfig::defaults(kind);
  FlowResult fr;
  double eps = c.eps;
  if (delta) {
    fr = approx_maxflow(inst, *delta, cfg, q, refine_options(c));
    eps = *delta / 4.0;
  } else {
    fr = solve_flow(inst, *p, c.eps, cfg, q, refine_options(c));
  }
  emit(c.out, [&](std::ostream& os) {
    if (delta) {
      os << std::setprecision(std::numeric_limits<double>::max_digits10);
      os << "p " << fr.p << '\n' << "congestion " << fr.congestion << '\n';
    }
    write_flow(os, fr.flow);
  });
  emit_report(c, fr.report);
  if (inst.edges.empty()) return kExitOk;
  // certify in the substituted variables
  const ConstrainedProblem problem = flow_problem(inst, fr.p);
  Vector x = fr.flow;
  if (!inst.weights.empty()) {
    for (std::size_t e = 0; e < x.size(); ++e) x[e] *= std::pow(inst.weights[e], 1.0 / fr.p);
  }
  return certify_exit(problem, x, eps);
}

struct BenchArgs {
  std::vector<double> p_list;
  std::vector<std::size_t> m_list;
  std::uint64_t seed = 1;
  std::string out;
  std::string oracle = "newton";
  double eps = 1e-3;
  std::optional<double> q;
  int threads = 0;
};

ConstrainedProblem bench_instance(std::size_t m, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed * 1000003ULL + m);
  std::normal_distribution<double> normal;
  const std::size_t n = std::max<std::size_t>(1, m / 2);
  std::vector<Triplet> trips;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) trips.push_back({i, j, normal(rng)});
  ConstrainedProblem problem;
  problem.a = SparseMatrix(n, m, std::move(trips));
  problem.b.resize(n);
  for (double& v : problem.b) v = normal(rng);
  problem.p = p;
  return problem;
}

int run_bench(const BenchArgs& args) {
  if (args.p_list.empty()) throw Error(ErrorCode::InvalidArgument, "--p-list is empty");
  if (args.m_list.empty()) throw Error(ErrorCode::InvalidArgument, "--m-list is empty");
  const OracleKind kind = parse_oracle_kind(args.oracle);
  std::ostringstream csv;
  csv << "m,p,q,oracle_calls,iterations,wall_time,final_objective,reference_gap\n";
  csv << std::setprecision(12);
  for (std::size_t m : args.m_list) {
    for (double p : args.p_list) {
      const ConstrainedProblem problem = bench_instance(m, p, args.seed);
      Common c;
      c.q = args.q;
      const double q = resolve_q(c, m, kind);
      const SolveResult sr = solve_pnorm(problem, args.eps, q, OracleConfig::defaults(kind));
      const double f = pnorm_objective(sr.x, p);
      double gap = std::numeric_limits<double>::quiet_NaN();
      if (m <= 300) {
        const Vector ref = reference::pnorm_regression(problem, 1e-10);
        gap = f / pnorm_objective(ref, p) - 1.0;
      }
      csv << m << ',' << p << ',' << q << ',' << sr.report.oracle_calls << ','
          << sr.report.iterations << ',' << sr.report.wall_time << ',' << f << ',' << gap << '\n';
    }
  }
  Common out;
  out.out = args.out;
  emit(out.out, [&](std::ostream& os) { os << csv.str(); });
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"p-norm regression and flow solver"};
  app.require_subcommand(1);

  Common regress_common;
  std::string matrix, rhs;
  double regress_p = 2.0;
  auto* regress = app.add_subcommand("regress", "min ||x||_p^p subject to A x = b");
  regress->add_option("--matrix", matrix, "constraint matrix (Matrix Market)")->required();
  regress->add_option("--rhs", rhs, "right-hand side, one value per line")->required();
  regress->add_option("--p", regress_p, "norm exponent")->required();
  add_common(regress, regress_common);

  Common flow_common;
  std::string flow_graph;
  std::optional<double> flow_p;
  auto* flow = app.add_subcommand("flow", "p-norm minimizing flow");
  flow->add_option("--graph", flow_graph, "edge-list graph with demands")->required();
  flow->add_option("--p", flow_p, "norm exponent")->required();
  add_common(flow, flow_common);

  Common maxflow_common;
  std::string maxflow_graph;
  std::optional<double> delta;
  auto* maxflow = app.add_subcommand("maxflow", "(1+delta)-approximate min-congestion flow");
  maxflow->add_option("--graph", maxflow_graph, "edge-list graph with demands")->required();
  maxflow->add_option("--delta", delta, "approximation parameter in (0, 1)")->required();
  add_common(maxflow, maxflow_common);

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "oracle-call scaling on seeded random instances");
  bench->add_option("--p-list", bench_args.p_list, "exponents")->delimiter(',');
  bench->add_option("--m-list", bench_args.m_list, "variable counts")->delimiter(',');
  bench->add_option("--seed", bench_args.seed, "instance seed");
  bench->add_option("--out", bench_args.out, "CSV output path (default stdout)");
  bench->add_option("--oracle", bench_args.oracle, "exact2 | newton | box")
      ->check(CLI::IsMember({"exact2", "newton", "box"}));
  bench->add_option("--eps", bench_args.eps, "relative accuracy");
  bench->add_option("--q", bench_args.q, "oracle exponent");
  bench->add_option("--threads", bench_args.threads, "worker threads (env PNORM_THREADS)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (regress->parsed()) {
      apply_threads(regress_common.threads);
      return run_regress(matrix, rhs, regress_p, regress_common);
    }
    if (flow->parsed()) {
      apply_threads(flow_common.threads);
      return run_flow(flow_graph, flow_p, std::nullopt, flow_common);
    }
    if (maxflow->parsed()) {
      apply_threads(maxflow_common.threads);
      return run_flow(maxflow_graph, std::nullopt, delta, maxflow_common);
    }
    if (bench->parsed()) {
      apply_threads(bench_args.threads);
      return run_bench(bench_args);
    }
  } catch (const CertificationError& e) {
    std::cerr << e.what() << '\n';
    return kExitUncertified;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return is_input_error(e.code()) ? kExitInput : kExitUncertified;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
