#include "pnorm/flows.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

namespace pnorm {
namespace {

// Component label per vertex by union-find over the edges.
std::vector<std::size_t> components(const FlowInstance& inst) {
  std::vector<std::size_t> parent(inst.vertex_count);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t v) {
    while (parent[v] != v) {
      parent[v] = parent[parent[v]];
      v = parent[v];
    }
    return v;
  };
  for (const auto& [u, v] : inst.edges) {
    const std::size_t a = find(u), b = find(v);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> label(inst.vertex_count);
  for (std::size_t v = 0; v < inst.vertex_count; ++v) label[v] = find(v);
  return label;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

}  // namespace

void validate_flow(const FlowInstance& inst) {
  const std::size_t n = inst.vertex_count;
  if (inst.demands.size() != n) throw Error(ErrorCode::DimensionMismatch, "one demand per vertex");
  if (!inst.weights.empty() && inst.weights.size() != inst.edges.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one weight per edge");
  }
  for (std::size_t e = 0; e < inst.edges.size(); ++e) {
    const auto [u, v] = inst.edges[e];
    if (u >= n || v >= n) throw Error(ErrorCode::DimensionMismatch, "edge endpoint out of range");
    if (u == v) throw Error(ErrorCode::SelfLoop, "edge " + std::to_string(e + 1) + " is a self-loop");
    if (!inst.weights.empty() && !(inst.weights[e] > 0.0 && std::isfinite(inst.weights[e]))) {
      throw Error(ErrorCode::InvalidArgument, "edge weights must be positive");
    }
  }
  double total = 0.0, l1 = 0.0;
  for (double d : inst.demands) {
    if (!std::isfinite(d)) throw Error(ErrorCode::NonFinite, "demand is not finite");
    total += d;
    l1 += std::abs(d);
  }
  if (std::abs(total) > 1e-9 * std::max(l1, 1.0)) {
    throw Error(ErrorCode::UnbalancedDemand, "demands do not sum to zero");
  }
  const auto label = components(inst);
  std::vector<double> per(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) per[label[v]] += inst.demands[v];
  for (std::size_t v = 0; v < n; ++v) {
    if (std::abs(per[v]) > 1e-9 * std::max(l1, 1.0)) {
      throw Error(ErrorCode::DisconnectedDemand, "demand cannot be routed between components");
    }
  }
}

SparseMatrix incidence(const FlowInstance& inst, std::vector<std::size_t>* kept_vertices) {
  for (std::size_t e = 0; e < inst.edges.size(); ++e) {
    if (inst.edges[e].first == inst.edges[e].second) {
      throw Error(ErrorCode::SelfLoop, "edge " + std::to_string(e + 1) + " is a self-loop");
    }
  }
  const auto label = components(inst);
  std::vector<std::size_t> row_of(inst.vertex_count, std::numeric_limits<std::size_t>::max());
  std::vector<std::size_t> kept;
  for (std::size_t v = 0; v < inst.vertex_count; ++v) {
    if (label[v] == v) continue;  // component root row dropped
    row_of[v] = kept.size();
    kept.push_back(v);
  }
  std::vector<Triplet> trips;
  for (std::size_t e = 0; e < inst.edges.size(); ++e) {
    const auto [u, v] = inst.edges[e];
    if (row_of[u] != std::numeric_limits<std::size_t>::max()) trips.push_back({row_of[u], e, 1.0});
    if (row_of[v] != std::numeric_limits<std::size_t>::max()) trips.push_back({row_of[v], e, -1.0});
  }
  if (kept_vertices != nullptr) *kept_vertices = kept;
  return SparseMatrix(kept.size(), inst.edges.size(), std::move(trips));
}

ConstrainedProblem flow_problem(const FlowInstance& inst, double p) {
  validate_flow(inst);
  std::vector<std::size_t> kept;
  ConstrainedProblem problem;
  problem.a = incidence(inst, &kept);
  problem.p = p;
  problem.b.resize(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) problem.b[i] = inst.demands[kept[i]];
  if (!inst.weights.empty()) {
    Vector scale(inst.edges.size());
    for (std::size_t e = 0; e < scale.size(); ++e) scale[e] = std::pow(inst.weights[e], -1.0 / p);
    problem.a = problem.a.scale_columns(scale);
  }
  return problem;
}

double default_q(std::size_t m) {
  const double l = std::log2(static_cast<double>(std::max<std::size_t>(m, 1)));
  return std::max(2.0, std::ceil(std::sqrt(l)));
}

FlowResult solve_flow(const FlowInstance& inst, double p, double eps, const OracleConfig& cfg,
                      double q, const RefineOptions& opts) {
  const ConstrainedProblem problem = flow_problem(inst, p);
  if (q <= 0.0) q = default_q(inst.edges.size());
  FlowResult out;
  out.p = p;
  if (inst.edges.empty()) return out;
  SolveResult sr = solve_pnorm(problem, eps, q, cfg, opts);
  out.flow = std::move(sr.x);
  out.report = std::move(sr.report);
  if (!inst.weights.empty()) {
    for (std::size_t e = 0; e < out.flow.size(); ++e) out.flow[e] *= std::pow(inst.weights[e], -1.0 / p);
  }
  out.congestion = norm_inf(out.flow);
  return out;
}

double maxflow_exponent(std::size_t edges, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorCode::InvalidArgument, "delta must lie in (0, 1)");
  const double p = std::ceil(std::log(2.0 * static_cast<double>(edges)) / std::log1p(delta));
  return std::max(p, 2.0);
}

FlowResult approx_maxflow(const FlowInstance& inst, double delta, const OracleConfig& cfg,
                          double q, const RefineOptions& opts) {
  for (double w : inst.weights) {
    if (w != 1.0) throw Error(ErrorCode::InvalidArgument, "approx_maxflow needs unit weights");
  }
  const double p = maxflow_exponent(inst.edges.size(), delta);
  return solve_flow(inst, p, delta / 4.0, cfg, q, opts);
}

FlowInstance read_flow_instance(std::istream& in) {
  FlowInstance inst;
  std::string line;
  std::size_t lineno = 0;
  std::size_t declared_edges = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == 'c' || tag[0] == '%' || tag[0] == '#') continue;
    if (tag == "p") {
      if (header) parse_error(lineno, "duplicate header");
      if (!(ls >> inst.vertex_count >> declared_edges)) parse_error(lineno, "expected 'p <vertices> <edges>'");
      inst.demands.assign(inst.vertex_count, 0.0);
      header = true;
    } else if (tag == "e") {
      if (!header) parse_error(lineno, "edge before header");
      long long u = 0, v = 0;
      if (!(ls >> u >> v)) parse_error(lineno, "expected 'e <u> <v> [weight]'");
      if (u < 1 || v < 1 || static_cast<std::size_t>(u) > inst.vertex_count ||
          static_cast<std::size_t>(v) > inst.vertex_count) {
        parse_error(lineno, "vertex out of range");
      }
      double w = 1.0;
      if (!(ls >> w)) w = 1.0;
      inst.edges.emplace_back(static_cast<std::size_t>(u - 1), static_cast<std::size_t>(v - 1));
      inst.weights.push_back(w);
    } else if (tag == "d") {
      if (!header) parse_error(lineno, "demand before header");
      long long v = 0;
      double value = 0.0;
      if (!(ls >> v >> value)) parse_error(lineno, "expected 'd <vertex> <value>'");
      if (v < 1 || static_cast<std::size_t>(v) > inst.vertex_count) parse_error(lineno, "vertex out of range");
      inst.demands[static_cast<std::size_t>(v - 1)] += value;
    } else {
      parse_error(lineno, "unknown record '" + tag + "'");
    }
  }
  if (!header) throw Error(ErrorCode::ParseError, "missing 'p' header");
  if (inst.edges.size() != declared_edges) {
    throw Error(ErrorCode::ParseError, "header declares " + std::to_string(declared_edges) +
                                           " edges, found " + std::to_string(inst.edges.size()));
  }
  if (std::all_of(inst.weights.begin(), inst.weights.end(), [](double w) { return w == 1.0; })) {
    inst.weights.clear();
  }
  return inst;
}

FlowInstance read_flow_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  return read_flow_instance(in);
}

void write_flow(std::ostream& out, std::span<const double> flow) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t e = 0; e < flow.size(); ++e) out << "f " << (e + 1) << ' ' << flow[e] << '\n';
  out.precision(old);
}

}  // namespace pnorm
