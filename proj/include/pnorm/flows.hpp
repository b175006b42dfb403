#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "pnorm/homotopy.hpp"
#include "pnorm/model.hpp"
#include "pnorm/oracle.hpp"

namespace pnorm {

// Undirected graph with demands; vertices are 0-indexed here and 1-indexed
// in the text format.
struct FlowInstance {
  std::size_t vertex_count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  Vector weights;  // empty means unit
  Vector demands;  // per vertex, B^T f = demands
};

// Throws SelfLoop, DimensionMismatch, UnbalancedDemand or DisconnectedDemand.
void validate_flow(const FlowInstance& instance);

// B^T with rows = vertices and cols = edges (+1 at u, -1 at v), one row per
// connected component dropped. kept_vertices receives the surviving rows.
SparseMatrix incidence(const FlowInstance& instance,
                       std::vector<std::size_t>* kept_vertices = nullptr);

// Regression problem in the substituted variables x_e = w_e^{1/p} f_e.
ConstrainedProblem flow_problem(const FlowInstance& instance, double p);

struct FlowResult {
  Vector flow;
  SolveReport report;
  double p = 2.0;
  double congestion = 0.0;
};

// max(2, ceil(sqrt(log2 m)))
double default_q(std::size_t m);

FlowResult solve_flow(const FlowInstance& instance, double p, double eps, const OracleConfig& cfg,
                      double q = 0.0, const RefineOptions& opts = {});

// ceil(log(2m) / log(1 + delta))
double maxflow_exponent(std::size_t edges, double delta);

// Unit weights only. Solves the p-norm flow with p = maxflow_exponent and
// eps = delta / 4.
FlowResult approx_maxflow(const FlowInstance& instance, double delta, const OracleConfig& cfg,
                          double q = 0.0, const RefineOptions& opts = {});

// "p V E", "e u v [w]", "d v value"; lines starting with 'c' or '%' are comments.
FlowInstance read_flow_instance(std::istream& in);
FlowInstance read_flow_instance_file(const std::string& path);
// One "f <edge> <value>" line per edge, 1-indexed.
void write_flow(std::ostream& out, std::span<const double> flow);

}  // namespace pnorm
