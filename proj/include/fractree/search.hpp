#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "fractree/checks.hpp"
#include "fractree/tree.hpp"

namespace fractree {

struct CriticalPOptions {
  double theta = 120.0;
  double q = 0.61;
  double r = 0.9;
  int depth = 10;
  double margin = 0.02;
  double tol = 1e-3;
  double p_lo = 0.3;
  double p_hi = 0.95;
  EmbeddingCheckOptions checks;
  double root_edge_length = 1.0;
  double orientation = 90.0;
  int max_depth = kDefaultMaxDepth;
};

struct FeasibilityProbe {
  double p = 0.0;
  bool feasible = false;
};

struct CriticalPResult {
  double p = 0.0;
  double lo = 0.0;  // final bracket: feasible at lo, infeasible at hi
  double hi = 0.0;
  int iterations = 0;
  bool non_monotone = false;
  std::vector<FeasibilityProbe> probes;  // monotonicity probes, ascending p
};

ParamSet params_at(const CriticalPOptions& options, double p);

// The feasibility predicate the search bisects on.
bool feasible_at(const CriticalPOptions& options, double p);

// Bisection for the largest feasible p, after probing 8 interior points for
// monotonicity; falls back to a descending grid scan when the probes are
// not monotone. Throws BracketError when the endpoints do not straddle.
CriticalPResult critical_p(const CriticalPOptions& options);

struct RadiusResult {
  double r = 0.0;
  int vertex_a = -1;  // binding pair, vertex_a < vertex_b
  int vertex_b = -1;
};

// Closed form: min over non-adjacent (a, b) of (|a - b| - margin) / (q^da + q^db).
RadiusResult maximize_radius(const Embedding& embedding, double q, double margin);

struct FeasibilityMapOptions {
  double p_min = 0.4;
  double p_max = 0.8;
  double q_min = 0.4;
  double q_max = 0.8;
  int p_res = 20;
  int q_res = 20;
  double theta = 120.0;
  int depth = 8;
  double margin = 0.02;
  std::optional<double> fixed_r;  // empty: r from maximize_radius per cell
  EmbeddingCheckOptions checks;
  double root_edge_length = 1.0;
  double orientation = 90.0;
};

struct FeasibilityMap {
  std::vector<double> p_axis;
  std::vector<double> q_axis;
  // Row-major by q: cell (qi, pi) at qi * p_axis.size() + pi.
  std::vector<double> clearance;
  std::vector<double> radius;
  std::vector<char> feasible;
  double margin = 0.0;

  std::size_t cell(std::size_t qi, std::size_t pi) const { return qi * p_axis.size() + pi; }

  // Rows (fixed q) whose feasibility is not of the form true..true false..false in p.
  std::vector<int> non_monotone_rows() const;
};

FeasibilityMap feasibility_map(const FeasibilityMapOptions& options);

}  // namespace fractree
