#include "fractree/search.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <thread>

#include "fractree/error.hpp"

namespace fractree {

ParamSet params_at(const CriticalPOptions& o, double p) {
  ParamSet prm;
  prm.p = p;
  prm.theta = o.theta;
  prm.q = o.q;
  prm.r = o.r;
  prm.depth = o.depth;
  prm.root_edge_length = o.root_edge_length;
  prm.orientation = o.orientation;
  prm.max_depth = o.max_depth;
  return prm;
}

bool feasible_at(const CriticalPOptions& o, double p) {
  const Embedding emb = build_embedding(params_at(o, p));
  if (o.checks.use_crossings && has_edge_crossing(emb)) return false;
  if (o.checks.use_clearance) return min_clearance(assign_radii(emb)).gap >= o.margin - kTangentTol;
  return true;
}

namespace {

double clearance_at(const CriticalPOptions& o, double p) {
  return min_clearance(assign_radii(build_embedding(params_at(o, p)))).gap;
}

}  // namespace

CriticalPResult critical_p(const CriticalPOptions& o) {
  if (!(o.tol > 0.0)) throw DomainError("tol", "tolerance must be positive");
  if (!(o.p_lo > 0.0 && o.p_lo < o.p_hi && o.p_hi < 1.0))
    throw DomainError("p_lo", "bracket must satisfy 0 < p_lo < p_hi < 1");
  if (o.margin < 0.0) throw DomainError("margin", "margin must be non-negative");
  if (!o.checks.use_clearance && !o.checks.use_crossings)
    throw DomainError("checks", "at least one feasibility component must be enabled");

  const bool lo_ok = feasible_at(o, o.p_lo);
  const bool hi_ok = feasible_at(o, o.p_hi);
  if (!lo_ok || hi_ok) {
    const std::string why = lo_ok ? "both endpoints are feasible" : hi_ok ? "both endpoints are infeasible"
                                                                            : "p_lo is infeasible and p_hi feasible";
    throw BracketError("no bracket on [" + std::to_string(o.p_lo) + ", " + std::to_string(o.p_hi) + "]: " + why,
                       clearance_at(o, o.p_lo), clearance_at(o, o.p_hi));
  }

  CriticalPResult res;
  bool seen_infeasible = false;
  bool monotone = true;
  for (int k = 1; k <= 8; ++k) {
    const double p = o.p_lo + (o.p_hi - o.p_lo) * k / 9.0;
    const bool ok = feasible_at(o, p);
    res.probes.push_back({p, ok});
    if (ok && seen_infeasible) monotone = false;
    if (!ok) seen_infeasible = true;
  }

  if (!monotone) {
    res.non_monotone = true;
    const auto steps = static_cast<long long>(std::floor((o.p_hi - o.p_lo) / o.tol));
    res.lo = o.p_lo;
    res.hi = o.p_hi;
    for (long long k = 1; k <= steps; ++k) {
      const double p = o.p_hi - static_cast<double>(k) * o.tol;
      ++res.iterations;
      if (feasible_at(o, p)) {
        res.lo = p;
        res.hi = p + o.tol;
        break;
      }
    }
    res.p = res.lo;
    return res;
  }

  double lo = o.p_lo, hi = o.p_hi;
  while (hi - lo > o.tol) {
    const double mid = 0.5 * (lo + hi);
    (feasible_at(o, mid) ? lo : hi) = mid;
    ++res.iterations;
  }
  res.lo = lo;
  res.hi = hi;
  res.p = 0.5 * (lo + hi);
  return res;
}

RadiusResult maximize_radius(const Embedding& emb, double q, double margin) {
  if (std::isnan(margin) || margin < 0.0) throw DomainError("margin", "margin must be non-negative");
  if (!(q > 0.0)) throw DomainError("q", "q must be positive");
  const auto& V = emb.vertices;
  const int n = static_cast<int>(V.size());

  std::vector<double> weight(n);
  for (int i = 0; i < n; ++i) weight[i] = std::pow(q, V[i].depth);

  struct Best {
    double r = std::numeric_limits<double>::infinity();
    int a = -1, b = -1;
  };
  auto better = [](double r, int a, int b, const Best& cur) {
    return r < cur.r || (r == cur.r && std::pair{a, b} < std::pair{cur.a, cur.b});
  };
  auto scan = [&](int begin, int step) {
    Best best;
    for (int a = begin; a < n; a += step) {
      for (int b = a + 1; b < n; ++b) {
        if (emb.adjacent(a, b)) continue;
        const double r = (distance(V[a].position, V[b].position) - margin) / (weight[a] + weight[b]);
        if (better(r, a, b, best)) best = {r, a, b};
      }
    }
    return best;
  };

  const int workers = std::clamp(static_cast<int>(std::thread::hardware_concurrency()), 1, 16);
  Best best;
  if (n < 512 || workers == 1) {
    best = scan(0, 1);
  } else {
    std::vector<std::future<Best>> parts;
    for (int w = 0; w < workers; ++w) parts.push_back(std::async(std::launch::async, scan, w, workers));
    for (auto& f : parts) {
      const Best part = f.get();
      if (part.a >= 0 && better(part.r, part.a, part.b, best)) best = part;
    }
  }
  if (best.a < 0) throw UnboundedError("no non-adjacent vertex pair constrains the radius");
  return {best.r, best.a, best.b};
}

std::vector<int> FeasibilityMap::non_monotone_rows() const {
  std::vector<int> rows;
  for (std::size_t qi = 0; qi < q_axis.size(); ++qi) {
    bool seen_bad = false;
    for (std::size_t pi = 0; pi < p_axis.size(); ++pi) {
      const bool ok = feasible[cell(qi, pi)] != 0;
      if (ok && seen_bad) {
        rows.push_back(static_cast<int>(qi));
        break;
      }
      if (!ok) seen_bad = true;
    }
  }
  return rows;
}

namespace {

std::vector<double> axis(double lo, double hi, int res) {
  std::vector<double> v(res);
  for (int i = 0; i < res; ++i) v[i] = res == 1 ? lo : lo + (hi - lo) * i / (res - 1);
  return v;
}

}  // namespace

FeasibilityMap feasibility_map(const FeasibilityMapOptions& o) {
  auto in_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!in_unit(o.p_min) || !in_unit(o.p_max) || o.p_min > o.p_max) throw DomainError("p", "p range must lie in (0, 1)");
  if (!in_unit(o.q_min) || !in_unit(o.q_max) || o.q_min > o.q_max) throw DomainError("q", "q range must lie in (0, 1)");
  if (o.p_res < 1 || o.q_res < 1) throw DomainError("res", "resolution must be at least 1 per axis");
  if (o.margin < 0.0) throw DomainError("margin", "margin must be non-negative");
  if (o.fixed_r && !(*o.fixed_r > 0.0)) throw DomainError("r", "r must be positive");

  FeasibilityMap map;
  map.p_axis = axis(o.p_min, o.p_max, o.p_res);
  map.q_axis = axis(o.q_min, o.q_max, o.q_res);
  map.margin = o.margin;
  const std::size_t cells = map.p_axis.size() * map.q_axis.size();
  map.clearance.assign(cells, 0.0);
  map.radius.assign(cells, 0.0);
  map.feasible.assign(cells, 0);

  // Each column (fixed p) shares one embedding; columns run in parallel.
  auto column = [&](std::size_t pi) {
    ParamSet prm;
    prm.p = map.p_axis[pi];
    prm.theta = o.theta;
    prm.depth = o.depth;
    prm.root_edge_length = o.root_edge_length;
    prm.orientation = o.orientation;
    prm.r = 1.0;
    prm.q = map.q_axis.front();
    Embedding emb = build_embedding(prm);
    const bool crossing = o.checks.use_crossings && has_edge_crossing(emb);
    for (std::size_t qi = 0; qi < map.q_axis.size(); ++qi) {
      const double q = map.q_axis[qi];
      double r = 0.0;
      if (o.fixed_r) {
        r = *o.fixed_r;
      } else {
        try {
          r = maximize_radius(emb, q, o.margin).r;
        } catch (const UnboundedError&) {
          r = std::numeric_limits<double>::infinity();
        }
      }
      const std::size_t c = map.cell(qi, pi);
      map.radius[c] = r;
      double gap;
      if (r > 0.0 && std::isfinite(r)) {
        emb.params.r = r;
        emb.params.q = q;
        gap = min_clearance(assign_radii(emb)).gap;
      } else {
        // No admissible radius: report the bare centre clearance.
        emb.params.r = 1.0;
        emb.params.q = q;
        DiskSet bare = assign_radii(emb);
        for (auto& d : bare.disks) d.radius = 0.0;
        gap = min_clearance(bare).gap;
      }
      map.clearance[c] = gap;
      const bool clear_ok = !o.checks.use_clearance || (r > 0.0 && gap >= o.margin - kTangentTol);
      map.feasible[c] = clear_ok && !crossing;
    }
  };

  std::vector<std::future<void>> jobs;
  for (std::size_t pi = 0; pi < map.p_axis.size(); ++pi) jobs.push_back(std::async(std::launch::async, column, pi));
  for (auto& j : jobs) j.get();
  return map;
}

}  // namespace fractree
