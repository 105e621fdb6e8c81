#include "fractree/geom.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "fractree/error.hpp"

namespace fractree {

void Box::expand(const Box& o) {
  lo.x = std::min(lo.x, o.lo.x);
  lo.y = std::min(lo.y, o.lo.y);
  hi.x = std::max(hi.x, o.hi.x);
  hi.y = std::max(hi.y, o.hi.y);
}

Box bounds(const Disk& d) {
  return {{d.center.x - d.radius, d.center.y - d.radius}, {d.center.x + d.radius, d.center.y + d.radius}};
}

Box bounds(std::span<const Disk> disks) {
  Box b;
  for (const auto& d : disks) b.expand(bounds(d));
  return b;
}

namespace {

bool boxes_overlap(const Box& a, const Box& b) {
  return a.lo.x <= b.hi.x && b.lo.x <= a.hi.x && a.lo.y <= b.hi.y && b.lo.y <= a.hi.y;
}

double normalize_angle(double a) {
  a = std::fmod(a, kTwoPi);
  if (a < 0.0) a += kTwoPi;
  return a;
}

}  // namespace

// ---------------------------------------------------------------------------
// GridIndex

GridIndex::GridIndex(std::span<const Disk> disks, double cell_size) : count_(disks.size()) {
  if (cell_size <= 0.0) {
    double max_d = 0.0;
    for (const auto& d : disks) max_d = std::max(max_d, 2.0 * d.radius);
    cell_size = max_d;
  }
  cell_ = cell_size > 0.0 && std::isfinite(cell_size) ? cell_size : 1.0;
  for (std::size_t i = 0; i < disks.size(); ++i) {
    const Box b = bounds(disks[i]);
    const long long x0 = coord(b.lo.x), x1 = coord(b.hi.x);
    const long long y0 = coord(b.lo.y), y1 = coord(b.hi.y);
    for (long long ix = x0; ix <= x1; ++ix)
      for (long long iy = y0; iy <= y1; ++iy) cells_[key(ix, iy)].push_back(static_cast<int>(i));
  }
}

std::int64_t GridIndex::key(long long ix, long long iy) const {
  const auto ux = static_cast<std::uint64_t>(static_cast<std::uint32_t>(static_cast<std::int32_t>(ix)));
  const auto uy = static_cast<std::uint64_t>(static_cast<std::uint32_t>(static_cast<std::int32_t>(iy)));
  return static_cast<std::int64_t>((ux << 32) | uy);
}

long long GridIndex::coord(double v) const { return static_cast<long long>(std::floor(v / cell_)); }

long long GridIndex::cells_spanned(const Box& box) const {
  if (box.empty()) return 0;
  const double nx = std::floor(box.hi.x / cell_) - std::floor(box.lo.x / cell_) + 1.0;
  const double ny = std::floor(box.hi.y / cell_) - std::floor(box.lo.y / cell_) + 1.0;
  const double n = nx * ny;
  return n > 1e15 ? static_cast<long long>(1e15) : static_cast<long long>(n);
}

std::vector<int> GridIndex::query(const Box& box) const {
  std::vector<int> out;
  if (box.empty()) return out;
  if (cells_spanned(box) > static_cast<long long>(cells_.size())) {
    for (const auto& [k, ids] : cells_) {
      const auto ix = static_cast<std::int32_t>(static_cast<std::uint64_t>(k) >> 32);
      const auto iy = static_cast<std::int32_t>(static_cast<std::uint64_t>(k) & 0xffffffffu);
      const Box cell{{ix * cell_, iy * cell_}, {(ix + 1) * cell_, (iy + 1) * cell_}};
      if (boxes_overlap(cell, box)) out.insert(out.end(), ids.begin(), ids.end());
    }
  } else {
    const long long x0 = coord(box.lo.x), x1 = coord(box.hi.x);
    const long long y0 = coord(box.lo.y), y1 = coord(box.hi.y);
    for (long long ix = x0; ix <= x1; ++ix) {
      for (long long iy = y0; iy <= y1; ++iy) {
        auto it = cells_.find(key(ix, iy));
        if (it != cells_.end()) out.insert(out.end(), it->second.begin(), it->second.end());
      }
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

const std::vector<int>* GridIndex::cell_at(Vec2 p) const {
  auto it = cells_.find(key(coord(p.x), coord(p.y)));
  return it == cells_.end() ? nullptr : &it->second;
}

UnionMembership::UnionMembership(std::vector<Disk> disks)
    : disks_(std::move(disks)), box_(bounds(disks_)), grid_(disks_) {}

bool UnionMembership::contains(Vec2 p) const {
  if (disks_.empty() || p.x < box_.lo.x || p.x > box_.hi.x || p.y < box_.lo.y || p.y > box_.hi.y) return false;
  const auto* ids = grid_.cell_at(p);
  if (!ids) return false;
  for (int i : *ids) {
    const Vec2 d = p - disks_[i].center;
    if (d.dot(d) < disks_[i].radius * disks_[i].radius) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Clearance

double disk_gap(const Disk& a, const Disk& b) { return distance(a.center, b.center) - a.radius - b.radius; }

ClearanceReport min_clearance(const DiskSet& set) {
  ClearanceReport best;
  const auto& disks = set.disks;
  const int n = static_cast<int>(disks.size());
  if (n < 2) return best;

  auto consider = [&](int a, int b) {
    if (set.adjacent(a, b)) return;
    ++best.pairs_examined;
    const double g = disk_gap(disks[a], disks[b]);
    int va = disks[a].vertex, vb = disks[b].vertex;
    if (va > vb) std::swap(va, vb);
    if (g < best.gap || (g == best.gap && std::pair{va, vb} < std::pair{best.vertex_a, best.vertex_b})) {
      best.gap = g;
      best.vertex_a = va;
      best.vertex_b = vb;
    }
  };
  auto brute_force = [&] {
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) consider(a, b);
  };

  const GridIndex grid(disks);
  for (int a = 0; a < n; ++a)
    for (int b : grid.query(bounds(disks[a])))
      if (b > a) consider(a, b);

  // Every pair with gap <= U has overlapping U-inflated boxes, so a second
  // sweep at that reach is exact.
  const double reach = best.gap;
  if (!std::isfinite(reach) || reach > 4.0 * grid.cell_size()) {
    brute_force();
    return best;
  }
  for (int a = 0; a < n; ++a)
    for (int b : grid.query(bounds(disks[a]).inflated(std::max(reach, 0.0))))
      if (b > a) consider(a, b);
  return best;
}

// ---------------------------------------------------------------------------
// Edge crossings

namespace {

double orient(Vec2 a, Vec2 b, Vec2 c) { return (b - a).cross(c - a); }

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double o1 = orient(a, b, c), o2 = orient(a, b, d);
  const double o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (((o1 > 0 && o2 < 0) || (o1 < 0 && o2 > 0)) && ((o3 > 0 && o4 < 0) || (o3 < 0 && o4 > 0))) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

// Visits candidate edge pairs through a uniform grid, each pair once.
// `visit` returns false to stop early.
template <class Visit>
void for_each_crossing(const Embedding& emb, Visit&& visit) {
  const auto& V = emb.vertices;
  const auto& E = emb.edges;
  if (E.size() < 2) return;

  Box all;
  double shortest = std::numeric_limits<double>::infinity();
  for (const auto& e : E) {
    const Vec2 a = V[e.parent].position, b = V[e.child].position;
    all.expand({{std::min(a.x, b.x), std::min(a.y, b.y)}, {std::max(a.x, b.x), std::max(a.y, b.y)}});
    shortest = std::min(shortest, distance(a, b));
  }
  const double diag = std::hypot(all.hi.x - all.lo.x, all.hi.y - all.lo.y);
  const double cell = std::max({shortest, diag / 2048.0, 1e-12});

  struct Range {
    long long x0, x1, y0, y1;
  };
  std::vector<Range> ranges(E.size());
  std::unordered_map<std::int64_t, std::vector<int>> cells;
  auto cc = [cell](double v) { return static_cast<long long>(std::floor(v / cell)); };
  auto key = [](long long ix, long long iy) {
    return static_cast<std::int64_t>((static_cast<std::uint64_t>(static_cast<std::uint32_t>(ix)) << 32) |
                                     static_cast<std::uint32_t>(iy));
  };
  for (std::size_t i = 0; i < E.size(); ++i) {
    const Vec2 a = V[E[i].parent].position, b = V[E[i].child].position;
    Range r{cc(std::min(a.x, b.x)), cc(std::max(a.x, b.x)), cc(std::min(a.y, b.y)), cc(std::max(a.y, b.y))};
    ranges[i] = r;
    for (long long ix = r.x0; ix <= r.x1; ++ix)
      for (long long iy = r.y0; iy <= r.y1; ++iy) cells[key(ix, iy)].push_back(static_cast<int>(i));
  }

  // Deterministic order over cells.
  std::vector<std::int64_t> keys;
  keys.reserve(cells.size());
  for (const auto& kv : cells) keys.push_back(kv.first);
  std::sort(keys.begin(), keys.end());

  for (auto k : keys) {
    const auto& ids = cells[k];
    const auto ix = static_cast<std::int32_t>(static_cast<std::uint64_t>(k) >> 32);
    const auto iy = static_cast<std::int32_t>(static_cast<std::uint64_t>(k) & 0xffffffffu);
    for (std::size_t s = 0; s < ids.size(); ++s) {
      for (std::size_t t = s + 1; t < ids.size(); ++t) {
        const int i = ids[s], j = ids[t];
        const Range &ri = ranges[i], &rj = ranges[j];
        // Test each pair only in the first cell the two ranges share.
        if (std::max(ri.x0, rj.x0) != ix || std::max(ri.y0, rj.y0) != iy) continue;
        const Edge &ei = E[i], &ej = E[j];
        if (ei.parent == ej.parent || ei.parent == ej.child || ei.child == ej.parent || ei.child == ej.child)
          continue;
        if (segments_intersect(V[ei.parent].position, V[ei.child].position, V[ej.parent].position,
                               V[ej.child].position)) {
          if (!visit(std::min(i, j), std::max(i, j))) return;
        }
      }
    }
  }
}

}  // namespace

std::vector<std::pair<int, int>> edge_crossings(const Embedding& embedding) {
  std::vector<std::pair<int, int>> out;
  for_each_crossing(embedding, [&](int i, int j) {
    out.emplace_back(i, j);
    return true;
  });
  std::sort(out.begin(), out.end());
  return out;
}

bool has_edge_crossing(const Embedding& embedding) {
  bool hit = false;
  for_each_crossing(embedding, [&](int, int) {
    hit = true;
    return false;
  });
  return hit;
}

// ---------------------------------------------------------------------------
// Union boundary

namespace {

struct CoverInterval {
  double s;
  double e;
  int s_owner;  // disk whose coverage begins at s
  int e_owner;  // disk whose coverage ends at e
};

}  // namespace

std::vector<ArcLoop> union_boundary(std::span<const Disk> disks) {
  if (disks.empty()) throw EmptyInputError("union_boundary needs at least one disk");
  const int n = static_cast<int>(disks.size());
  const GridIndex grid(disks);

  // Drop disks inside another disk; of identical disks keep the lowest index.
  std::vector<char> alive(n, 1);
  for (int i = 0; i < n; ++i) {
    for (int j : grid.query(bounds(disks[i]))) {
      if (j == i) continue;
      const double d = distance(disks[i].center, disks[j].center);
      if (d + disks[i].radius <= disks[j].radius + kTangentTol) {
        const bool mutual = d + disks[j].radius <= disks[i].radius + kTangentTol;
        if (!mutual || j < i) {
          alive[i] = 0;
          break;
        }
      }
    }
  }

  std::vector<Arc> arcs;
  std::vector<int> end_owner;
  std::vector<std::vector<int>> arcs_of(n);

  for (int i = 0; i < n; ++i) {
    if (!alive[i]) continue;
    const Disk& di = disks[i];
    std::vector<CoverInterval> cover;
    for (int j : grid.query(bounds(di))) {
      if (j == i || !alive[j]) continue;
      const Disk& dj = disks[j];
      const Vec2 delta = dj.center - di.center;
      const double d = delta.norm();
      if (d >= di.radius + dj.radius - kTangentTol) continue;
      if (d + dj.radius <= di.radius + kTangentTol || d + di.radius <= dj.radius + kTangentTol) continue;
      const double c = std::clamp((di.radius * di.radius + d * d - dj.radius * dj.radius) / (2.0 * di.radius * d),
                                  -1.0, 1.0);
      const double half = std::acos(c);
      const double s = normalize_angle(std::atan2(delta.y, delta.x) - half);
      cover.push_back({s, s + 2.0 * half, j, j});
    }

    if (cover.empty()) {
      arcs_of[i].push_back(static_cast<int>(arcs.size()));
      arcs.push_back({i, di.center, di.radius, 0.0, kTwoPi, true});
      end_owner.push_back(-1);
      continue;
    }

    std::sort(cover.begin(), cover.end(), [](const CoverInterval& a, const CoverInterval& b) {
      return a.s < b.s || (a.s == b.s && a.s_owner < b.s_owner);
    });
    std::vector<CoverInterval> merged;
    for (const auto& iv : cover) {
      if (!merged.empty() && iv.s <= merged.back().e + kAngleTol) {
        if (iv.e > merged.back().e) {
          merged.back().e = iv.e;
          merged.back().e_owner = iv.e_owner;
        }
      } else {
        merged.push_back(iv);
      }
    }
    while (merged.size() > 1 && merged.back().e + kAngleTol >= merged.front().s + kTwoPi) {
      const CoverInterval f = merged.front();
      merged.erase(merged.begin());
      if (f.e + kTwoPi > merged.back().e) {
        merged.back().e = f.e + kTwoPi;
        merged.back().e_owner = f.e_owner;
      }
    }
    if (merged.size() == 1 && merged[0].e - merged[0].s >= kTwoPi - kAngleTol) continue;

    const std::size_t m = merged.size();
    for (std::size_t k = 0; k < m; ++k) {
      const double start = merged[k].e;
      const double end = k + 1 < m ? merged[k + 1].s : merged[0].s + kTwoPi;
      if (end - start <= kAngleTol) continue;
      const int owner = k + 1 < m ? merged[k + 1].s_owner : merged[0].s_owner;
      arcs_of[i].push_back(static_cast<int>(arcs.size()));
      arcs.push_back({i, di.center, di.radius, start, end, true});
      end_owner.push_back(owner);
    }
  }

  std::vector<ArcLoop> loops;
  std::vector<char> used(arcs.size(), 0);
  for (std::size_t first = 0; first < arcs.size(); ++first) {
    if (used[first]) continue;
    ArcLoop loop;
    int cur = static_cast<int>(first);
    for (std::size_t guard = 0; guard <= arcs.size(); ++guard) {
      used[cur] = 1;
      loop.arcs.push_back(arcs[cur]);
      if (end_owner[cur] < 0) {
        loop.closed = true;
        break;
      }
      const Vec2 endp = arcs[cur].end_point();
      // Nearest start point; among ties prefer closing the loop, then unused arcs.
      auto nearest = [&](const std::vector<int>& pool) {
        double best = std::numeric_limits<double>::infinity();
        for (int c : pool) best = std::min(best, distance(arcs[c].start_point(), endp));
        int pick = -1;
        for (int c : pool) {
          if (distance(arcs[c].start_point(), endp) > best + 1e-12) continue;
          if (c == static_cast<int>(first)) return std::pair{c, best};
          if (pick < 0 || (used[pick] && !used[c])) pick = c;
        }
        return std::pair{pick, best};
      };
      auto [next, gap] = nearest(arcs_of[end_owner[cur]]);
      const double tol = 1e-7 * std::max(1.0, arcs[cur].radius);
      if (next < 0 || gap > tol) {
        std::vector<int> all(arcs.size());
        for (std::size_t a = 0; a < arcs.size(); ++a) all[a] = static_cast<int>(a);
        std::tie(next, gap) = nearest(all);
      }
      if (next < 0 || gap > 1e-6 * std::max(1.0, arcs[cur].radius))
        throw GeometryError("union boundary: no arc continues the loop");
      if (next == static_cast<int>(first)) {
        loop.closed = true;
        break;
      }
      if (used[next]) throw GeometryError("union boundary: loop re-enters a used arc");
      cur = next;
    }
    if (!loop.closed) throw GeometryError("union boundary: loop did not close");
    loops.push_back(std::move(loop));
  }
  return loops;
}

double loops_area(std::span<const ArcLoop> loops) {
  double twice = 0.0;
  for (const auto& loop : loops) {
    for (const auto& a : loop.arcs) {
      const double r = a.radius;
      twice += r * r * (a.end - a.start) + r * a.center.x * (std::sin(a.end) - std::sin(a.start)) -
               r * a.center.y * (std::cos(a.end) - std::cos(a.start));
    }
  }
  return 0.5 * twice;
}

int loops_winding(std::span<const ArcLoop> loops, Vec2 p) {
  int w = 0;
  for (const auto& loop : loops) {
    for (const auto& a : loop.arcs) {
      const double dy = p.y - a.center.y;
      if (std::abs(dy) >= a.radius) continue;
      const double h = std::sqrt(a.radius * a.radius - dy * dy);
      for (double sx : {h, -h}) {
        if (a.center.x + sx <= p.x) continue;
        const double t = std::atan2(dy, sx);
        const double rel = a.ccw ? normalize_angle(t - a.start) : normalize_angle(a.start - t);
        if (rel >= a.extent()) continue;
        const int up = sx > 0 ? 1 : -1;
        w += a.ccw ? up : -up;
      }
    }
  }
  return w;
}

double union_area(std::span<const Disk> disks) {
  if (disks.empty()) return 0.0;
  const auto loops = union_boundary(disks);
  return loops_area(loops);
}

// ---------------------------------------------------------------------------
// Sampling

AreaEstimate region_area(const std::vector<std::vector<Disk>>& include, const std::vector<Disk>& exclude,
                         long long budget, std::uint64_t seed) {
  if (include.empty()) throw DomainError("include", "region_area needs at least one include union");
  if (budget < kMinSampleBudget)
    throw DomainError("budget", "sample budget must be at least " + std::to_string(kMinSampleBudget));

  std::vector<UnionMembership> inc;
  inc.reserve(include.size());
  for (const auto& u : include) inc.emplace_back(u);
  const UnionMembership exc(exclude);

  const Box box = inc.front().box();
  if (box.empty() || box.area() <= 0.0) return {};

  const long long strata = std::max<long long>(1, static_cast<long long>(std::sqrt(budget / 2.0)));
  const double w = (box.hi.x - box.lo.x) / static_cast<double>(strata);
  const double h = (box.hi.y - box.lo.y) / static_cast<double>(strata);

  std::mt19937_64 rng(seed);
  auto u01 = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  auto inside = [&](Vec2 pt) {
    for (const auto& u : inc)
      if (!u.contains(pt)) return false;
    return !exc.contains(pt);
  };

  double hits = 0.0;
  double disagreements = 0.0;
  for (long long iy = 0; iy < strata; ++iy) {
    for (long long ix = 0; ix < strata; ++ix) {
      const double x0 = box.lo.x + static_cast<double>(ix) * w;
      const double y0 = box.lo.y + static_cast<double>(iy) * h;
      const double u1 = u01(), v1 = u01(), u2 = u01(), v2 = u01();
      const bool a = inside({x0 + u1 * w, y0 + v1 * h});
      const bool b = inside({x0 + u2 * w, y0 + v2 * h});
      hits += static_cast<double>(a) + static_cast<double>(b);
      if (a != b) disagreements += 1.0;
    }
  }
  // Two samples per stratum: Var(stratum mean) = (v1 - v2)^2 / 4.
  const double cell_area = w * h;
  return {cell_area * hits / 2.0, cell_area * 0.5 * std::sqrt(disagreements)};
}

// ---------------------------------------------------------------------------
// Polygons

std::vector<Polyline> polygonize(std::span<const ArcLoop> loops, double tolerance) {
  if (!(tolerance > 0.0)) throw DomainError("tolerance", "chord tolerance must be positive");
  std::vector<Polyline> out;
  out.reserve(loops.size());
  for (const auto& loop : loops) {
    if (!loop.closed || loop.arcs.empty()) throw GeometryError("polygonize: loop is not closed");
    Polyline poly;
    for (const auto& a : loop.arcs) {
      const double step = tolerance >= a.radius ? kPi : 2.0 * std::acos(1.0 - tolerance / a.radius);
      const double ext = a.extent();
      const auto by_sagitta = static_cast<long long>(std::ceil(ext / step));
      const auto by_floor = static_cast<long long>(std::ceil(8.0 * ext / kTwoPi - 1e-12));
      const long long segs = std::max<long long>({1, by_sagitta, by_floor});
      const double sign = a.ccw ? 1.0 : -1.0;
      for (long long k = 0; k < segs; ++k)
        poly.push_back(a.point_at(a.start + sign * ext * static_cast<double>(k) / static_cast<double>(segs)));
    }
    poly.push_back(poly.front());
    out.push_back(std::move(poly));
  }
  return out;
}

double polyline_area(const Polyline& poly) {
  double twice = 0.0;
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) twice += poly[i].cross(poly[i + 1]);
  return 0.5 * twice;
}

int winding_number(const Polyline& poly, Vec2 p) {
  int w = 0;
  for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
    const Vec2 a = poly[i], b = poly[i + 1];
    if (a.y <= p.y) {
      if (b.y > p.y && orient(a, b, p) > 0) ++w;
    } else if (b.y <= p.y && orient(a, b, p) < 0) {
      --w;
    }
  }
  return w;
}

}  // namespace fractree
