#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fractree/tree.hpp"
#include "fractree/vec2.hpp"

namespace fractree {

// Tolerances shared by the disk-union code. Gaps within kTangentTol are
// treated as tangency; angular intervals closer than kAngleTol are merged.
inline constexpr double kTangentTol = 1e-9;
inline constexpr double kAngleTol = 1e-9;

struct Box {
  Vec2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  Vec2 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};

  bool empty() const { return !(lo.x <= hi.x && lo.y <= hi.y); }
  double area() const { return empty() ? 0.0 : (hi.x - lo.x) * (hi.y - lo.y); }
  void expand(const Box& o);
  Box inflated(double by) const { return {{lo.x - by, lo.y - by}, {hi.x + by, hi.y + by}}; }
};

Box bounds(const Disk& d);
Box bounds(std::span<const Disk> disks);

// Uniform grid over disk bounding boxes. Each disk is registered in every
// cell its bounding box touches.
class GridIndex {
 public:
  // cell_size <= 0 selects the maximum disk diameter in the set.
  explicit GridIndex(std::span<const Disk> disks, double cell_size = 0.0);

  double cell_size() const { return cell_; }
  std::size_t size() const { return count_; }

  // Sorted, de-duplicated indices of disks whose cells overlap `box`.
  std::vector<int> query(const Box& box) const;

  // Indices registered in the cell containing `p` (unsorted).
  const std::vector<int>* cell_at(Vec2 p) const;

  long long cells_spanned(const Box& box) const;

 private:
  std::int64_t key(long long ix, long long iy) const;
  long long coord(double v) const;

  double cell_ = 1.0;
  std::size_t count_ = 0;
  std::unordered_map<std::int64_t, std::vector<int>> cells_;
};

// Fast "inside any disk" tests for a fixed disk set.
class UnionMembership {
 public:
  explicit UnionMembership(std::vector<Disk> disks);

  bool contains(Vec2 p) const;
  const Box& box() const { return box_; }
  const std::vector<Disk>& disks() const { return disks_; }

 private:
  std::vector<Disk> disks_;
  Box box_;
  GridIndex grid_;
};

// |c_a - c_b| - r_a - r_b; negative means overlap.
double disk_gap(const Disk& a, const Disk& b);

struct ClearanceReport {
  double gap = std::numeric_limits<double>::infinity();
  int vertex_a = -1;  // witness pair, vertex_a < vertex_b
  int vertex_b = -1;
  long long pairs_examined = 0;

  bool has_witness() const { return vertex_a >= 0; }
};

// Minimum gap over disk pairs that are not tree-adjacent. Ties resolve to
// the lowest (vertex, vertex) pair.
ClearanceReport min_clearance(const DiskSet& disks);

// Index pairs (i < j) of edges that share no endpoint and whose closed
// segments intersect, sorted.
std::vector<std::pair<int, int>> edge_crossings(const Embedding& embedding);

// True when any pair of non-adjacent edges intersects; stops at the first hit.
bool has_edge_crossing(const Embedding& embedding);

// Circular arc traversed from `start` to `end` (radians). For ccw arcs
// end > start; the extent never exceeds 2*pi.
struct Arc {
  int disk = 0;
  Vec2 center;
  double radius = 0.0;
  double start = 0.0;
  double end = 0.0;
  bool ccw = true;

  double extent() const { return ccw ? end - start : start - end; }
  Vec2 point_at(double angle) const { return center + polar(radius, angle); }
  Vec2 start_point() const { return point_at(start); }
  Vec2 end_point() const { return point_at(end); }
};

struct ArcLoop {
  std::vector<Arc> arcs;
  bool closed = false;
};

// Boundary of the union of disks as closed arc loops: outer boundaries run
// counterclockwise, hole boundaries clockwise.
std::vector<ArcLoop> union_boundary(std::span<const Disk> disks);

// Signed area enclosed by the loops (Green's theorem over each arc).
double loops_area(std::span<const ArcLoop> loops);

// Winding number of the loops around `p` (arcs evaluated exactly).
int loops_winding(std::span<const ArcLoop> loops, Vec2 p);

double union_area(std::span<const Disk> disks);

struct AreaEstimate {
  double area = 0.0;
  double std_error = 0.0;
};

inline constexpr long long kMinSampleBudget = 10'000;

// Stratified estimate of area((intersection of include unions) minus
// (union of exclude)), sampled over the bounding box of include.front().
AreaEstimate region_area(const std::vector<std::vector<Disk>>& include, const std::vector<Disk>& exclude,
                         long long budget, std::uint64_t seed = 0x5eed);

using Polyline = std::vector<Vec2>;

// Chord approximation with sagitta <= tolerance and at least 8 segments per
// full turn. Every polyline is closed: back() == front().
std::vector<Polyline> polygonize(std::span<const ArcLoop> loops, double tolerance);

// Signed area of a closed polyline (shoelace).
double polyline_area(const Polyline& poly);

int winding_number(const Polyline& poly, Vec2 p);

}  // namespace fractree
