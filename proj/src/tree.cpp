#include "fractree/tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "fractree/error.hpp"

namespace fractree {

void ParamSet::validate() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(p) || !(p > 0.0 && p < 1.0)) throw DomainError("p", "p must lie in (0, 1)");
  if (!finite(theta) || !(theta > 0.0 && theta < 180.0))
    throw DomainError("theta", "theta must lie in (0, 180) degrees");
  if (!finite(q) || !(q > 0.0 && q < 1.0)) throw DomainError("q", "q must lie in (0, 1)");
  if (!finite(r) || !(r > 0.0)) throw DomainError("r", "r must be positive");
  if (!finite(root_edge_length) || !(root_edge_length > 0.0))
    throw DomainError("root_edge_length", "root_edge_length must be positive");
  if (!finite(orientation)) throw DomainError("orientation", "orientation must be finite");
  if (depth < 0) throw DomainError("depth", "depth must be non-negative");
  if (depth > max_depth)
    throw ResourceLimitError("depth", "depth " + std::to_string(depth) + " exceeds the cap of " +
                                          std::to_string(max_depth));
}

bool Embedding::adjacent(int a, int b) const {
  const auto& va = vertices.at(a);
  const auto& vb = vertices.at(b);
  return (va.parent && *va.parent == b) || (vb.parent && *vb.parent == a);
}

bool DiskSet::adjacent(int a, int b) const {
  if (a > b) std::swap(a, b);
  if (!parent.empty()) return parent[b] == a || parent[a] == b;
  return std::binary_search(adjacency.begin(), adjacency.end(), std::pair{a, b});
}

std::int64_t ring_count(int d) {
  if (d < 0) throw DomainError("d", "ring index must be non-negative");
  if (d == 0) return 1;
  if (d > 61) throw ResourceLimitError("d", "ring count overflows 64 bits");
  return std::int64_t{3} << (d - 1);
}

std::int64_t vertex_count(int depth) {
  if (depth < 0) throw DomainError("depth", "depth must be non-negative");
  if (depth == 0) return 1;
  return 3 * (std::int64_t{1} << depth) - 2;
}

Embedding build_embedding(const ParamSet& params) {
  params.validate();

  Embedding out;
  out.params = params;
  out.vertices.reserve(static_cast<std::size_t>(vertex_count(params.depth)));
  out.vertices.push_back(Vertex{0, 0, {0.0, 0.0}, std::nullopt, {0.0, 0.0}});
  if (params.depth == 0) return out;

  const double half_turn = deg_to_rad(params.theta) / 2.0;
  const double root_angle = deg_to_rad(params.orientation);

  auto add_child = [&](int parent, Vec2 dir, double length) {
    const auto& pv = out.vertices[parent];
    Vertex v;
    v.index = static_cast<int>(out.vertices.size());
    v.depth = pv.depth + 1;
    v.position = pv.position + dir * length;
    v.parent = parent;
    v.outward = dir;
    out.vertices.push_back(v);
    out.edges.push_back({parent, v.index});
  };

  for (int k = 0; k < 3; ++k) {
    const double a = root_angle + k * (kTwoPi / 3.0);
    add_child(0, {std::cos(a), std::sin(a)}, params.root_edge_length);
  }

  std::size_t ring_begin = 1;
  double length = params.root_edge_length;
  for (int d = 1; d < params.depth; ++d) {
    const std::size_t ring_end = out.vertices.size();
    length *= params.p;
    for (std::size_t i = ring_begin; i < ring_end; ++i) {
      const Vec2 u = out.vertices[i].outward;
      const double base = std::atan2(u.y, u.x);
      for (double s : {+1.0, -1.0}) {
        const double a = base + s * half_turn;
        add_child(static_cast<int>(i), {std::cos(a), std::sin(a)}, length);
      }
    }
    ring_begin = ring_end;
  }
  return out;
}

DiskSet assign_radii(const Embedding& embedding) {
  const auto& prm = embedding.params;
  DiskSet out;
  out.params = prm;
  out.disks.reserve(embedding.vertices.size());
  out.parent.assign(embedding.vertices.size(), -1);
  for (const auto& v : embedding.vertices) {
    out.disks.push_back({v.position, prm.r * std::pow(prm.q, v.depth), v.depth, v.index});
    if (v.parent) out.parent[v.index] = *v.parent;
  }
  out.adjacency.reserve(embedding.edges.size());
  for (const auto& e : embedding.edges) out.adjacency.emplace_back(std::min(e.parent, e.child), std::max(e.parent, e.child));
  std::sort(out.adjacency.begin(), out.adjacency.end());
  return out;
}

std::string serialize(const Embedding& embedding) {
  std::string bytes;
  auto put = [&bytes](const void* p, std::size_t n) { bytes.append(static_cast<const char*>(p), n); };
  for (const auto& v : embedding.vertices) {
    const int parent = v.parent.value_or(-1);
    put(&v.index, sizeof v.index);
    put(&v.depth, sizeof v.depth);
    put(&parent, sizeof parent);
    put(&v.position.x, sizeof(double));
    put(&v.position.y, sizeof(double));
    put(&v.outward.x, sizeof(double));
    put(&v.outward.y, sizeof(double));
  }
  return bytes;
}

}  // namespace fractree
