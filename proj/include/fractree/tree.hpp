#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fractree/vec2.hpp"

namespace fractree {

inline constexpr int kDefaultMaxDepth = 14;

// Design parameters of the self-similar embedding and its disk thickening.
// Angles are degrees at this interface.
struct ParamSet {
  double p = 0.61;                 // edge-length ratio between generations
  double theta = 120.0;            // angle between sibling edges
  double q = 0.61;                 // disk radius ratio between generations
  double r = 0.9;                  // root disk radius (model units)
  int depth = 6;                   // truncation depth D
  double root_edge_length = 1.0;
  double orientation = 90.0;       // direction of the first root edge
  int max_depth = kDefaultMaxDepth;

  // Throws DomainError / ResourceLimitError naming the offending field.
  void validate() const;

  bool operator==(const ParamSet&) const = default;
};

struct Vertex {
  int index = 0;
  int depth = 0;
  Vec2 position;
  std::optional<int> parent;
  Vec2 outward;  // unit direction of the edge from the parent; zero for the root
};

struct Edge {
  int parent = 0;
  int child = 0;
};

struct Embedding {
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  ParamSet params;

  bool adjacent(int a, int b) const;
};

struct Disk {
  Vec2 center;
  double radius = 0.0;
  int depth = 0;
  int vertex = 0;

  bool operator==(const Disk&) const = default;
};

struct DiskSet {
  std::vector<Disk> disks;
  // Tree-adjacent disk index pairs, lower index first.
  std::vector<std::pair<int, int>> adjacency;
  ParamSet params;

  // Parent disk index per disk (-1 for none). Filled by assign_radii; sets
  // built by hand may leave it empty and rely on `adjacency` alone.
  std::vector<int> parent;

  bool adjacent(int a, int b) const;
};

// Number of vertices at tree distance d from the root.
std::int64_t ring_count(int d);

// Total vertex count of the depth-D truncation.
std::int64_t vertex_count(int depth);

// Breadth-first construction; children of each vertex are emitted with the
// +theta/2 branch first.
Embedding build_embedding(const ParamSet& params);

// One disk per vertex with radius r * q^depth.
DiskSet assign_radii(const Embedding& embedding);

// Byte serialization of vertex data, used to pin determinism.
std::string serialize(const Embedding& embedding);

}  // namespace fractree
