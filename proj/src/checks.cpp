#include "fractree/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <tuple>

#include "fractree/error.hpp"

namespace fractree {

void MaterialSpec::validate() const {
  auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(min_bridge_mm)) throw DomainError("material.min_bridge_mm", "minimum bridge width must be positive");
  if (!positive(kerf_mm)) throw DomainError("material.kerf_mm", "kerf must be positive");
  if (!positive(bed_diameter_mm)) throw DomainError("material.bed_diameter_mm", "bed diameter must be positive");
  if (!positive(scale_mm_per_unit)) throw DomainError("material.scale_mm_per_unit", "scale must be positive");
  if (!(kerf_mm < min_bridge_mm)) throw DomainError("material.kerf_mm", "kerf must be smaller than the minimum bridge");
}

Embedding skeleton(const DiskSet& set) {
  Embedding emb;
  emb.params = set.params;
  emb.vertices.reserve(set.disks.size());
  for (std::size_t i = 0; i < set.disks.size(); ++i) {
    Vertex v;
    v.index = static_cast<int>(i);
    v.depth = set.disks[i].depth;
    v.position = set.disks[i].center;
    emb.vertices.push_back(v);
  }
  for (const auto& [a, b] : set.adjacency) {
    const int parent = set.disks[a].depth <= set.disks[b].depth ? a : b;
    const int child = parent == a ? b : a;
    emb.vertices[child].parent = parent;
    emb.edges.push_back({parent, child});
  }
  return emb;
}

EmbeddingCheck check_embedding(const DiskSet& disks, double margin, const EmbeddingCheckOptions& options) {
  if (std::isnan(margin) || margin < 0.0) throw DomainError("margin", "margin must be non-negative");
  EmbeddingCheck out;
  out.margin = margin;
  bool ok = true;
  if (options.use_clearance) {
    out.clearance = min_clearance(disks);
    ok = ok && out.clearance.gap >= margin - kTangentTol;
  }
  if (options.use_crossings) {
    out.crossings = edge_crossings(skeleton(disks));
    ok = ok && out.crossings.empty();
  }
  out.pass = ok;
  return out;
}

std::string to_string(BridgeKind k) {
  switch (k) {
    case BridgeKind::Pair: return "pair";
    case BridgeKind::Rim: return "rim";
    default: return "none";
  }
}

namespace {

// True when no boundary other than disks a and b lies within `half` of m.
bool corridor_clear(const Layer& layer, const GridIndex& grid, double plate_radius, Vec2 m, double half, int a,
                    int b) {
  const double slack = half * (1.0 - 1e-9) - 1e-12;
  if (plate_radius - m.norm() < slack) return false;
  const Box probe{{m.x - half, m.y - half}, {m.x + half, m.y + half}};
  for (int c : grid.query(probe)) {
    if (c == a || c == b) continue;
    if (distance(m, layer.cuts[c].center) - layer.cuts[c].radius < slack) return false;
  }
  return true;
}

// Pairs with gap in (0, reach] whose corridor is clear.
std::vector<Bridge> bridges_within(const Layer& layer, const GridIndex& grid, double plate_radius, double reach) {
  std::vector<Bridge> out;
  const auto& cuts = layer.cuts;
  for (int a = 0; a < static_cast<int>(cuts.size()); ++a) {
    for (int b : grid.query(bounds(cuts[a]).inflated(reach))) {
      if (b <= a) continue;
      const double g = disk_gap(cuts[a], cuts[b]);
      if (!(g > 0.0) || g > reach) continue;
      const Vec2 delta = cuts[b].center - cuts[a].center;
      const Vec2 u = delta * (1.0 / delta.norm());
      const Vec2 m = cuts[a].center + u * (cuts[a].radius + 0.5 * g);
      if (!(m.norm() < plate_radius)) continue;
      if (!corridor_clear(layer, grid, plate_radius, m, 0.5 * g, a, b)) continue;
      out.push_back({g, m, BridgeKind::Pair, a, b});
    }
  }
  std::sort(out.begin(), out.end(), [](const Bridge& x, const Bridge& y) {
    return std::tie(x.width, x.disk_a, x.disk_b) < std::tie(y.width, y.disk_a, y.disk_b);
  });
  return out;
}

}  // namespace

std::vector<Bridge> pair_bridges(const Layer& layer, double plate_radius) {
  if (layer.cuts.empty()) return {};
  const GridIndex grid(layer.cuts);
  return bridges_within(layer, grid, plate_radius, 4.0 * plate_radius + 1.0);
}

Bridge rim_bridge(const Layer& layer, double plate_radius) {
  Bridge best;
  best.width = std::numeric_limits<double>::infinity();
  if (layer.cuts.empty()) return best;
  const GridIndex grid(layer.cuts);
  for (int a = 0; a < static_cast<int>(layer.cuts.size()); ++a) {
    const Disk& d = layer.cuts[a];
    const double dist = d.center.norm();
    const double rim = plate_radius - dist - d.radius;
    if (!(rim > 0.0) || rim >= best.width) continue;
    // A centred disk has a rim neck in every direction; try north first.
    std::vector<Vec2> dirs;
    if (dist > 1e-12 * plate_radius) {
      dirs.push_back(d.center * (1.0 / dist));
    } else {
      for (int k = 0; k < 360; ++k) dirs.push_back(polar(1.0, deg_to_rad(90.0 + k)));
    }
    for (Vec2 u : dirs) {
      const Vec2 m = u * (dist + d.radius + 0.5 * rim);
      // The rim and disk a are the two features; any other disk must keep clear.
      bool clear = true;
      const double half = 0.5 * rim;
      const double slack = half * (1.0 - 1e-9) - 1e-12;
      for (int o : grid.query({{m.x - half, m.y - half}, {m.x + half, m.y + half}})) {
        if (o == a) continue;
        if (distance(m, layer.cuts[o].center) - layer.cuts[o].radius < slack) {
          clear = false;
          break;
        }
      }
      if (clear) {
        best = {rim, m, BridgeKind::Rim, a, -1};
        break;
      }
    }
  }
  return best;
}

BridgeReport min_bridge_width(const Layer& layer, double plate_radius) {
  if (layer.cuts.empty()) throw EmptyInputError("min_bridge_width needs a non-empty layer");
  BridgeReport out;
  for (const auto& d : layer.cuts)
    if (d.center.norm() + d.radius >= plate_radius) out.touches_rim = true;

  const Bridge rim = rim_bridge(layer, plate_radius);
  const GridIndex grid(layer.cuts);
  double max_radius = 0.0;
  for (const auto& d : layer.cuts) max_radius = std::max(max_radius, d.radius);
  const double limit = 2.0 * (plate_radius + max_radius);

  // Widen the search reach until the best candidate lies inside it.
  Bridge best = rim;
  for (double reach = grid.cell_size();; reach *= 2.0) {
    const auto pairs = bridges_within(layer, grid, plate_radius, std::min(reach, limit));
    if (!pairs.empty() && pairs.front().width < best.width) best = pairs.front();
    if (best.width <= reach || reach >= limit) break;
  }

  if (!std::isfinite(best.width)) {
    out.width = 0.0;
    out.merged = true;
    return out;
  }
  out.width = best.width;
  out.witness = best.witness;
  out.kind = best.kind;
  out.disk_a = best.disk_a;
  out.disk_b = best.disk_b;
  return out;
}

FitReport check_fit(const LayerStack& stack, const MaterialSpec& material) {
  material.validate();
  FitReport out;
  out.max_extent_mm = 2.0 * stack.plate_radius * material.scale_mm_per_unit;
  out.extent_ok = out.max_extent_mm <= material.bed_diameter_mm;
  bool bridges_ok = true;
  for (const auto& layer : stack.layers) {
    const double w = layer.metrics ? layer.metrics->min_bridge : min_bridge_width(layer, stack.plate_radius).width;
    const double mm = w * material.scale_mm_per_unit;
    out.layer_bridge_mm.push_back(mm);
    if (mm < out.thinnest_bridge_mm) {
      out.thinnest_bridge_mm = mm;
      out.thinnest_layer = layer.index;
    }
    if (mm < material.min_bridge_mm) bridges_ok = false;
  }
  out.pass = out.extent_ok && bridges_ok;
  return out;
}

ConstraintReport validate(const LayerStack& stack, const DiskSet& disks, const MaterialSpec& material, double margin) {
  ConstraintReport rep;
  char buf[256];
  bool ok = true;

  try {
    rep.embedding = check_embedding(disks, margin);
    if (!rep.embedding.pass) {
      ok = false;
      if (rep.embedding.clearance.gap < margin - kTangentTol) {
        std::snprintf(buf, sizeof buf, "embedding: clearance %.6g below margin %.6g between vertices %d and %d",
                      rep.embedding.clearance.gap, margin, rep.embedding.clearance.vertex_a,
                      rep.embedding.clearance.vertex_b);
        rep.messages.emplace_back(buf);
      }
      if (!rep.embedding.crossings.empty()) {
        std::snprintf(buf, sizeof buf, "embedding: %zu edge crossing(s)", rep.embedding.crossings.size());
        rep.messages.emplace_back(buf);
      }
    }
  } catch (const std::exception& e) {
    ok = false;
    rep.messages.push_back(std::string("embedding: ") + e.what());
  }

  for (const auto& d : disks.disks) {
    if (!(d.center.norm() < stack.plate_radius)) rep.outside_plate.push_back(d.vertex);
  }
  if (!rep.outside_plate.empty()) {
    ok = false;
    std::snprintf(buf, sizeof buf, "plate: %zu vertex center(s) outside the plate, first is vertex %d",
                  rep.outside_plate.size(), rep.outside_plate.front());
    rep.messages.emplace_back(buf);
  }

  try {
    material.validate();
  } catch (const std::exception& e) {
    rep.messages.push_back(std::string("material: ") + e.what());
    rep.pass = false;
    return rep;
  }

  rep.fit.max_extent_mm = 2.0 * stack.plate_radius * material.scale_mm_per_unit;
  rep.fit.extent_ok = rep.fit.max_extent_mm <= material.bed_diameter_mm;
  if (!rep.fit.extent_ok) {
    ok = false;
    std::snprintf(buf, sizeof buf, "fit: plate extent %.6g mm exceeds bed %.6g mm", rep.fit.max_extent_mm,
                  material.bed_diameter_mm);
    rep.messages.emplace_back(buf);
  }

  bool bridges_ok = true;
  for (const auto& layer : stack.layers) {
    LayerCheck lc;
    lc.index = layer.index;
    try {
      lc.bridge = min_bridge_width(layer, stack.plate_radius);
      lc.rim = rim_bridge(layer, stack.plate_radius);
      lc.bridge_mm = lc.bridge.width * material.scale_mm_per_unit;
      lc.pass = lc.bridge_mm >= material.min_bridge_mm;
      if (!lc.pass) {
        std::snprintf(buf, sizeof buf, "layer %d: thinnest bridge %.4g mm (%s) below %.4g mm at (%.4f, %.4f)%s",
                      layer.index, lc.bridge_mm, to_string(lc.bridge.kind).c_str(), material.min_bridge_mm,
                      lc.bridge.witness.x * material.scale_mm_per_unit,
                      lc.bridge.witness.y * material.scale_mm_per_unit, lc.bridge.merged ? " [merged]" : "");
        rep.messages.emplace_back(buf);
      }
      if (lc.bridge.touches_rim) {
        std::snprintf(buf, sizeof buf, "layer %d: a cut reaches the plate edge", layer.index);
        rep.messages.emplace_back(buf);
      }
    } catch (const std::exception& e) {
      lc.pass = false;
      rep.messages.push_back("layer " + std::to_string(layer.index) + ": " + e.what());
    }
    rep.fit.layer_bridge_mm.push_back(lc.bridge_mm);
    if (lc.bridge_mm < rep.fit.thinnest_bridge_mm) {
      rep.fit.thinnest_bridge_mm = lc.bridge_mm;
      rep.fit.thinnest_layer = lc.index;
    }
    bridges_ok = bridges_ok && lc.pass;
    rep.layers.push_back(lc);
  }
  rep.fit.pass = rep.fit.extent_ok && bridges_ok;
  rep.pass = ok && bridges_ok;
  return rep;
}

}  // namespace fractree
