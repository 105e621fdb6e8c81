#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "fractree/geom.hpp"
#include "fractree/layers.hpp"
#include "fractree/tree.hpp"

namespace fractree {

// Shop parameters; not properties of the design itself.
struct MaterialSpec {
  double min_bridge_mm = 1.5;
  double kerf_mm = 0.2;
  double bed_diameter_mm = 305.0;
  double scale_mm_per_unit = 50.0;

  void validate() const;
};

// Default embedding clearance margin as a fraction of the root edge length.
inline constexpr double kDefaultMarginFraction = 0.02;

struct EmbeddingCheckOptions {
  bool use_clearance = true;
  bool use_crossings = true;
};

struct EmbeddingCheck {
  bool pass = false;
  double margin = 0.0;
  ClearanceReport clearance;
  std::vector<std::pair<int, int>> crossings;
};

// Rebuilds the tree skeleton (positions and edges) carried by a disk set.
Embedding skeleton(const DiskSet& disks);

// pass <=> clearance >= margin and no edge crossings (each part toggleable).
EmbeddingCheck check_embedding(const DiskSet& disks, double margin, const EmbeddingCheckOptions& options = {});

enum class BridgeKind { None, Pair, Rim };

std::string to_string(BridgeKind k);

struct Bridge {
  double width = 0.0;
  Vec2 witness;
  BridgeKind kind = BridgeKind::None;
  int disk_a = -1;  // indices into layer.cuts; disk_b is -1 for rim bridges
  int disk_b = -1;
};

struct BridgeReport {
  double width = 0.0;
  Vec2 witness;
  BridgeKind kind = BridgeKind::None;
  int disk_a = -1;
  int disk_b = -1;
  bool merged = false;       // no positive candidate width exists
  bool touches_rim = false;  // some cut disk reaches the plate edge
};

// Solid necks between two cut disks: pairs with positive gap whose gap
// midpoint has no other hole boundary (disk or plate edge) closer than half
// the gap. Sorted by (width, disk_a, disk_b).
std::vector<Bridge> pair_bridges(const Layer& layer, double plate_radius);

// Thinnest rim neck (plate edge to a cut disk) with a clear midpoint.
Bridge rim_bridge(const Layer& layer, double plate_radius);

// min over pair necks and rim necks. Width 0 with `merged` set when no
// positive candidate exists.
BridgeReport min_bridge_width(const Layer& layer, double plate_radius);

struct FitReport {
  bool pass = false;
  bool extent_ok = false;
  double max_extent_mm = 0.0;
  std::vector<double> layer_bridge_mm;
  int thinnest_layer = -1;
  double thinnest_bridge_mm = std::numeric_limits<double>::infinity();
};

FitReport check_fit(const LayerStack& stack, const MaterialSpec& material);

struct LayerCheck {
  int index = 0;
  BridgeReport bridge;
  Bridge rim;
  double bridge_mm = 0.0;
  bool pass = false;
};

struct ConstraintReport {
  std::vector<LayerCheck> layers;
  EmbeddingCheck embedding;
  FitReport fit;
  std::vector<int> outside_plate;  // vertices whose centers are not strictly inside the plate
  bool pass = false;
  std::vector<std::string> messages;
};

ConstraintReport validate(const LayerStack& stack, const DiskSet& disks, const MaterialSpec& material,
                          double margin);

}  // namespace fractree
