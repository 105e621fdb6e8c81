#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fractree/geom.hpp"
#include "fractree/tree.hpp"

namespace fractree {

// GROWTH: layer i cuts the final-radius disks of depth <= D - i (deepest
// iteration on top). CONTRACT: layer i cuts depths <= i with radii inflated
// by lambda^(D - i), shrinking to the final radii at the bottom.
enum class Scheme { Growth, Contract };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct LayerMetrics {
  double cut_area = 0.0;          // exact area of the unclipped cut union
  double clipped_cut_area = 0.0;  // cut area inside the plate
  double visible_area = 0.0;
  double visible_error = 0.0;     // standard error of visible_area
  double visible_fraction = 0.0;  // visible_area / plate area
  double min_bridge = 0.0;        // model units
  Vec2 bridge_witness;
  bool merged = false;
};

struct Layer {
  int index = 0;
  std::vector<Disk> cuts;
  std::optional<LayerMetrics> metrics;
};

struct LayerStack {
  Scheme scheme = Scheme::Contract;
  std::vector<Layer> layers;  // index 0 is the physical top
  double plate_radius = 0.0;
  double lambda = 1.0;
  ParamSet params;
};

struct StackOptions {
  Scheme scheme = Scheme::Contract;
  double plate_radius = 3.0;
  std::optional<double> lambda;
  // Default CONTRACT inflation puts the top root disk at top_fill * plate
  // radius, leaving a solid rim on the top layer.
  double top_fill = 0.9;
};

// Inflation that maps the root disk r onto top_fill * plate_radius over D layers.
double default_lambda(double r, int depth, double plate_radius, double top_fill);

LayerStack build_stack(const DiskSet& disks, const StackOptions& options);

// Constructive description of what layer i shows through the layers above:
// (intersection of include unions) minus exclude.
struct VisibleRegion {
  int layer = 0;
  std::vector<std::vector<Disk>> include;
  std::vector<Disk> exclude;
  // Indices of the layers whose cut regions appear in `include`.
  std::vector<int> include_layers;
  std::optional<AreaEstimate> area;
};

Disk plate_disk(double plate_radius);

// Region descriptors only; pass a budget to also estimate their areas.
std::vector<VisibleRegion> visibility_regions(const LayerStack& stack, std::optional<long long> budget = {},
                                              std::uint64_t seed = 0x5eed);

inline constexpr long long kDefaultMetricBudget = 200'000;

// Fills and returns per-layer metrics. Layer i is sampled with seed ^ i.
std::vector<LayerMetrics> stack_metrics(LayerStack& stack, long long budget = kDefaultMetricBudget,
                                        std::uint64_t seed = 0x5eed);

double mean_visible_fraction(const std::vector<LayerMetrics>& rows, int first_layer = 1);

}  // namespace fractree
