#include "fractree/layers.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "fractree/checks.hpp"
#include "fractree/error.hpp"

namespace fractree {

std::string to_string(Scheme s) { return s == Scheme::Growth ? "growth" : "contract"; }

Scheme scheme_from_string(const std::string& s) {
  if (s == "growth") return Scheme::Growth;
  if (s == "contract") return Scheme::Contract;
  throw DomainError("scheme", "scheme must be 'growth' or 'contract', got '" + s + "'");
}

double default_lambda(double r, int depth, double plate_radius, double top_fill) {
  if (depth <= 0)
    throw DomainError("lambda", "the default inflation is undefined for depth 0; pass lambda explicitly");
  if (!(top_fill > 0.0 && top_fill <= 1.0)) throw DomainError("top_fill", "top_fill must lie in (0, 1]");
  const double target = top_fill * plate_radius;
  if (!(target >= r))
    throw DomainError("plate_radius", "top root disk would be smaller than r; enlarge the plate or top_fill");
  return std::pow(target / r, 1.0 / depth);
}

Disk plate_disk(double plate_radius) { return {{0.0, 0.0}, plate_radius, -1, -1}; }

LayerStack build_stack(const DiskSet& set, const StackOptions& opt) {
  if (!(opt.plate_radius > 0.0) || !std::isfinite(opt.plate_radius))
    throw DomainError("plate_radius", "plate radius must be positive");
  const ParamSet& prm = set.params;
  const int D = prm.depth;

  LayerStack stack;
  stack.scheme = opt.scheme;
  stack.plate_radius = opt.plate_radius;
  stack.params = prm;

  if (opt.scheme == Scheme::Contract) {
    if (opt.lambda) {
      if (!(*opt.lambda >= 1.0) || !std::isfinite(*opt.lambda))
        throw DomainError("lambda", "lambda must be at least 1");
      stack.lambda = *opt.lambda;
    } else {
      stack.lambda = default_lambda(prm.r, D, opt.plate_radius, opt.top_fill);
    }
  }

  stack.layers.resize(static_cast<std::size_t>(D) + 1);
  for (int i = 0; i <= D; ++i) {
    Layer& layer = stack.layers[i];
    layer.index = i;
    if (opt.scheme == Scheme::Growth) {
      for (const auto& d : set.disks)
        if (d.depth <= D - i) layer.cuts.push_back(d);
    } else {
      const double inflate = std::pow(stack.lambda, D - i);
      for (const auto& d : set.disks) {
        if (d.depth > i) continue;
        Disk c = d;
        if (i != D) c.radius = d.radius * inflate;
        layer.cuts.push_back(c);
      }
    }
  }
  return stack;
}

std::vector<VisibleRegion> visibility_regions(const LayerStack& stack, std::optional<long long> budget,
                                              std::uint64_t seed) {
  const Disk plate = plate_disk(stack.plate_radius);
  std::vector<VisibleRegion> out(stack.layers.size());
  for (std::size_t i = 0; i < stack.layers.size(); ++i) {
    VisibleRegion& v = out[i];
    v.layer = static_cast<int>(i);
    v.exclude = stack.layers[i].cuts;
    if (i == 0) {
      v.include.push_back({plate});
    } else if (stack.scheme == Scheme::Growth) {
      // Growth cut regions are nested, so the intersection above is K_{i-1}.
      v.include.push_back(stack.layers[i - 1].cuts);
      v.include_layers.push_back(static_cast<int>(i) - 1);
      v.include.push_back({plate});
    } else {
      // Smallest bounding box first: it becomes the sampling window.
      std::vector<int> order(i);
      for (std::size_t j = 0; j < i; ++j) order[j] = static_cast<int>(j);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return bounds(stack.layers[a].cuts).area() < bounds(stack.layers[b].cuts).area();
      });
      for (int j : order) {
        v.include.push_back(stack.layers[j].cuts);
        v.include_layers.push_back(j);
      }
      v.include.push_back({plate});
    }
    if (budget) v.area = region_area(v.include, v.exclude, *budget, seed ^ static_cast<std::uint64_t>(i));
  }
  return out;
}

std::vector<LayerMetrics> stack_metrics(LayerStack& stack, long long budget, std::uint64_t seed) {
  const double plate_area = kPi * stack.plate_radius * stack.plate_radius;
  const auto regions = visibility_regions(stack, std::nullopt);
  const Disk plate = plate_disk(stack.plate_radius);

  std::vector<std::future<LayerMetrics>> jobs;
  jobs.reserve(stack.layers.size());
  for (std::size_t i = 0; i < stack.layers.size(); ++i) {
    jobs.push_back(std::async(std::launch::async, [&, i] {
      const Layer& layer = stack.layers[i];
      const std::uint64_t layer_seed = seed ^ static_cast<std::uint64_t>(i);
      LayerMetrics m;
      m.cut_area = union_area(layer.cuts);
      const bool inside = std::all_of(layer.cuts.begin(), layer.cuts.end(), [&](const Disk& d) {
        return d.center.norm() + d.radius <= stack.plate_radius;
      });
      m.clipped_cut_area =
          inside ? m.cut_area : region_area({layer.cuts, {plate}}, {}, budget, layer_seed).area;
      const auto vis = region_area(regions[i].include, regions[i].exclude, budget, layer_seed);
      m.visible_area = vis.area;
      m.visible_error = vis.std_error;
      m.visible_fraction = vis.area / plate_area;
      const auto bridge = min_bridge_width(layer, stack.plate_radius);
      m.min_bridge = bridge.width;
      m.bridge_witness = bridge.witness;
      m.merged = bridge.merged;
      return m;
    }));
  }
  std::vector<LayerMetrics> rows;
  rows.reserve(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    rows.push_back(jobs[i].get());
    stack.layers[i].metrics = rows.back();
  }
  return rows;
}

double mean_visible_fraction(const std::vector<LayerMetrics>& rows, int first_layer) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t i = static_cast<std::size_t>(std::max(first_layer, 0)); i < rows.size(); ++i, ++n)
    sum += rows[i].visible_fraction;
  return n ? sum / n : 0.0;
}

}  // namespace fractree
