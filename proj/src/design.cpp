#include "fractree/design.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>

#include "fractree/error.hpp"
#include "fractree/export.hpp"

namespace fractree {

using nlohmann::json;

double DesignRequest::resolved_margin() const {
  return margin ? *margin : kDefaultMarginFraction * params.root_edge_length;
}

double default_radius(const ParamSet& params, double margin) {
  ParamSet prm = params;
  prm.depth = std::max(params.depth, 1);
  prm.r = 1.0;
  const double r = maximize_radius(build_embedding(prm), prm.q, margin).r;
  return r > 0.0 ? r : ParamSet{}.r;
}

Design prepare_design(const DesignRequest& req) {
  Design d;
  d.request = req;
  d.margin = req.resolved_margin();
  if (std::isnan(d.margin) || d.margin < 0.0) throw DomainError("margin", "margin must be non-negative");
  if (!(req.plate_radius > 0.0) || !std::isfinite(req.plate_radius))
    throw DomainError("plate_radius", "plate radius must be positive");
  if (!(req.plate_diameter_mm > 0.0) || !std::isfinite(req.plate_diameter_mm))
    throw DomainError("plate_diameter_mm", "plate diameter must be positive");
  if (!(req.chord_tolerance_mm > 0.0)) throw DomainError("chord_tolerance_mm", "chord tolerance must be positive");
  if (req.budget < kMinSampleBudget)
    throw DomainError("budget", "sample budget must be at least " + std::to_string(kMinSampleBudget));

  d.params = req.params;
  // Request fields nest the tree parameters under "params".
  try {
    ParamSet probe = req.params;
    if (req.r) probe.r = *req.r;
    probe.validate();
    d.params.r = req.r ? *req.r : default_radius(req.params, d.margin);
    d.params.validate();
  } catch (const DomainError& e) {
    throw DomainError("params." + e.field(), e.what());
  }

  d.material = req.material;
  d.material.scale_mm_per_unit = req.scale();
  d.material.validate();

  d.embedding = build_embedding(d.params);
  d.disks = assign_radii(d.embedding);
  StackOptions so;
  so.scheme = req.scheme;
  so.plate_radius = req.plate_radius;
  so.lambda = req.lambda;
  so.top_fill = req.top_fill;
  d.stack = build_stack(d.disks, so);
  return d;
}

Design run_design(const DesignRequest& req) {
  Design d = prepare_design(req);
  d.metrics = stack_metrics(d.stack, req.budget, req.seed);
  d.report = validate(d.stack, d.disks, d.material, d.margin);
  if (req.critical_p_hint) {
    CriticalPOptions o;
    o.theta = d.params.theta;
    o.q = d.params.q;
    o.r = d.params.r;
    o.depth = std::min(d.params.depth + 4, 12);
    o.margin = d.margin;
    o.checks.use_clearance = false;
    o.root_edge_length = d.params.root_edge_length;
    o.orientation = d.params.orientation;
    try {
      d.critical_p = critical_p(o);
    } catch (const BracketError&) {
      // Shallow trees never self-intersect; no hint.
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

const json* member(const json& obj, const char* key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

[[noreturn]] void type_error(const std::string& field, const char* want) {
  throw Error("invalid_type", "field '" + field + "' must be " + want, field);
}

void read_number(const json& obj, const char* key, const std::string& path, double& out) {
  if (const json* v = member(obj, key)) {
    if (!v->is_number()) type_error(path, "a number");
    out = v->get<double>();
  }
}

void read_optional(const json& obj, const char* key, const std::string& path, std::optional<double>& out) {
  if (const json* v = member(obj, key)) {
    if (!v->is_number()) type_error(path, "a number");
    out = v->get<double>();
  }
}

void read_int(const json& obj, const char* key, const std::string& path, long long& out) {
  if (const json* v = member(obj, key)) {
    if (v->is_number_integer()) {
      out = v->get<long long>();
    } else if (v->is_number_float() && std::floor(v->get<double>()) == v->get<double>() &&
               std::abs(v->get<double>()) < 9e15) {
      out = static_cast<long long>(v->get<double>());
    } else {
      type_error(path, "an integer");
    }
  }
}

}  // namespace

DesignRequest request_from_json(const json& j, const RequestCaps* caps) {
  if (!j.is_object()) type_error("", "a JSON object");
  DesignRequest req;

  if (const json* p = member(j, "params")) {
    if (!p->is_object()) type_error("params", "an object");
    auto& prm = req.params;
    read_number(*p, "p", "params.p", prm.p);
    read_number(*p, "theta", "params.theta", prm.theta);
    read_number(*p, "q", "params.q", prm.q);
    read_optional(*p, "r", "params.r", req.r);
    long long depth = prm.depth;
    read_int(*p, "depth", "params.depth", depth);
    if (depth < 0) throw DomainError("params.depth", "depth must be non-negative");
    if (depth > kDefaultMaxDepth) throw ResourceLimitError("params.depth", "depth exceeds the cap");
    prm.depth = static_cast<int>(depth);
    read_number(*p, "root_edge_length", "params.root_edge_length", prm.root_edge_length);
    read_number(*p, "orientation", "params.orientation", prm.orientation);
  }
  if (const json* s = member(j, "scheme")) {
    if (!s->is_string()) type_error("scheme", "a string");
    try {
      req.scheme = scheme_from_string(s->get<std::string>());
    } catch (const DomainError& e) {
      throw DomainError("scheme", e.what());
    }
  }
  read_optional(j, "lambda", "lambda", req.lambda);
  read_number(j, "top_fill", "top_fill", req.top_fill);
  read_number(j, "plate_radius", "plate_radius", req.plate_radius);
  read_number(j, "plate_diameter_mm", "plate_diameter_mm", req.plate_diameter_mm);
  if (const json* m = member(j, "material")) {
    if (!m->is_object()) type_error("material", "an object");
    read_number(*m, "min_bridge_mm", "material.min_bridge_mm", req.material.min_bridge_mm);
    read_number(*m, "kerf_mm", "material.kerf_mm", req.material.kerf_mm);
    read_number(*m, "bed_diameter_mm", "material.bed_diameter_mm", req.material.bed_diameter_mm);
  }
  read_optional(j, "margin", "margin", req.margin);
  long long seed = static_cast<long long>(req.seed);
  read_int(j, "seed", "seed", seed);
  if (seed < 0) throw DomainError("seed", "seed must be non-negative");
  req.seed = static_cast<std::uint64_t>(seed);
  read_int(j, "budget", "budget", req.budget);
  read_number(j, "chord_tolerance_mm", "chord_tolerance_mm", req.chord_tolerance_mm);
  if (const json* c = member(j, "critical_p_hint")) {
    if (!c->is_boolean()) type_error("critical_p_hint", "a boolean");
    req.critical_p_hint = c->get<bool>();
  }

  if (caps) {
    if (req.params.depth > caps->max_depth)
      throw ResourceLimitError("params.depth", "depth is capped at " + std::to_string(caps->max_depth) + " here");
    if (req.budget > caps->max_budget)
      throw ResourceLimitError("budget", "sample budget is capped at " + std::to_string(caps->max_budget));
  }
  return req;
}

json request_to_json(const DesignRequest& req) {
  json j;
  j["params"] = {{"p", req.params.p},
                 {"theta", req.params.theta},
                 {"q", req.params.q},
                 {"r", req.r ? json(*req.r) : json(nullptr)},
                 {"depth", req.params.depth},
                 {"root_edge_length", req.params.root_edge_length},
                 {"orientation", req.params.orientation}};
  j["scheme"] = to_string(req.scheme);
  j["lambda"] = req.lambda ? json(*req.lambda) : json(nullptr);
  j["top_fill"] = req.top_fill;
  j["plate_radius"] = req.plate_radius;
  j["plate_diameter_mm"] = req.plate_diameter_mm;
  j["material"] = {{"min_bridge_mm", req.material.min_bridge_mm},
                   {"kerf_mm", req.material.kerf_mm},
                   {"bed_diameter_mm", req.material.bed_diameter_mm}};
  j["margin"] = req.margin ? json(*req.margin) : json(nullptr);
  j["seed"] = req.seed;
  j["budget"] = req.budget;
  j["chord_tolerance_mm"] = req.chord_tolerance_mm;
  j["critical_p_hint"] = req.critical_p_hint;
  return j;
}

DesignRequest request_from_query(const std::multimap<std::string, std::string>& query, const RequestCaps* caps) {
  static const std::vector<std::string> param_keys = {"p", "theta", "q", "r", "depth", "root_edge_length",
                                                      "orientation"};
  static const std::vector<std::string> material_keys = {"min_bridge_mm", "kerf_mm", "bed_diameter_mm"};
  json j = json::object();
  for (const auto& [key, value] : query) {
    json v;
    if (key == "scheme") {
      v = value;
    } else if (key == "critical_p_hint") {
      v = value == "1" || value == "true";
    } else {
      char* end = nullptr;
      const double num = std::strtod(value.c_str(), &end);
      if (value.empty() || end != value.c_str() + value.size()) type_error(key, "a number");
      v = (std::floor(num) == num && std::abs(num) < 9e15) ? json(static_cast<long long>(num)) : json(num);
    }
    if (std::find(param_keys.begin(), param_keys.end(), key) != param_keys.end()) {
      j["params"][key] = v;
    } else if (std::find(material_keys.begin(), material_keys.end(), key) != material_keys.end()) {
      j["material"][key] = v;
    } else {
      j[key] = v;
    }
  }
  return request_from_json(j, caps);
}

json canonical_numbers(const json& j) {
  if (j.is_object()) {
    json out = json::object();
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = canonical_numbers(it.value());
    return out;
  }
  if (j.is_array()) {
    json out = json::array();
    for (const auto& v : j) out.push_back(canonical_numbers(v));
    return out;
  }
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (!std::isfinite(v)) return nullptr;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    double rounded = std::strtod(buf, nullptr);
    if (rounded == 0.0) rounded = 0.0;  // drop negative zero
    return rounded;
  }
  return j;
}

namespace {

json point_mm(Vec2 p, double scale) { return json::array({p.x * scale, p.y * scale}); }

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json layer_records(const Design& d) {
  const double s = d.material.scale_mm_per_unit;
  json rows = json::array();
  for (std::size_t i = 0; i < d.stack.layers.size(); ++i) {
    const auto& layer = d.stack.layers[i];
    json row;
    row["index"] = layer.index;
    row["disk_count"] = layer.cuts.size();
    if (i < d.metrics.size()) {
      const auto& m = d.metrics[i];
      row["cut_area_mm2"] = m.cut_area * s * s;
      row["clipped_cut_area_mm2"] = m.clipped_cut_area * s * s;
      row["visible_area_mm2"] = m.visible_area * s * s;
      row["visible_area_stderr_mm2"] = m.visible_error * s * s;
      row["visible_fraction"] = m.visible_fraction;
      row["min_bridge_width_mm"] = m.min_bridge * s;
      row["bridge_witness_mm"] = point_mm(m.bridge_witness, s);
      row["merged"] = m.merged;
    }
    rows.push_back(row);
  }
  return rows;
}

json report_json(const Design& d) {
  const auto& rep = d.report;
  const double s = d.material.scale_mm_per_unit;
  json j;
  j["pass"] = rep.pass;
  j["messages"] = rep.messages;
  const auto& c = rep.embedding.clearance;
  j["embedding"] = {{"pass", rep.embedding.pass},
                    {"margin", rep.embedding.margin},
                    {"clearance", finite_or_null(c.gap)},
                    {"witness", c.has_witness() ? json::array({c.vertex_a, c.vertex_b}) : json(nullptr)},
                    {"edge_crossings", rep.embedding.crossings.size()}};
  j["outside_plate"] = rep.outside_plate.size();
  j["fit"] = {{"max_extent_mm", rep.fit.max_extent_mm},
              {"extent_ok", rep.fit.extent_ok},
              {"pass", rep.fit.pass},
              {"thinnest_layer", rep.fit.thinnest_layer},
              {"thinnest_bridge_mm", finite_or_null(rep.fit.thinnest_bridge_mm)}};
  json layers = json::array();
  for (const auto& lc : rep.layers) {
    layers.push_back({{"index", lc.index},
                      {"pass", lc.pass},
                      {"bridge_mm", lc.bridge_mm},
                      {"bridge_kind", to_string(lc.bridge.kind)},
                      {"bridge_witness_mm", point_mm(lc.bridge.witness, s)},
                      {"merged", lc.bridge.merged},
                      {"touches_rim", lc.bridge.touches_rim},
                      {"rim_mm", finite_or_null(lc.rim.width * s)},
                      {"rim_witness_mm", std::isfinite(lc.rim.width) ? point_mm(lc.rim.witness, s) : json(nullptr)}});
  }
  j["layers"] = layers;
  return j;
}

json evaluate_json(const Design& d) {
  json j;
  j["params"] = {{"p", d.params.p},         {"theta", d.params.theta},
                 {"q", d.params.q},         {"r", d.params.r},
                 {"depth", d.params.depth}, {"root_edge_length", d.params.root_edge_length},
                 {"orientation", d.params.orientation}};
  j["scheme"] = to_string(d.stack.scheme);
  j["lambda"] = d.stack.scheme == Scheme::Contract ? json(d.stack.lambda) : json(nullptr);
  j["scale_mm_per_unit"] = d.material.scale_mm_per_unit;
  j["layers"] = layer_records(d);
  j["constraints"] = report_json(d);
  const auto& c = d.report.embedding.clearance;
  j["clearance"] = {{"gap", finite_or_null(c.gap)},
                    {"vertex_a", c.vertex_a},
                    {"vertex_b", c.vertex_b},
                    {"margin", d.margin}};
  if (d.critical_p) {
    j["critical_p_hint"] = {{"p", d.critical_p->p},
                            {"lo", d.critical_p->lo},
                            {"hi", d.critical_p->hi},
                            {"non_monotone", d.critical_p->non_monotone}};
  }
  return canonical_numbers(j);
}

json geometry_json(const Design& d) {
  const double s = d.material.scale_mm_per_unit;
  const double tol = d.request.chord_tolerance_mm / s;
  const auto palette = default_palette(static_cast<int>(d.stack.layers.size()));
  const auto regions = visibility_regions(d.stack);
  json layers = json::array();
  for (std::size_t i = 0; i < d.stack.layers.size(); ++i) {
    const auto& layer = d.stack.layers[i];
    json loops = json::array();
    for (const auto& poly : polygonize(union_boundary(layer.cuts), tol)) {
      json pts = json::array();
      for (const auto& p : poly) pts.push_back(point_mm(p, s));
      loops.push_back(pts);
    }
    const auto bridge = min_bridge_width(layer, d.stack.plate_radius);
    layers.push_back({{"index", layer.index},
                      {"palette_index", static_cast<int>(i)},
                      {"color", palette[i]},
                      {"loops", loops},
                      {"visible",
                       {{"include_layers", regions[i].include_layers},
                        {"exclude_layer", static_cast<int>(i)},
                        {"clip_to_plate", true}}},
                      {"min_bridge_width_mm", bridge.width * s},
                      {"bridge_witness_mm", point_mm(bridge.witness, s)}});
  }
  json j;
  j["plate_radius_mm"] = d.stack.plate_radius * s;
  j["chord_tolerance_mm"] = d.request.chord_tolerance_mm;
  j["layers"] = layers;
  return canonical_numbers(j);
}

}  // namespace fractree
