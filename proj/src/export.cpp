#include "fractree/export.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

#include "fractree/design.hpp"
#include "fractree/error.hpp"

namespace fractree {

namespace {

std::string num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  if (s.find_first_not_of("-0.") == std::string::npos) return "0.000000";
  return s;
}

std::string hex_color(double r, double g, double b) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(r * 255.0)),
                static_cast<int>(std::lround(g * 255.0)), static_cast<int>(std::lround(b * 255.0)));
  return buf;
}

// SVG y grows downward; model y grows upward.
struct Mapper {
  double scale;
  std::string x(double v) const { return num(v * scale); }
  std::string y(double v) const { return num(-v * scale); }
  std::string pt(Vec2 p) const { return x(p.x) + " " + y(p.y); }
};

std::string svg_open(double half_mm) {
  const std::string side = num(2.0 * half_mm);
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << side << "mm\" height=\"" << side
      << "mm\" viewBox=\"" << num(-half_mm) << " " << num(-half_mm) << " " << side << " " << side << "\">\n";
  return out.str();
}

// A ccw arc in model space is clockwise on screen, which is sweep-flag 0.
void append_arc(std::ostringstream& d, const Mapper& m, double radius, double extent, bool ccw, Vec2 to) {
  d << " A " << num(radius * m.scale) << " " << num(radius * m.scale) << " 0 " << (extent > kPi ? 1 : 0) << " "
    << (ccw ? 0 : 1) << " " << m.pt(to);
}

// Readers recover the centre from the endpoints, which is ill-conditioned
// for half turns, so full circles go out in thirds and near-half arcs in halves.
void append_circle_arc(std::ostringstream& d, const Mapper& m, Vec2 center, double radius, double start,
                       double extent, bool ccw, Vec2 end) {
  int pieces = 1;
  if (extent >= kTwoPi - kAngleTol) pieces = 3;
  else if (std::abs(extent - kPi) < 0.1) pieces = 2;
  const double step = (ccw ? extent : -extent) / pieces;
  for (int k = 1; k <= pieces; ++k) {
    const Vec2 to = k == pieces ? end : center + polar(radius, start + k * step);
    append_arc(d, m, radius, extent / pieces, ccw, to);
  }
}

std::string circle_path(const Mapper& m, Vec2 c, double radius, bool ccw) {
  std::ostringstream d;
  const Vec2 a = c + Vec2{radius, 0.0};
  d << "M " << m.pt(a);
  append_circle_arc(d, m, c, radius, 0.0, kTwoPi, ccw, a);
  d << " Z";
  return d.str();
}

std::string loop_path(const Mapper& m, const ArcLoop& loop) {
  std::ostringstream d;
  d << "M " << m.pt(loop.arcs.front().start_point());
  for (const Arc& arc : loop.arcs) {
    const double extent = arc.extent();
    const Vec2 end = extent >= kTwoPi - kAngleTol ? arc.start_point() : arc.end_point();
    append_circle_arc(d, m, arc.center, arc.radius, arc.start, extent, arc.ccw, end);
  }
  d << " Z";
  return d.str();
}

}  // namespace

std::vector<std::string> default_palette(int layer_count) {
  std::vector<std::string> out;
  for (int i = 0; i < layer_count; ++i) {
    const double hue = layer_count > 1 ? 270.0 * i / (layer_count - 1) : 0.0;
    const double s = 0.85, v = 0.95;
    const double c = v * s;
    const double h = hue / 60.0;
    const double x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
    double r = 0, g = 0, b = 0;
    if (h < 1) r = c, g = x;
    else if (h < 2) r = x, g = c;
    else if (h < 3) g = c, b = x;
    else if (h < 4) g = x, b = c;
    else r = x, b = c;
    const double base = v - c;
    out.push_back(hex_color(r + base, g + base, b + base));
  }
  return out;
}

std::string layer_file_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "layer_%02d.svg", index);
  return buf;
}

std::string export_svg_preview(const LayerStack& stack, const std::vector<std::string>& palette, double scale_mm) {
  const Mapper m{scale_mm};
  const double plate_mm = stack.plate_radius * scale_mm;
  std::ostringstream out;
  out << svg_open(plate_mm * 1.02);
  out << "  <circle id=\"plate\" cx=\"0.000000\" cy=\"0.000000\" r=\"" << num(plate_mm)
      << "\" fill=\"#ffffff\" stroke=\"#000000\" stroke-width=\"0.2\"/>\n";
  for (auto it = stack.layers.rbegin(); it != stack.layers.rend(); ++it) {
    const auto& layer = *it;
    const std::string& color =
        palette.empty() ? std::string("#808080") : palette[static_cast<std::size_t>(layer.index) % palette.size()];
    out << "  <g id=\"layer-" << layer.index << "\" fill=\"" << color << "\" stroke=\"none\">\n";
    for (const Disk& d : layer.cuts) {
      out << "    <circle cx=\"" << m.x(d.center.x) << "\" cy=\"" << m.y(d.center.y) << "\" r=\""
          << num(d.radius * scale_mm) << "\"/>\n";
    }
    out << "  </g>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string export_svg_cut(const Layer& layer, double plate_radius, const MaterialSpec& material) {
  if (material.kerf_mm < 0.0) throw DomainError("kerf_mm", "kerf must be non-negative");
  const Mapper m{material.scale_mm_per_unit};
  const double grow = material.kerf_mm / 2.0 / material.scale_mm_per_unit;
  std::vector<Disk> cuts = layer.cuts;
  for (Disk& d : cuts) d.radius += grow;

  std::vector<ArcLoop> loops;
  try {
    if (!cuts.empty()) loops = union_boundary(cuts);
  } catch (const std::exception& e) {
    throw GeometryError("layer " + std::to_string(layer.index) + ": " + e.what());
  }

  std::ostringstream out;
  out << svg_open(plate_radius * m.scale);
  out << "  <g id=\"layer-" << layer.index << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"0.1\">\n";
  out << "    <path id=\"plate\" d=\"" << circle_path(m, {0.0, 0.0}, plate_radius, true) << "\"/>\n";
  for (const ArcLoop& loop : loops) {
    if (!loop.closed || loop.arcs.empty())
      throw GeometryError("layer " + std::to_string(layer.index) + ": open boundary loop");
    out << "    <path d=\"" << loop_path(m, loop) << "\"/>\n";
  }
  out << "  </g>\n</svg>\n";
  return out.str();
}

std::string export_manifest(const Design& d) {
  using nlohmann::json;
  json j;
  j["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  j["params"] = {{"p", d.params.p},         {"theta", d.params.theta},
                 {"q", d.params.q},         {"r", d.params.r},
                 {"depth", d.params.depth}, {"root_edge_length", d.params.root_edge_length},
                 {"orientation", d.params.orientation}};
  j["scheme"] = to_string(d.stack.scheme);
  j["lambda"] = d.stack.scheme == Scheme::Contract ? json(d.stack.lambda) : json(nullptr);
  j["plate"] = {{"radius", d.stack.plate_radius}, {"diameter_mm", d.request.plate_diameter_mm}};
  j["material"] = {{"min_bridge_mm", d.material.min_bridge_mm},
                   {"kerf_mm", d.material.kerf_mm},
                   {"bed_diameter_mm", d.material.bed_diameter_mm},
                   {"scale_mm_per_unit", d.material.scale_mm_per_unit}};
  j["margin"] = d.margin;
  j["sampler"] = {{"method", "stratified"}, {"budget", d.request.budget}, {"seed", d.request.seed}};
  j["layer_thickness_in"] = kLayerThicknessIn;
  json layers = layer_records(d);
  for (auto& row : layers) row["file"] = layer_file_name(row["index"].get<int>());
  j["layers"] = layers;
  j["preview_file"] = kPreviewFile;
  j["constraints"] = report_json(d);
  return canonical_numbers(j).dump(2) + "\n";
}

std::vector<std::string> write_outputs(const Design& d, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("io_error", "cannot create " + dir.string() + ": " + ec.message(), "out");

  std::vector<std::future<std::string>> jobs;
  for (const Layer& layer : d.stack.layers) {
    jobs.push_back(std::async(std::launch::async, [&d, &layer] {
      return export_svg_cut(layer, d.stack.plate_radius, d.material);
    }));
  }
  std::vector<std::pair<std::string, std::string>> files;
  for (std::size_t i = 0; i < jobs.size(); ++i)
    files.emplace_back(layer_file_name(d.stack.layers[i].index), jobs[i].get());
  files.emplace_back(kPreviewFile, export_svg_preview(d.stack, default_palette(static_cast<int>(d.stack.layers.size())),
                                                      d.material.scale_mm_per_unit));
  files.emplace_back(kManifestFile, export_manifest(d));

  std::vector<std::string> names;
  for (const auto& [name, text] : files) {
    std::ofstream f(dir / name, std::ios::binary | std::ios::trunc);
    f << text;
    if (!f) throw Error("io_error", "cannot write " + (dir / name).string(), "out");
    names.push_back(name);
  }
  return names;
}

}  // namespace fractree
