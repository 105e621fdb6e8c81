#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "fractree/design.hpp"
#include "fractree/error.hpp"
#include "fractree/export.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace fractree;

namespace {

int count_of(const std::string& text, const std::string& needle) {
  int n = 0;
  for (std::size_t at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1)) ++n;
  return n;
}

// Tag balance plus quoted attributes; enough to catch broken markup.
bool well_formed(const std::string& xml) {
  std::vector<std::string> open;
  std::size_t i = 0;
  bool root_seen = false;
  while ((i = xml.find('<', i)) != std::string::npos) {
    const std::size_t end = xml.find('>', i);
    if (end == std::string::npos) return false;
    std::string tag = xml.substr(i + 1, end - i - 1);
    i = end + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?') {
      if (tag.back() != '?') return false;
      continue;
    }
    if (count_of(tag, "\"") % 2 != 0) return false;
    if (tag[0] == '/') {
      if (open.empty() || open.back() != tag.substr(1)) return false;
      open.pop_back();
      continue;
    }
    const bool self_closing = tag.back() == '/';
    std::string name = tag.substr(0, tag.find_first_of(" \n/"));
    if (open.empty()) {
      if (root_seen) return false;
      root_seen = true;
    }
    if (!self_closing) open.push_back(name);
  }
  return root_seen && open.empty();
}

// One elliptical-arc command with equal radii, in SVG (y-down) millimetres.
struct SvgArc {
  oracle::Vec2 from, to;
  double radius = 0.0;
  bool large = false;
  bool sweep = false;

  // Centre picked so the swept extent agrees with the large-arc flag.
  oracle::Vec2 center() const {
    const double mx = 0.5 * (from.x + to.x), my = 0.5 * (from.y + to.y);
    const double dx = to.x - from.x, dy = to.y - from.y;
    const double half = 0.5 * std::hypot(dx, dy);
    const double h = std::sqrt(std::max(0.0, radius * radius - half * half));
    const double nx = -dy / (2 * half), ny = dx / (2 * half);
    for (int sign : {1, -1}) {
      const oracle::Vec2 c{mx + sign * h * nx, my + sign * h * ny};
      if ((extent_about(c) > oracle::kPi) == large) return c;
    }
    return {mx, my};
  }
  double angle(oracle::Vec2 c, oracle::Vec2 p) const { return std::atan2(p.y - c.y, p.x - c.x); }
  static double wrap(double a) {
    a = std::fmod(a, 2 * oracle::kPi);
    return a < 0 ? a + 2 * oracle::kPi : a;
  }
  double extent_about(oracle::Vec2 c) const {
    const double d = angle(c, to) - angle(c, from);
    return sweep ? wrap(d) : wrap(-d);
  }
  bool covers(oracle::Vec2 c, double phi) const {
    const double d = phi - angle(c, from);
    return (sweep ? wrap(d) : wrap(-d)) <= extent_about(c);
  }
};

struct SvgPath {
  std::vector<SvgArc> arcs;
  bool closed = false;
};

std::vector<SvgPath> parse_paths(const std::string& svg) {
  std::vector<SvgPath> out;
  const std::regex attr("<path[^>]* d=\"([^\"]*)\"");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), attr); it != std::sregex_iterator(); ++it) {
    std::istringstream in((*it)[1].str());
    SvgPath path;
    std::string cmd;
    oracle::Vec2 at{0, 0};
    while (in >> cmd) {
      if (cmd == "M") {
        in >> at.x >> at.y;
      } else if (cmd == "A") {
        SvgArc a;
        double ry, rot;
        int large, sweep;
        in >> a.radius >> ry >> rot >> large >> sweep >> a.to.x >> a.to.y;
        REQUIRE(ry == a.radius);
        a.from = at;
        a.large = large != 0;
        a.sweep = sweep != 0;
        path.arcs.push_back(a);
        at = a.to;
      } else if (cmd == "Z") {
        path.closed = true;
      } else {
        FAIL("unexpected path command " << cmd);
      }
    }
    out.push_back(path);
  }
  return out;
}

// Even-odd test against every arc, casting a ray toward +x.
bool inside(const std::vector<SvgPath>& paths, oracle::Vec2 p) {
  int crossings = 0;
  for (const auto& path : paths) {
    for (const auto& arc : path.arcs) {
      const auto c = arc.center();
      const double dy = p.y - c.y;
      if (std::abs(dy) >= arc.radius) continue;
      const double dx = std::sqrt(arc.radius * arc.radius - dy * dy);
      for (double x : {c.x - dx, c.x + dx}) {
        if (x <= p.x) continue;
        if (arc.covers(c, std::atan2(dy, x - c.x))) ++crossings;
      }
    }
  }
  return crossings % 2 == 1;
}

Layer layer_of(std::vector<Disk> cuts, int index = 0) {
  Layer l;
  l.index = index;
  for (std::size_t i = 0; i < cuts.size(); ++i) cuts[i].vertex = static_cast<int>(i);
  l.cuts = std::move(cuts);
  return l;
}

MaterialSpec material(double scale, double kerf) {
  MaterialSpec m;
  m.scale_mm_per_unit = scale;
  m.kerf_mm = kerf;
  return m;
}

DesignRequest request(int depth, Scheme scheme = Scheme::Contract) {
  DesignRequest req;
  req.params.depth = depth;
  req.scheme = scheme;
  req.budget = 20000;
  return req;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("palette and file names") {
  const auto pal = default_palette(7);
  REQUIRE(pal.size() == 7u);
  const std::regex hex("#[0-9a-f]{6}");
  for (const auto& c : pal) CHECK(std::regex_match(c, hex));
  CHECK(pal.front() == "#f22424");
  CHECK(default_palette(1) == std::vector<std::string>{"#f22424"});
  CHECK(layer_file_name(0) == "layer_00.svg");
  CHECK(layer_file_name(12) == "layer_12.svg");
}

TEST_CASE("preview of a single layer") {
  ParamSet prm;
  prm.depth = 0;
  StackOptions opt;
  opt.scheme = Scheme::Growth;
  const auto stack = build_stack(assign_radii(build_embedding(prm)), opt);
  const auto svg = export_svg_preview(stack, default_palette(1), 50.0);
  CHECK(count_of(svg, "<circle") == 2);
  CHECK(well_formed(svg));
  CHECK(svg.find("width=\"306.000000mm\"") != std::string::npos);
  CHECK(svg.find("viewBox=\"-153.000000 -153.000000 306.000000 306.000000\"") != std::string::npos);
}

TEST_CASE("preview draws every disk, top layer last") {
  ParamSet prm;
  prm.depth = 4;
  const auto stack = build_stack(assign_radii(build_embedding(prm)), StackOptions{});
  const auto palette = default_palette(5);
  const auto svg = export_svg_preview(stack, palette, 50.0);
  std::size_t disks = 0;
  for (const auto& l : stack.layers) disks += l.cuts.size();
  CHECK(count_of(svg, "<circle") == static_cast<int>(1 + disks));
  CHECK(count_of(svg, "<g ") == 5);
  CHECK(well_formed(svg));
  std::size_t last = 0;
  for (int i = 4; i >= 0; --i) {
    const auto at = svg.find("<g id=\"layer-" + std::to_string(i) + "\" fill=\"" + palette[i] + "\"");
    REQUIRE(at != std::string::npos);
    CHECK(at > last);
    last = at;
  }
}

TEST_CASE("cut of a single disk") {
  const auto svg = export_svg_cut(layer_of({{{0.5, 0.2}, 1.0, 0, 0}}), 3.0, material(10.0, 0.0));
  const auto paths = parse_paths(svg);
  REQUIRE(paths.size() == 2u);
  for (const auto& p : paths) {
    CHECK(p.closed);
    CHECK(p.arcs.size() == 3u);
  }
  CHECK(paths[0].arcs[0].radius == 30.0);
  CHECK(paths[1].arcs[0].radius == 10.0);
  CHECK(svg.find("fill=\"none\"") != std::string::npos);
  CHECK(svg.find("fill=\"#") == std::string::npos);
  CHECK(well_formed(svg));
  // Six decimals on every coordinate.
  const std::regex number("-?[0-9]+\\.[0-9]+");
  const std::string d = svg.substr(svg.find(" d=\""));
  for (auto it = std::sregex_iterator(d.begin(), d.end(), number); it != std::sregex_iterator(); ++it) {
    const auto s = it->str();
    CHECK(s.size() - s.find('.') - 1 == 6u);
  }
}

TEST_CASE("two overlapping disks meet at the analytic points") {
  const double scale = 7.0;
  const Disk a{{-0.4, 0.1}, 0.7, 0, 0}, b{{0.5, -0.2}, 0.6, 0, 1};
  const auto svg = export_svg_cut(layer_of({a, b}), 3.0, material(scale, 0.0));
  const auto paths = parse_paths(svg);
  REQUIRE(paths.size() == 2u);
  REQUIRE(paths[1].arcs.size() == 2u);
  CHECK(paths[1].closed);

  // Circle-circle intersection from the chord construction.
  const double dx = b.center.x - a.center.x, dy = b.center.y - a.center.y, d = std::hypot(dx, dy);
  const double along = (d * d + a.radius * a.radius - b.radius * b.radius) / (2 * d);
  const double h = std::sqrt(a.radius * a.radius - along * along);
  const double bx = a.center.x + along * dx / d, by = a.center.y + along * dy / d;
  const oracle::Vec2 p1{(bx - h * dy / d) * scale, -(by + h * dx / d) * scale};
  const oracle::Vec2 p2{(bx + h * dy / d) * scale, -(by - h * dx / d) * scale};
  auto near = [](oracle::Vec2 u, oracle::Vec2 v) { return std::hypot(u.x - v.x, u.y - v.y) <= 1e-6; };
  for (const auto& arc : paths[1].arcs) {
    CHECK((near(arc.to, p1) || near(arc.to, p2)));
    CHECK((near(arc.from, p1) || near(arc.from, p2)));
  }
  // The larger disk contributes the longer arc.
  const auto& big = paths[1].arcs[0].radius > paths[1].arcs[1].radius ? paths[1].arcs[0] : paths[1].arcs[1];
  CHECK(std::abs(big.radius - a.radius * scale) <= 1e-6);
  CHECK(big.large);
}

TEST_CASE("kerf grows every cut radius by half the kerf") {
  const double scale = 50.0;
  const auto layer = layer_of({{{-1.0, 0.0}, 0.5, 0, 0}, {{1.0, 0.3}, 0.4, 0, 1}, {{0.2, 1.5}, 0.3, 0, 2}});
  const auto plain = parse_paths(export_svg_cut(layer, 3.0, material(scale, 0.0)));
  const auto kerfed = parse_paths(export_svg_cut(layer, 3.0, material(scale, 0.2)));
  REQUIRE(plain.size() == kerfed.size());
  CHECK(kerfed[0].arcs[0].radius == plain[0].arcs[0].radius);
  for (std::size_t i = 1; i < plain.size(); ++i) {
    REQUIRE(plain[i].arcs.size() == kerfed[i].arcs.size());
    for (std::size_t k = 0; k < plain[i].arcs.size(); ++k)
      CHECK(std::abs(kerfed[i].arcs[k].radius - plain[i].arcs[k].radius - 0.1) <= 1e-6);
  }
  CHECK_THROWS_AS(export_svg_cut(layer, 3.0, material(scale, -0.1)), DomainError);
}

TEST_CASE("cut paths reproduce the kerf-inflated union") {
  const double scale = 50.0, kerf = 0.2;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Disk> cuts;
  for (int i = 0; i < 14; ++i) cuts.push_back({{2.0 * u(rng), 2.0 * u(rng)}, 0.35 + 0.3 * u(rng), 0, i});
  const auto layer = layer_of(cuts);
  const auto svg = export_svg_cut(layer, 3.0, material(scale, kerf));
  auto paths = parse_paths(svg);
  paths.erase(paths.begin());  // plate

  std::vector<Disk> grown = cuts;
  for (auto& d : grown) d.radius += kerf / 2 / scale;
  CHECK(paths.size() == union_boundary(grown).size());

  // Vertices and arc midpoints lie on the union boundary.
  for (const auto& path : paths) {
    for (const auto& arc : path.arcs) {
      const auto c = arc.center();
      const double a0 = arc.angle(c, arc.from);
      const double mid = a0 + (arc.sweep ? 0.5 : -0.5) * arc.extent_about(c);
      for (oracle::Vec2 p : {arc.from, oracle::Vec2{c.x + arc.radius * std::cos(mid), c.y + arc.radius * std::sin(mid)}}) {
        const oracle::Vec2 model{p.x / scale, -p.y / scale};
        double nearest = std::numeric_limits<double>::infinity();
        for (const auto& d : grown)
          nearest = std::min(nearest, std::hypot(model.x - d.center.x, model.y - d.center.y) - d.radius);
        CHECK(std::abs(nearest) * scale <= 1e-4);
      }
    }
  }

  // Membership away from the boundary.
  int checked = 0;
  std::uniform_real_distribution<double> box(-3, 3);
  for (int k = 0; k < 4000; ++k) {
    const oracle::Vec2 model{box(rng), box(rng)};
    if (oracle::circle_distance(grown, model) * scale <= 1e-4) continue;
    CHECK(inside(paths, {model.x * scale, -model.y * scale}) == oracle::in_union(grown, model));
    ++checked;
  }
  CHECK(checked > 3900);
}

TEST_CASE("design layers: one path per boundary loop") {
  const auto d = run_design(request(5));
  for (const auto& layer : d.stack.layers) {
    const auto svg = export_svg_cut(layer, d.stack.plate_radius, d.material);
    CHECK(well_formed(svg));
    std::vector<Disk> grown = layer.cuts;
    for (auto& c : grown) c.radius += d.material.kerf_mm / 2 / d.material.scale_mm_per_unit;
    const auto paths = parse_paths(svg);
    CHECK(paths.size() == union_boundary(grown).size() + 1);
    for (const auto& p : paths) CHECK(p.closed);
  }
}

TEST_CASE("manifest layer records") {
  const auto d0 = run_design(request(0, Scheme::Growth));
  const auto m0 = nlohmann::json::parse(export_manifest(d0));
  CHECK(m0["layers"].size() == 1u);
  CHECK(m0["lambda"].is_null());

  const auto d6 = run_design(request(6));
  const auto text = export_manifest(d6);
  const auto m6 = nlohmann::json::parse(text);
  REQUIRE(m6["layers"].size() == 7u);
  for (int i = 0; i < 7; ++i) {
    const auto& row = m6["layers"][i];
    CHECK(row["index"] == i);
    CHECK(row["file"] == layer_file_name(i));
    CHECK(row["disk_count"] == d6.stack.layers[i].cuts.size());
    for (const char* key : {"cut_area_mm2", "visible_area_mm2", "visible_area_stderr_mm2", "visible_fraction",
                            "min_bridge_width_mm"})
      CHECK(row.contains(key));
  }
  CHECK(m6["layer_thickness_in"] == 0.125);
  CHECK(m6["tool"]["name"] == "fractree");
  CHECK(m6["scheme"] == "contract");
  CHECK(m6["lambda"].get<double>() == doctest::Approx(d6.stack.lambda).epsilon(1e-8));
  CHECK(m6["material"]["scale_mm_per_unit"] == 50.0);
  CHECK(m6.contains("constraints"));
  CHECK(m6["constraints"]["pass"] == d6.report.pass);

  CHECK(text.back() == '\n');
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text == export_manifest(run_design(request(6))));
  CHECK(m6.dump(2) + "\n" == text);  // keys already sorted

  const std::regex number("-?[0-9][0-9.]*(e[-+]?[0-9]+)?");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), number); it != std::sregex_iterator(); ++it) {
    std::string mantissa = it->str().substr(0, it->str().find('e'));
    int digits = 0;
    bool leading = true;
    for (char c : mantissa) {
      if (!std::isdigit(static_cast<unsigned char>(c))) continue;
      if (leading && c == '0') continue;
      leading = false;
      ++digits;
    }
    CHECK(digits <= 9);
  }
}

TEST_CASE("written outputs") {
  const auto dir = std::filesystem::temp_directory_path() / "fractree_export_test";
  std::filesystem::remove_all(dir);
  const auto d = run_design(request(6));
  const auto names = write_outputs(d, dir);
  CHECK(names.size() == 9u);
  for (const auto& n : names) CHECK(std::filesystem::exists(dir / n));
  const auto manifest = nlohmann::json::parse(slurp(dir / kManifestFile));
  for (const auto& row : manifest["layers"]) CHECK(std::filesystem::exists(dir / row["file"].get<std::string>()));
  CHECK(std::filesystem::exists(dir / manifest["preview_file"].get<std::string>()));

  const auto first = slurp(dir / "layer_03.svg");
  write_outputs(d, dir);
  CHECK(slurp(dir / "layer_03.svg") == first);
  CHECK(slurp(dir / kManifestFile) == export_manifest(d));

  // A plain file where the directory should go.
  const auto blocked = dir / "manifest.json" / "sub";
  CHECK_THROWS_AS(write_outputs(d, blocked), Error);
  std::filesystem::remove_all(dir);
}
