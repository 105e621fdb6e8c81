#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fractree/checks.hpp"
#include "fractree/layers.hpp"

namespace fractree {

struct Design;

// One "#rrggbb" per layer, red on top through violet at the bottom.
std::vector<std::string> default_palette(int layer_count);

std::string layer_file_name(int index);

inline constexpr const char* kPreviewFile = "preview.svg";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr double kLayerThicknessIn = 0.125;

// Whole stack: plate, then one group of disk circles per layer, top layer last.
std::string export_svg_preview(const LayerStack& stack, const std::vector<std::string>& palette, double scale_mm);

// Laser input for one layer: kerf-inflated union boundary as arc paths plus
// the plate outline. Stroke only, millimetres, 6 decimals.
std::string export_svg_cut(const Layer& layer, double plate_radius, const MaterialSpec& material);

// Canonical JSON: sorted keys, numbers to 9 significant digits, LF endings.
std::string export_manifest(const Design& design);

// Writes every layer_{i:02}.svg, preview.svg and manifest.json; returns the file names.
std::vector<std::string> write_outputs(const Design& design, const std::filesystem::path& dir);

}  // namespace fractree
