#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lfoacc/disparity.hpp"
#include "lfoacc/grid.hpp"
#include "lfoacc/light_field.hpp"

namespace lfoacc {

// ---- PFM ------------------------------------------------------------------

struct PfmImage {
  FloatGrid grid;  // rows top-to-bottom
  float scale = -1.0f;
};

/// Parses a single-channel `Pf` file. Negative scale means little-endian.
PfmImage read_pfm(std::span<const std::uint8_t> bytes);
/// `Pf`, scale -1 (little-endian), rows bottom-to-top. Rejects non-finite values.
std::vector<std::uint8_t> write_pfm(const FloatGrid& grid);

PfmImage read_pfm_file(const std::filesystem::path& path);
void write_pfm_file(const std::filesystem::path& path, const FloatGrid& grid);

// ---- PNG ------------------------------------------------------------------

/// 8-bit image, interleaved, channels 1 (gray) or 3 (RGB).
struct Image8 {
  int height = 0;
  int width = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;
};

Image8 read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Image8& image);

// ---- scene directories ------------------------------------------------------

struct SceneConfig {
  int U = 9;
  int V = 9;
  int disp_min = -4;
  int disp_max = 4;
  std::optional<double> focal_length;
  std::optional<double> baseline;

  DispRange range() const { return DispRange::make(disp_min, disp_max); }
  void validate() const;
  /// fB/d when both camera parameters are known.
  std::optional<double> depth_for(double disparity) const;
};

/// Flat `key = value` lines; `#` starts a comment line.
SceneConfig parse_scene_config(std::string_view text);
std::string format_scene_config(const SceneConfig& config);

struct ScenePaths {
  std::filesystem::path directory;
  std::string view_pattern = "input_Cam%03d.png";
  std::optional<std::string> ground_truth = std::string("gt_disp_lowres.pfm");
  std::string config = "scene.cfg";

  std::filesystem::path view_path(int index) const;
};

/// Expands the single `%0Nd` / `%d` token of `pattern` with `index`.
std::string format_view_name(std::string_view pattern, int index);

struct LoadedScene {
  LightField light_field;
  SceneConfig config;
  std::optional<DisparityMap> ground_truth;
};

/// Reads scene.cfg, U*V views in row-major order (converted to grayscale and
/// scaled to [0, 1]) and the ground-truth PFM if present.
LoadedScene load_scene(const ScenePaths& paths);

/// Writes views as 8-bit PNGs (rounded), the config and optionally the
/// ground-truth PFM under the default ScenePaths names. Requires C = 1.
void export_scene(const std::filesystem::path& directory, const LightField& lf,
                  const SceneConfig& config, const DisparityMap* ground_truth);

/// Quantizes a [0, 1] grid to 8 bits (values ×255, rounded, clamped).
Image8 to_image8(const FloatGrid& grid);

}  // namespace lfoacc
