#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "lfoacc/cost.hpp"
#include "lfoacc/disparity.hpp"
#include "lfoacc/light_field.hpp"

namespace lfoacc {

/// Coverage of a layer in center-view pixel coordinates.
struct Region {
  enum class Kind { full, rect, disk };
  Kind kind = Kind::full;
  // rect: half-open [top, bottom) × [left, right)
  int top = 0, left = 0, bottom = 0, right = 0;
  // disk: (h - cy)^2 + (w - cx)^2 <= radius^2
  int cy = 0, cx = 0, radius = 0;

  static Region full() { return {}; }
  static Region rect(int top, int left, int bottom, int right);
  static Region disk(int cy, int cx, int radius);

  bool contains(int h, int w) const noexcept;
};

struct Texture {
  enum class Pattern { value_noise, constant, stripes };
  Pattern pattern = Pattern::value_noise;
  double scale = 4.0;   // lattice cell (value_noise) or period (stripes), pixels
  float level = 0.5f;   // constant pattern intensity
  float low = 0.05f;    // value range of textured patterns
  float high = 0.95f;
  std::uint64_t seed = 0;

  /// Intensity at integer surface coordinates; defined for all (h, w).
  float sample(int h, int w, std::uint64_t scene_seed) const noexcept;
};

struct Layer {
  int disparity = 0;
  Region region;
  Texture texture;
};

/// Layers listed front to back; the last one is the full-coverage background.
struct SceneSpec {
  int U = 9, V = 9, H = 64, W = 64;
  std::vector<Layer> layers;
  float noise_sigma = 0.0f;
  // Carried into the exported scene directory.
  DispRange range{-4, 4};
  std::optional<double> focal_length;
  std::optional<double> baseline;

  void validate() const;
  LightFieldShape shape() const { return {U, V, H, W, 1}; }
};

struct GroundTruth {
  DisparityMap disparity;
  MaskSet occ_masks;  // binary: 1 iff the center surface point is visible in view k
};

struct RenderedScene {
  LightField light_field;
  GroundTruth truth;
};

/// Lambertian layered rendering with integer parallax. A center-view point
/// (h, w) on a layer of disparity d appears in view (u, v) at
/// (h + (u_c-u) d, w + (v_c-v) d). Noise is added last and clamped to [0, 1].
RenderedScene render(const SceneSpec& spec, std::uint64_t seed);

/// Text scene description; see README for the grammar.
SceneSpec parse_scene_spec(std::string_view text);

}  // namespace lfoacc
