#pragma once

#include <optional>

#include "lfoacc/grid.hpp"
#include "lfoacc/light_field.hpp"

namespace lfoacc {

/// Center-view disparity in pixels. `range` is set when the map was
/// regressed over a candidate set.
struct DisparityMap {
  FloatGrid values;
  std::optional<DispRange> range;

  DisparityMap() = default;
  explicit DisparityMap(FloatGrid grid, std::optional<DispRange> r = std::nullopt)
      : values(std::move(grid)), range(r) {}
  DisparityMap(int height, int width, float fill = 0.0f)
      : values(height, width, fill) {}

  int height() const noexcept { return values.height(); }
  int width() const noexcept { return values.width(); }
  float operator()(int h, int w) const { return values(h, w); }
  float& operator()(int h, int w) { return values(h, w); }
};

}  // namespace lfoacc
