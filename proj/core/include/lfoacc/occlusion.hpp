#pragma once

#include "lfoacc/cost.hpp"
#include "lfoacc/disparity.hpp"
#include "lfoacc/grid.hpp"
#include "lfoacc/light_field.hpp"

namespace lfoacc {

inline constexpr float kDefaultDecayRate = 2.0f;

struct WarpResult {
  FloatGrid image;
  BoolGrid valid;
};

/// Backward-warps view k (row-major index u*V + v) onto the center view:
/// samples I_k at (h + (u_c-u) D(h,w), w + (v_c-v) D(h,w)) bilinearly.
/// A sample is invalid (and 0) when any tap with nonzero weight falls
/// outside the image. Requires C = 1.
WarpResult warp_to_center(const LightField& lf, int view, const DisparityMap& disparity);

/// |1 - r|^q with r clamped to [0, 1].
float residual_to_mask(float residual, float q) noexcept;

/// Photometric occlusion masks: residual of each warped view against the
/// center view, remapped by residual_to_mask. Invalid warps give 0; the
/// center view is 1 everywhere.
MaskSet compute_masks(const LightField& lf, const DisparityMap& disparity,
                      float q = kDefaultDecayRate);

}  // namespace lfoacc
