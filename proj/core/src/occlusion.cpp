#include "lfoacc/occlusion.hpp"

#include <algorithm>
#include <cmath>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

namespace lfoacc {

namespace {

struct Taps {
  int first = 0;
  double frac = 0.0;  // weight of first + 1; zero means only `first` is needed
};

Taps linear_taps(double x) {
  const double f = std::floor(x);
  return {static_cast<int>(f), x - f};
}

bool taps_inside(const Taps& t, int extent) {
  if (t.first < 0 || t.first >= extent) return false;
  return t.frac == 0.0 || t.first + 1 < extent;
}

}  // namespace

WarpResult warp_to_center(const LightField& lf, int view, const DisparityMap& disparity) {
  require(lf.C() == 1, ErrorCode::invalid_argument, "warp_to_center expects C = 1");
  require(view >= 0 && view < lf.view_count(), ErrorCode::invalid_argument,
          "warp_to_center: view index out of range");
  require(disparity.height() == lf.H() && disparity.width() == lf.W(),
          ErrorCode::shape_mismatch, "disparity map must match the SAI extents");
  const int H = lf.H(), W = lf.W();
  const int u = view / lf.V(), v = view % lf.V();
  const double du = lf.center_u() - u;
  const double dv = lf.center_v() - v;

  WarpResult out{FloatGrid(H, W, 0.0f), BoolGrid(H, W, 0)};
  for (int h = 0; h < H; ++h) {
    for (int w = 0; w < W; ++w) {
      const double d = disparity(h, w);
      const Taps ty = linear_taps(h + du * d);
      const Taps tx = linear_taps(w + dv * d);
      if (!taps_inside(ty, H) || !taps_inside(tx, W)) continue;
      const int y1 = ty.frac == 0.0 ? ty.first : ty.first + 1;
      const int x1 = tx.frac == 0.0 ? tx.first : tx.first + 1;
      const double top = (1.0 - tx.frac) * lf.at(u, v, ty.first, tx.first) +
                         tx.frac * lf.at(u, v, ty.first, x1);
      const double bottom = (1.0 - tx.frac) * lf.at(u, v, y1, tx.first) +
                            tx.frac * lf.at(u, v, y1, x1);
      out.image(h, w) = static_cast<float>((1.0 - ty.frac) * top + ty.frac * bottom);
      out.valid(h, w) = 1;
    }
  }
  return out;
}

float residual_to_mask(float residual, float q) noexcept {
  const double r = std::clamp(static_cast<double>(residual), 0.0, 1.0);
  return static_cast<float>(std::pow(std::abs(1.0 - r), static_cast<double>(q)));
}

MaskSet compute_masks(const LightField& lf, const DisparityMap& disparity, float q) {
  require(q > 0.0f, ErrorCode::invalid_argument, "decay rate q must be > 0");
  require(lf.C() == 1, ErrorCode::invalid_argument, "compute_masks expects C = 1");
  const int H = lf.H(), W = lf.W();
  const int center = lf.center_view();
  MaskSet masks(lf.view_count(), H, W, 1.0f);
  const auto center_image = lf.sai(lf.center_u(), lf.center_v());

  tbb::parallel_for(tbb::blocked_range<int>(0, lf.view_count()),
                    [&](const tbb::blocked_range<int>& views) {
    for (int k = views.begin(); k != views.end(); ++k) {
      if (k == center) continue;
      const WarpResult warped = warp_to_center(lf, k, disparity);
      for (int h = 0; h < H; ++h) {
        for (int w = 0; w < W; ++w) {
          if (!warped.valid(h, w)) {
            masks.at(k, h, w) = 0.0f;
            continue;
          }
          const float res =
              std::abs(warped.image(h, w) - center_image[static_cast<std::size_t>(h) * W + w]);
          masks.at(k, h, w) = residual_to_mask(res, q);
        }
      }
    }
  });
  return masks;
}

}  // namespace lfoacc
