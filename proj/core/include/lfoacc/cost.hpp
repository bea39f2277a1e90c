#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "lfoacc/light_field.hpp"
#include "lfoacc/memory.hpp"

namespace lfoacc {

inline constexpr float kDefaultMaskEps = 1e-8f;

/// D×H×W matching cost over the center view; lower is better.
class CostVolume {
 public:
  CostVolume(DispRange range, int height, int width, float fill = 0.0f);

  const DispRange& range() const noexcept { return range_; }
  int depth() const noexcept { return range_.count(); }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }

  std::size_t index(int di, int h, int w) const noexcept {
    return (static_cast<std::size_t>(di) * height_ + h) * width_ + w;
  }
  float at(int di, int h, int w) const noexcept { return data_[index(di, h, w)]; }
  float& at(int di, int h, int w) noexcept { return data_[index(di, h, w)]; }

  std::span<float> slice(int di) noexcept {
    return {data_.data() + index(di, 0, 0), static_cast<std::size_t>(height_) * width_};
  }
  std::span<const float> slice(int di) const noexcept {
    return {data_.data() + index(di, 0, 0), static_cast<std::size_t>(height_) * width_};
  }
  std::span<const float> values() const noexcept { return data_; }
  std::span<float> values() noexcept { return data_; }

  bool operator==(const CostVolume& other) const {
    return range_ == other.range_ && height_ == other.height_ &&
           width_ == other.width_ && data_ == other.data_;
  }

 private:
  DispRange range_;
  int height_;
  int width_;
  AccountedVector<float> data_;
};

/// U×V kernel weights ω_k with no bias term. The modulated convolution
/// normalizes by the mask sum, so unit weights yield the masked mean.
struct KernelWeights {
  int U = 0;
  int V = 0;
  std::vector<float> values;
  bool bias_free = true;

  static KernelWeights uniform(int U, int V);
  float at(int u, int v) const noexcept { return values[u * V + v]; }
};

/// Per-view, per-pixel modulation scalars in [0, 1], shared across
/// disparities. Producers in this library keep the center view at 1.
class MaskSet {
 public:
  MaskSet(int views, int height, int width, float fill = 1.0f);
  MaskSet(int views, int height, int width, std::vector<float> data);

  static MaskSet ones(int views, int height, int width) {
    return MaskSet(views, height, width, 1.0f);
  }

  int views() const noexcept { return views_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }

  std::size_t index(int k, int h, int w) const noexcept {
    return (static_cast<std::size_t>(k) * height_ + h) * width_ + w;
  }
  float at(int k, int h, int w) const noexcept { return data_[index(k, h, w)]; }
  /// Callers must keep values in [0, 1].
  float& at(int k, int h, int w) noexcept { return data_[index(k, h, w)]; }

  std::span<const float> view(int k) const noexcept {
    return {data_.data() + index(k, 0, 0), static_cast<std::size_t>(height_) * width_};
  }
  std::span<const float> values() const noexcept { return data_; }

  /// Multiply every scalar by `factor` in (0, 1].
  MaskSet scaled(float factor) const;

  friend bool operator==(const MaskSet&, const MaskSet&) = default;

 private:
  int views_;
  int height_;
  int width_;
  std::vector<float> data_;
};

/// Dilation of the U×V kernel for disparity d on SAIs whose padded extents
/// are (sai_h, sai_w): (sai_h - d, sai_w - d).
std::pair<int, int> dilation_for(int d, int sai_h, int sai_w);

/// Smallest pad keeping every angular-patch gather inside its own block:
/// max(u_c, U-1-u_c, v_c, V-1-v_c) * max(|d_min|, |d_max|).
int required_pad(int U, int V, DispRange range);

/// The materialized shift-and-concat volume, D × UV × H × W × C.
class GatherVolume {
 public:
  GatherVolume(DispRange range, LightFieldShape shape);

  const DispRange& range() const noexcept { return range_; }
  const LightFieldShape& shape() const noexcept { return shape_; }

  std::size_t index(int di, int k, int h, int w, int c = 0) const noexcept {
    return ((((static_cast<std::size_t>(di) * shape_.view_count() + k) * shape_.H + h) *
                 shape_.W + w) * shape_.C) + c;
  }
  float at(int di, int k, int h, int w, int c = 0) const noexcept {
    return data_[index(di, k, h, w, c)];
  }
  float& at(int di, int k, int h, int w, int c = 0) noexcept {
    return data_[index(di, k, h, w, c)];
  }
  std::size_t byte_size() const noexcept { return data_.size() * sizeof(float); }

 private:
  DispRange range_;
  LightFieldShape shape_;
  AccountedVector<float> data_;
};

/// Shifts each view by (u_c - u) d, (v_c - v) d and stacks them; zero where
/// the shifted index leaves the SAI.
GatherVolume shift_and_concat_gather(const LightField& lf, DispRange range);

/// Mean over the view axis of a gathered volume, one CostVolume per channel.
std::vector<CostVolume> mean_over_views(const GatherVolume& volume);

/// Occlusion-aware cost constructor: for every candidate disparity, a U×V
/// kernel dilated by dilation_for(d) slides over the mosaic and computes
///   y(p, d) = Σ_k ω_k A(k) Δm_k / (Σ_k Δm_k + eps)
/// where A is the angular patch of p under d. One volume per channel.
std::vector<CostVolume> oacc_forward(const Mosaic& mosaic, const KernelWeights& weights,
                                     const MaskSet& masks, DispRange range,
                                     float eps = kDefaultMaskEps);

/// Same response kept in double precision, for callers that combine moments.
/// `squared` reads each mosaic sample squared (the element-squared mosaic,
/// formed on the fly).
AccountedVector<double> oacc_forward_f64(const Mosaic& mosaic, const KernelWeights& weights,
                                     const MaskSet& masks, DispRange range, float eps,
                                     int channel, bool squared);

/// Mask-weighted standard deviation of angular patches from two modulated
/// passes (samples and squared samples). Requires C = 1.
CostVolume masked_stat_cost(const LightField& lf, const MaskSet& masks, DispRange range,
                            float eps = kDefaultMaskEps);
CostVolume masked_stat_cost(const Mosaic& mosaic, const MaskSet& masks, DispRange range,
                            float eps = kDefaultMaskEps);

struct ModulatedConvGrad {
  std::vector<double> mosaic;   // same layout as Mosaic::samples()
  std::vector<double> weights;  // U*V
  std::vector<double> masks;    // same layout as MaskSet::values()
};

/// Analytic gradients of Σ upstream · oacc_forward with respect to the mosaic
/// samples, the kernel weights and the modulation scalars. `upstream` holds
/// one D×H×W volume per mosaic channel.
ModulatedConvGrad modulated_conv_grad(const Mosaic& mosaic, const KernelWeights& weights,
                                      const MaskSet& masks, DispRange range, float eps,
                                      std::span<const CostVolume> upstream);

}  // namespace lfoacc
