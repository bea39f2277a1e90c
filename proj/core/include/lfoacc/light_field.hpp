#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "lfoacc/error.hpp"
#include "lfoacc/memory.hpp"

namespace lfoacc {

struct LightFieldShape {
  int U = 1;  // angular rows
  int V = 1;  // angular columns
  int H = 1;
  int W = 1;
  int C = 1;

  std::size_t sample_count() const noexcept {
    return static_cast<std::size_t>(U) * V * H * W * C;
  }
  int view_count() const noexcept { return U * V; }
  friend bool operator==(const LightFieldShape&, const LightFieldShape&) = default;
};

/// 4D light field with channels, stored (u, v, h, w, c) row-major so each
/// sub-aperture image is one contiguous block. Immutable once built.
class LightField {
 public:
  /// Validates extents, data length and finiteness.
  LightField(LightFieldShape shape, std::vector<float> data);

  const LightFieldShape& shape() const noexcept { return shape_; }
  int U() const noexcept { return shape_.U; }
  int V() const noexcept { return shape_.V; }
  int H() const noexcept { return shape_.H; }
  int W() const noexcept { return shape_.W; }
  int C() const noexcept { return shape_.C; }
  int view_count() const noexcept { return shape_.view_count(); }

  /// Center view, floor((U-1)/2) and floor((V-1)/2) so even grids work too.
  int center_u() const noexcept { return (shape_.U - 1) / 2; }
  int center_v() const noexcept { return (shape_.V - 1) / 2; }
  int center_view() const noexcept { return center_u() * shape_.V + center_v(); }

  float at(int u, int v, int h, int w, int c = 0) const noexcept {
    return data_[index(u, v, h, w, c)];
  }

  /// Sub-aperture image (u, v) as an H*W*C span.
  std::span<const float> sai(int u, int v) const noexcept;

  std::span<const float> samples() const noexcept { return data_; }

  std::size_t index(int u, int v, int h, int w, int c = 0) const noexcept {
    return (((static_cast<std::size_t>(u) * shape_.V + v) * shape_.H + h) *
                shape_.W + w) * shape_.C + c;
  }

  friend bool operator==(const LightField&, const LightField&) = default;

 private:
  LightFieldShape shape_;
  std::vector<float> data_;
};

/// Integer candidate disparities d_min..d_max inclusive.
struct DispRange {
  int min = -4;
  int max = 4;

  static DispRange make(int min, int max) {
    require(min <= max, ErrorCode::invalid_argument,
            "disparity range requires d_min <= d_max");
    return DispRange{min, max};
  }
  int count() const noexcept { return max - min + 1; }
  int value(int index) const noexcept { return min + index; }
  int max_abs() const noexcept {
    return std::max(min < 0 ? -min : min, max < 0 ? -max : max);
  }
  bool contains(double d) const noexcept { return d >= min && d <= max; }
  friend bool operator==(const DispRange&, const DispRange&) = default;
};

struct AngularPatch {
  int U = 0;
  int V = 0;
  std::vector<float> values;          // U*V, row-major by (u, v)
  std::vector<unsigned char> valid;   // 1 where the gather landed in bounds

  float at(int u, int v) const noexcept { return values[u * V + v]; }
  bool is_valid(int u, int v) const noexcept { return valid[u * V + v] != 0; }
};

/// Samples L(u, v, h + (u_c - u) d, w + (v_c - v) d, c) for every view.
/// Out-of-bounds entries read 0 and are flagged invalid.
AngularPatch angular_patch(const LightField& lf, int h, int w, int d, int c = 0);

/// All sub-aperture images tiled into one padded image. Block (u, v) spans
/// rows [u*(H+2p), (u+1)*(H+2p)) and columns [v*(W+2p), (v+1)*(W+2p)); its
/// p-wide border is zero. Samples are interleaved by channel.
class Mosaic {
 public:
  Mosaic(LightFieldShape shape, int pad);

  const LightFieldShape& shape() const noexcept { return shape_; }
  int pad() const noexcept { return pad_; }
  int block_rows() const noexcept { return shape_.H + 2 * pad_; }
  int block_cols() const noexcept { return shape_.W + 2 * pad_; }
  int rows() const noexcept { return shape_.U * block_rows(); }
  int cols() const noexcept { return shape_.V * block_cols(); }
  int channels() const noexcept { return shape_.C; }
  int center_u() const noexcept { return (shape_.U - 1) / 2; }
  int center_v() const noexcept { return (shape_.V - 1) / 2; }

  std::size_t index(int row, int col, int c = 0) const noexcept {
    return (static_cast<std::size_t>(row) * cols() + col) * shape_.C + c;
  }
  float at(int row, int col, int c = 0) const noexcept { return data_[index(row, col, c)]; }
  float& at(int row, int col, int c = 0) noexcept { return data_[index(row, col, c)]; }

  std::span<const float> samples() const noexcept { return data_; }
  std::size_t byte_size() const noexcept { return data_.size() * sizeof(float); }

 private:
  LightFieldShape shape_;
  int pad_;
  AccountedVector<float> data_;
};

Mosaic build_mosaic(const LightField& lf, int pad);

/// Interior of block (u, v) as an H*W*C (h, w, c) buffer.
std::vector<float> extract_sai(const Mosaic& mosaic, int u, int v);

/// BT.601 luma for C = 3; C = 1 passes through.
LightField to_grayscale(const LightField& lf);

}  // namespace lfoacc
