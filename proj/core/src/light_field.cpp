#include "lfoacc/light_field.hpp"

#include <cmath>
#include <string>

namespace lfoacc {

LightField::LightField(LightFieldShape shape, std::vector<float> data)
    : shape_(shape), data_(std::move(data)) {
  require(shape_.U >= 1 && shape_.V >= 1 && shape_.H >= 1 && shape_.W >= 1 && shape_.C >= 1,
          ErrorCode::invalid_argument, "light field extents must all be >= 1");
  require(data_.size() == shape_.sample_count(), ErrorCode::shape_mismatch,
          "light field data length " + std::to_string(data_.size()) +
              " does not match U*V*H*W*C = " + std::to_string(shape_.sample_count()));
  for (float x : data_) {
    require(std::isfinite(x), ErrorCode::invalid_argument,
            "light field samples must be finite");
  }
}

std::span<const float> LightField::sai(int u, int v) const noexcept {
  const std::size_t n = static_cast<std::size_t>(shape_.H) * shape_.W * shape_.C;
  return {data_.data() + index(u, v, 0, 0, 0), n};
}

AngularPatch angular_patch(const LightField& lf, int h, int w, int d, int c) {
  require(h >= 0 && h < lf.H() && w >= 0 && w < lf.W(), ErrorCode::invalid_argument,
          "angular_patch: pixel outside the center view");
  require(c >= 0 && c < lf.C(), ErrorCode::invalid_argument, "angular_patch: bad channel");
  AngularPatch patch;
  patch.U = lf.U();
  patch.V = lf.V();
  patch.values.assign(static_cast<std::size_t>(lf.view_count()), 0.0f);
  patch.valid.assign(static_cast<std::size_t>(lf.view_count()), 0);
  const int uc = lf.center_u();
  const int vc = lf.center_v();
  for (int u = 0; u < lf.U(); ++u) {
    const int hs = h + (uc - u) * d;
    for (int v = 0; v < lf.V(); ++v) {
      const int ws = w + (vc - v) * d;
      if (hs < 0 || hs >= lf.H() || ws < 0 || ws >= lf.W()) continue;
      patch.values[u * lf.V() + v] = lf.at(u, v, hs, ws, c);
      patch.valid[u * lf.V() + v] = 1;
    }
  }
  return patch;
}

Mosaic::Mosaic(LightFieldShape shape, int pad) : shape_(shape), pad_(pad) {
  require(pad >= 0, ErrorCode::invalid_argument, "mosaic pad must be >= 0");
  data_.assign(static_cast<std::size_t>(rows()) * cols() * shape_.C, 0.0f);
}

Mosaic build_mosaic(const LightField& lf, int pad) {
  Mosaic mosaic(lf.shape(), pad);
  const int C = lf.C();
  for (int u = 0; u < lf.U(); ++u) {
    for (int v = 0; v < lf.V(); ++v) {
      const int row0 = u * mosaic.block_rows() + pad;
      const int col0 = v * mosaic.block_cols() + pad;
      for (int h = 0; h < lf.H(); ++h) {
        for (int w = 0; w < lf.W(); ++w) {
          for (int c = 0; c < C; ++c) {
            mosaic.at(row0 + h, col0 + w, c) = lf.at(u, v, h, w, c);
          }
        }
      }
    }
  }
  return mosaic;
}

std::vector<float> extract_sai(const Mosaic& mosaic, int u, int v) {
  const auto& s = mosaic.shape();
  require(u >= 0 && u < s.U && v >= 0 && v < s.V, ErrorCode::invalid_argument,
          "extract_sai: view index out of range");
  std::vector<float> out;
  out.reserve(static_cast<std::size_t>(s.H) * s.W * s.C);
  const int row0 = u * mosaic.block_rows() + mosaic.pad();
  const int col0 = v * mosaic.block_cols() + mosaic.pad();
  for (int h = 0; h < s.H; ++h) {
    for (int w = 0; w < s.W; ++w) {
      for (int c = 0; c < s.C; ++c) out.push_back(mosaic.at(row0 + h, col0 + w, c));
    }
  }
  return out;
}

LightField to_grayscale(const LightField& lf) {
  if (lf.C() == 1) return lf;
  require(lf.C() == 3, ErrorCode::invalid_argument,
          "to_grayscale expects 1 or 3 channels, got " + std::to_string(lf.C()));
  LightFieldShape shape = lf.shape();
  shape.C = 1;
  std::vector<float> gray(shape.sample_count());
  const auto rgb = lf.samples();
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const float r = rgb[3 * i], g = rgb[3 * i + 1], b = rgb[3 * i + 2];
    gray[i] = 0.299f * r + 0.587f * g + 0.114f * b;
  }
  return LightField(shape, std::move(gray));
}

}  // namespace lfoacc
