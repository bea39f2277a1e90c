#include "lfoacc/cost.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

namespace lfoacc {

CostVolume::CostVolume(DispRange range, int height, int width, float fill)
    : range_(range), height_(height), width_(width) {
  require(range.min <= range.max, ErrorCode::invalid_argument, "cost volume: empty range");
  require(height >= 1 && width >= 1, ErrorCode::invalid_argument,
          "cost volume extents must be >= 1");
  data_.assign(static_cast<std::size_t>(range.count()) * height * width, fill);
}

KernelWeights KernelWeights::uniform(int U, int V) {
  require(U >= 1 && V >= 1, ErrorCode::invalid_argument, "kernel extents must be >= 1");
  return KernelWeights{U, V, std::vector<float>(static_cast<std::size_t>(U) * V, 1.0f), true};
}

MaskSet::MaskSet(int views, int height, int width, float fill)
    : views_(views), height_(height), width_(width) {
  require(views >= 1 && height >= 1 && width >= 1, ErrorCode::invalid_argument,
          "mask set extents must be >= 1");
  require(fill >= 0.0f && fill <= 1.0f, ErrorCode::invalid_argument,
          "modulation scalars must lie in [0, 1]");
  data_.assign(static_cast<std::size_t>(views) * height * width, fill);
}

MaskSet::MaskSet(int views, int height, int width, std::vector<float> data)
    : views_(views), height_(height), width_(width), data_(std::move(data)) {
  require(views >= 1 && height >= 1 && width >= 1, ErrorCode::invalid_argument,
          "mask set extents must be >= 1");
  require(data_.size() == static_cast<std::size_t>(views) * height * width,
          ErrorCode::shape_mismatch, "mask data length does not match extents");
  for (float m : data_) {
    require(m >= 0.0f && m <= 1.0f, ErrorCode::invalid_argument,
            "modulation scalars must lie in [0, 1]");
  }
}

MaskSet MaskSet::scaled(float factor) const {
  require(factor > 0.0f && factor <= 1.0f, ErrorCode::invalid_argument,
          "mask scale factor must lie in (0, 1]");
  MaskSet out = *this;
  for (float& m : out.data_) m *= factor;
  return out;
}

std::pair<int, int> dilation_for(int d, int sai_h, int sai_w) {
  require(d < sai_h && d < sai_w, ErrorCode::invalid_argument,
          "dilation_for: disparity " + std::to_string(d) +
              " leaves a non-positive dilation for SAI extents " + std::to_string(sai_h) +
              "x" + std::to_string(sai_w));
  return {sai_h - d, sai_w - d};
}

namespace {

int row_reach(int U) { return std::max((U - 1) / 2, U - 1 - (U - 1) / 2); }

void check_pad(const LightFieldShape& s, int pad, DispRange range) {
  const int need_rows = row_reach(s.U) * range.max_abs();
  const int need_cols = row_reach(s.V) * range.max_abs();
  require(pad >= need_rows && pad >= need_cols, ErrorCode::precondition,
          "mosaic pad " + std::to_string(pad) + " is too small for disparities [" +
              std::to_string(range.min) + ", " + std::to_string(range.max) + "]; need " +
              std::to_string(std::max(need_rows, need_cols)));
}

void check_operands(const Mosaic& mosaic, const KernelWeights& weights, const MaskSet& masks,
                    DispRange range, float eps) {
  const auto& s = mosaic.shape();
  require(range.min <= range.max, ErrorCode::invalid_argument, "empty disparity range");
  require(eps > 0.0f, ErrorCode::invalid_argument, "mask eps must be > 0");
  require(weights.U == s.U && weights.V == s.V &&
              weights.values.size() == static_cast<std::size_t>(s.U) * s.V,
          ErrorCode::shape_mismatch, "kernel extents must match the angular resolution");
  require(masks.views() == s.U * s.V && masks.height() == s.H && masks.width() == s.W,
          ErrorCode::shape_mismatch, "mask set must be UV x H x W");
  check_pad(s, mosaic.pad(), range);
  // Surfaces the dilation_for error for the extreme disparities.
  dilation_for(range.max, mosaic.block_rows(), mosaic.block_cols());
  dilation_for(range.min, mosaic.block_rows(), mosaic.block_cols());
}

// Σ_k Δm_k per pixel, views added in fixed order.
AccountedVector<double> mask_sums(const MaskSet& masks) {
  const std::size_t plane = static_cast<std::size_t>(masks.height()) * masks.width();
  AccountedVector<double> sums(plane, 0.0);
  for (int k = 0; k < masks.views(); ++k) {
    const auto m = masks.view(k);
    for (std::size_t i = 0; i < plane; ++i) sums[i] += m[i];
  }
  return sums;
}

AccountedVector<double> mask_denominators(const MaskSet& masks, float eps) {
  auto den = mask_sums(masks);
  for (double& x : den) x += static_cast<double>(eps);
  return den;
}

// The dilated modulated convolution. For output pixel (h, w) and disparity d
// the kernel tap of view (u, v) reads mosaic sample
//   row = pad + h + u_c*d + u*(H + 2pad - d)
//   col = pad + w + v_c*d + v*(W + 2pad - d)
// which expands to block (u, v), interior offset (h + (u_c-u)d, w + (v_c-v)d):
// exactly the angular-patch gather. `sink(di, h, row)` receives W numerators
// already divided by the mask denominator.
template <class Sink>
void run_oacc(const Mosaic& mosaic, const KernelWeights& weights, const MaskSet& masks,
              DispRange range, float eps, int channel, bool squared, Sink&& sink) {
  check_operands(mosaic, weights, masks, range, eps);
  const auto& s = mosaic.shape();
  require(channel >= 0 && channel < s.C, ErrorCode::invalid_argument, "bad channel index");

  const auto den = mask_denominators(masks, eps);
  const int D = range.count();
  const int H = s.H, W = s.W, V = s.V, C = s.C;
  const int uc = mosaic.center_u(), vc = mosaic.center_v();
  const int pad = mosaic.pad();
  const float* samples = mosaic.samples().data();

  tbb::parallel_for(tbb::blocked_range<int>(0, D * H), [&](const tbb::blocked_range<int>& rows) {
    AccountedVector<double> num(static_cast<std::size_t>(W));
    for (int task = rows.begin(); task != rows.end(); ++task) {
      const int di = task / H;
      const int h = task % H;
      const int d = range.value(di);
      const auto [dila_h, dila_w] = dilation_for(d, mosaic.block_rows(), mosaic.block_cols());
      const int row_base = pad + h + uc * d;
      const int col_base = pad + vc * d;
      std::fill(num.begin(), num.end(), 0.0);
      for (int u = 0; u < s.U; ++u) {
        const int row = row_base + u * dila_h;
        for (int v = 0; v < V; ++v) {
          const int k = u * V + v;
          const double wk = weights.values[k];
          const float* m = masks.view(k).data() + static_cast<std::size_t>(h) * W;
          const float* a = samples + mosaic.index(row, col_base + v * dila_w, channel);
          if (squared) {
            for (int w = 0; w < W; ++w) {
              const double x = a[static_cast<std::size_t>(w) * C];
              num[w] += wk * (x * x) * m[w];
            }
          } else {
            for (int w = 0; w < W; ++w) {
              num[w] += wk * static_cast<double>(a[static_cast<std::size_t>(w) * C]) * m[w];
            }
          }
        }
      }
      const double* den_row = den.data() + static_cast<std::size_t>(h) * W;
      for (int w = 0; w < W; ++w) num[w] /= den_row[w];
      sink(di, h, std::span<const double>(num.data(), num.size()));
    }
  });
}

}  // namespace

int required_pad(int U, int V, DispRange range) {
  require(U >= 1 && V >= 1, ErrorCode::invalid_argument, "angular extents must be >= 1");
  return std::max(row_reach(U), row_reach(V)) * range.max_abs();
}

GatherVolume::GatherVolume(DispRange range, LightFieldShape shape)
    : range_(range), shape_(shape) {
  data_.assign(static_cast<std::size_t>(range.count()) * shape.sample_count(), 0.0f);
}

GatherVolume shift_and_concat_gather(const LightField& lf, DispRange range) {
  require(range.min <= range.max, ErrorCode::invalid_argument, "empty disparity range");
  GatherVolume volume(range, lf.shape());
  const int H = lf.H(), W = lf.W(), C = lf.C(), V = lf.V();
  const int K = lf.view_count();
  const int uc = lf.center_u(), vc = lf.center_v();
  tbb::parallel_for(tbb::blocked_range<int>(0, range.count() * K),
                    [&](const tbb::blocked_range<int>& r) {
    for (int task = r.begin(); task != r.end(); ++task) {
      const int di = task / K;
      const int k = task % K;
      const int u = k / V, v = k % V;
      const int d = range.value(di);
      const int dh = (uc - u) * d;
      const int dw = (vc - v) * d;
      for (int h = 0; h < H; ++h) {
        const int hs = h + dh;
        if (hs < 0 || hs >= H) continue;  // stays zero
        for (int w = 0; w < W; ++w) {
          const int ws = w + dw;
          if (ws < 0 || ws >= W) continue;
          for (int c = 0; c < C; ++c) volume.at(di, k, h, w, c) = lf.at(u, v, hs, ws, c);
        }
      }
    }
  });
  return volume;
}

std::vector<CostVolume> mean_over_views(const GatherVolume& volume) {
  const auto& s = volume.shape();
  const int K = s.view_count();
  const int D = volume.range().count();
  std::vector<CostVolume> out;
  out.reserve(static_cast<std::size_t>(s.C));
  for (int c = 0; c < s.C; ++c) out.emplace_back(volume.range(), s.H, s.W);
  tbb::parallel_for(tbb::blocked_range<int>(0, D * s.H), [&](const tbb::blocked_range<int>& r) {
    for (int task = r.begin(); task != r.end(); ++task) {
      const int di = task / s.H;
      const int h = task % s.H;
      for (int w = 0; w < s.W; ++w) {
        for (int c = 0; c < s.C; ++c) {
          double sum = 0.0;
          for (int k = 0; k < K; ++k) sum += volume.at(di, k, h, w, c);
          out[c].at(di, h, w) = static_cast<float>(sum / K);
        }
      }
    }
  });
  return out;
}

std::vector<CostVolume> oacc_forward(const Mosaic& mosaic, const KernelWeights& weights,
                                     const MaskSet& masks, DispRange range, float eps) {
  const auto& s = mosaic.shape();
  require(s.C >= 1, ErrorCode::invalid_argument, "mosaic has no channels");
  std::vector<CostVolume> out;
  out.reserve(static_cast<std::size_t>(s.C));
  for (int c = 0; c < s.C; ++c) out.emplace_back(range, s.H, s.W);
  for (int c = 0; c < s.C; ++c) {
    CostVolume& dst = out[c];
    run_oacc(mosaic, weights, masks, range, eps, c, false,
             [&](int di, int h, std::span<const double> row) {
               float* p = &dst.at(di, h, 0);
               for (std::size_t w = 0; w < row.size(); ++w) p[w] = static_cast<float>(row[w]);
             });
  }
  return out;
}

AccountedVector<double> oacc_forward_f64(const Mosaic& mosaic, const KernelWeights& weights,
                                     const MaskSet& masks, DispRange range, float eps,
                                     int channel, bool squared) {
  const auto& s = mosaic.shape();
  AccountedVector<double> out(static_cast<std::size_t>(range.count()) * s.H * s.W);
  run_oacc(mosaic, weights, masks, range, eps, channel, squared,
           [&](int di, int h, std::span<const double> row) {
             std::copy(row.begin(), row.end(),
                       out.begin() + (static_cast<std::ptrdiff_t>(di) * s.H + h) * s.W);
           });
  return out;
}

CostVolume masked_stat_cost(const LightField& lf, const MaskSet& masks, DispRange range,
                            float eps) {
  require(lf.C() == 1, ErrorCode::invalid_argument, "masked_stat_cost expects C = 1");
  const Mosaic mosaic = build_mosaic(lf, required_pad(lf.U(), lf.V(), range));
  return masked_stat_cost(mosaic, masks, range, eps);
}

CostVolume masked_stat_cost(const Mosaic& mosaic, const MaskSet& masks, DispRange range,
                            float eps) {
  const auto& s = mosaic.shape();
  require(s.C == 1, ErrorCode::invalid_argument, "masked_stat_cost expects C = 1");
  const auto weights = KernelWeights::uniform(s.U, s.V);
  const auto first = oacc_forward_f64(mosaic, weights, masks, range, eps, 0, false);
  const auto second = oacc_forward_f64(mosaic, weights, masks, range, eps, 0, true);

  // Both passes carry the factor r = S / (S + eps), S = Σ Δm. Dividing it out
  // recovers the exact mask-weighted moments, so a constant patch has zero
  // spread instead of sqrt(eps / S).
  const std::size_t plane = static_cast<std::size_t>(s.H) * s.W;
  auto ratio = mask_sums(masks);
  for (double& r : ratio) r = r / (r + static_cast<double>(eps));

  CostVolume cost(range, s.H, s.W);
  auto out = cost.values();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r = ratio[i % plane];
    if (r <= 0.0) {
      out[i] = 0.0f;
      continue;
    }
    const double mean = first[i] / r;
    const double second_moment = second[i] / r;
    out[i] = static_cast<float>(std::sqrt(std::max(0.0, second_moment - mean * mean)));
  }
  return cost;
}

ModulatedConvGrad modulated_conv_grad(const Mosaic& mosaic, const KernelWeights& weights,
                                      const MaskSet& masks, DispRange range, float eps,
                                      std::span<const CostVolume> upstream) {
  check_operands(mosaic, weights, masks, range, eps);
  const auto& s = mosaic.shape();
  require(upstream.size() == static_cast<std::size_t>(s.C), ErrorCode::shape_mismatch,
          "upstream must hold one volume per mosaic channel");
  for (const auto& g : upstream) {
    require(g.range() == range && g.height() == s.H && g.width() == s.W,
            ErrorCode::shape_mismatch, "upstream volume must be D x H x W");
  }

  ModulatedConvGrad grad;
  grad.mosaic.assign(mosaic.samples().size(), 0.0);
  grad.weights.assign(weights.values.size(), 0.0);
  grad.masks.assign(masks.values().size(), 0.0);

  const auto den = mask_denominators(masks, eps);
  const int K = s.U * s.V;
  const int uc = mosaic.center_u(), vc = mosaic.center_v();
  const int pad = mosaic.pad();
  std::vector<std::size_t> taps(static_cast<std::size_t>(K));

  // y = N / S with N = Σ ω_k A_k m_k, S = Σ m_k + eps:
  //   ∂y/∂A_k = ω_k m_k / S, ∂y/∂ω_k = A_k m_k / S, ∂y/∂m_k = ω_k A_k / S - N / S².
  for (int c = 0; c < s.C; ++c) {
    for (int di = 0; di < range.count(); ++di) {
      const int d = range.value(di);
      const auto [dila_h, dila_w] = dilation_for(d, mosaic.block_rows(), mosaic.block_cols());
      for (int h = 0; h < s.H; ++h) {
        for (int w = 0; w < s.W; ++w) {
          const double g = upstream[c].at(di, h, w);
          if (g == 0.0) continue;
          const double S = den[static_cast<std::size_t>(h) * s.W + w];
          double N = 0.0;
          for (int u = 0; u < s.U; ++u) {
            for (int v = 0; v < s.V; ++v) {
              const int k = u * s.V + v;
              taps[k] = mosaic.index(pad + h + uc * d + u * dila_h,
                                     pad + w + vc * d + v * dila_w, c);
              N += static_cast<double>(weights.values[k]) * mosaic.samples()[taps[k]] *
                   masks.at(k, h, w);
            }
          }
          for (int k = 0; k < K; ++k) {
            const double a = mosaic.samples()[taps[k]];
            const double wk = weights.values[k];
            const double mk = masks.at(k, h, w);
            grad.mosaic[taps[k]] += g * wk * mk / S;
            grad.weights[k] += g * a * mk / S;
            grad.masks[masks.index(k, h, w)] += g * (wk * a / S - N / (S * S));
          }
        }
      }
    }
  }
  return grad;
}

}  // namespace lfoacc
