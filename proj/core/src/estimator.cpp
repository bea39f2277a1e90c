#include "lfoacc/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lfoacc/occlusion.hpp"

namespace lfoacc {

void EstimatorConfig::validate() const {
  require(range.min <= range.max, ErrorCode::invalid_argument, "empty disparity range");
  require(iterations >= 1, ErrorCode::invalid_argument, "iterations must be >= 1");
  require(q > 0.0f, ErrorCode::invalid_argument, "q must be > 0");
  require(mode != RegressionMode::softmax || alpha > 0.0f, ErrorCode::invalid_argument,
          "softmax sharpness alpha must be > 0");
  require(window >= 1 && window % 2 == 1, ErrorCode::invalid_argument,
          "aggregation window must be an odd integer >= 1");
  require(eps > 0.0f, ErrorCode::invalid_argument, "eps must be > 0");
}

CostVolume aggregate(const CostVolume& cost, int window) {
  require(window >= 1 && window % 2 == 1, ErrorCode::invalid_argument,
          "aggregation window must be an odd integer >= 1, got " + std::to_string(window));
  if (window == 1) return cost;
  const int H = cost.height(), W = cost.width(), r = window / 2;
  const double norm = 1.0 / (static_cast<double>(window) * window);
  CostVolume out(cost.range(), H, W);
  std::vector<double> rows(static_cast<std::size_t>(H) * W);
  // Clamped box filter is separable: horizontal pass, then vertical.
  for (int di = 0; di < cost.depth(); ++di) {
    for (int h = 0; h < H; ++h) {
      for (int w = 0; w < W; ++w) {
        double s = 0.0;
        for (int j = -r; j <= r; ++j) s += cost.at(di, h, std::clamp(w + j, 0, W - 1));
        rows[static_cast<std::size_t>(h) * W + w] = s;
      }
    }
    for (int h = 0; h < H; ++h) {
      for (int w = 0; w < W; ++w) {
        double s = 0.0;
        for (int i = -r; i <= r; ++i) {
          s += rows[static_cast<std::size_t>(std::clamp(h + i, 0, H - 1)) * W + w];
        }
        out.at(di, h, w) = static_cast<float>(s * norm);
      }
    }
  }
  return out;
}

DisparityMap regress(const CostVolume& cost, RegressionMode mode, float alpha) {
  const int D = cost.depth(), H = cost.height(), W = cost.width();
  const DispRange range = cost.range();
  DisparityMap out(H, W);
  out.range = range;
  if (mode == RegressionMode::argmin) {
    for (int h = 0; h < H; ++h) {
      for (int w = 0; w < W; ++w) {
        int best = 0;
        for (int di = 1; di < D; ++di) {
          if (cost.at(di, h, w) < cost.at(best, h, w)) best = di;  // strict: ties keep smaller d
        }
        out(h, w) = static_cast<float>(range.value(best));
      }
    }
    return out;
  }

  require(alpha > 0.0f, ErrorCode::invalid_argument, "softmax sharpness alpha must be > 0");
  std::vector<double> score(static_cast<std::size_t>(D));
  for (int h = 0; h < H; ++h) {
    for (int w = 0; w < W; ++w) {
      double top = -std::numeric_limits<double>::infinity();
      for (int di = 0; di < D; ++di) {
        score[di] = -static_cast<double>(alpha) * cost.at(di, h, w);
        top = std::max(top, score[di]);
      }
      double z = 0.0, acc = 0.0;
      for (int di = 0; di < D; ++di) {
        const double p = std::exp(score[di] - top);
        z += p;
        acc += p * range.value(di);
      }
      const double d = std::clamp(acc / z, static_cast<double>(range.min),
                                  static_cast<double>(range.max));
      out(h, w) = static_cast<float>(d);
    }
  }
  return out;
}

namespace {

DisparityMap run_pass(const Mosaic& mosaic, const MaskSet& masks, const EstimatorConfig& cfg) {
  const CostVolume cost = masked_stat_cost(mosaic, masks, cfg.range, cfg.eps);
  return regress(aggregate(cost, cfg.window), cfg.mode, cfg.alpha);
}

}  // namespace

EstimateResult estimate(const LightField& lf, const EstimatorConfig& config,
                        const DisparityMap* external_disparity) {
  config.validate();
  require(lf.C() == 1, ErrorCode::invalid_argument, "estimate expects a grayscale light field");
  require((config.mask_source == MaskSource::external) == (external_disparity != nullptr),
          ErrorCode::invalid_argument,
          "an external disparity is required exactly when mask source is external");

  const Mosaic mosaic = build_mosaic(lf, required_pad(lf.U(), lf.V(), config.range));

  if (config.mask_source == MaskSource::external) {
    require(external_disparity->height() == lf.H() && external_disparity->width() == lf.W(),
            ErrorCode::shape_mismatch, "external disparity must match the SAI extents");
    MaskSet masks = compute_masks(lf, *external_disparity, config.q);
    DisparityMap disp = run_pass(mosaic, masks, config);
    return EstimateResult{disp, std::move(masks), {disp}};
  }

  MaskSet masks = MaskSet::ones(lf.view_count(), lf.H(), lf.W());
  std::vector<DisparityMap> trace;
  trace.push_back(run_pass(mosaic, masks, config));
  if (config.mask_source == MaskSource::iterative) {
    for (int it = 1; it < config.iterations; ++it) {
      masks = compute_masks(lf, trace.back(), config.q);
      trace.push_back(run_pass(mosaic, masks, config));
    }
  }
  DisparityMap final_map = trace.back();
  return EstimateResult{std::move(final_map), std::move(masks), std::move(trace)};
}

}  // namespace lfoacc
