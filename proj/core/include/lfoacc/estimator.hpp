#pragma once

#include <vector>

#include "lfoacc/cost.hpp"
#include "lfoacc/disparity.hpp"
#include "lfoacc/light_field.hpp"

namespace lfoacc {

enum class RegressionMode { softmax, argmin };
enum class MaskSource { all_ones, iterative, external };

struct EstimatorConfig {
  DispRange range{-4, 4};
  int iterations = 2;
  float q = 2.0f;
  RegressionMode mode = RegressionMode::softmax;
  float alpha = 10.0f;
  int window = 5;
  MaskSource mask_source = MaskSource::iterative;
  float eps = kDefaultMaskEps;

  void validate() const;
};

/// Per-slice box mean over a window×window neighbourhood, clamping at edges.
CostVolume aggregate(const CostVolume& cost, int window);

/// softmax: Σ_k d_k softmax_k(-alpha * cost). argmin: smallest-cost d, ties
/// resolved toward the smaller disparity.
DisparityMap regress(const CostVolume& cost, RegressionMode mode, float alpha = 10.0f);

struct EstimateResult {
  DisparityMap disparity;
  MaskSet masks;
  std::vector<DisparityMap> trace;  // one map per iteration
};

/// Cost construction, aggregation and regression, alternating with mask
/// updates. The first pass assumes no occlusion (all-ones masks); each later
/// pass derives masks from the previous disparity. In `external` mode the
/// masks come from `external_disparity` and a single pass runs.
EstimateResult estimate(const LightField& lf, const EstimatorConfig& config,
                        const DisparityMap* external_disparity = nullptr);

}  // namespace lfoacc
