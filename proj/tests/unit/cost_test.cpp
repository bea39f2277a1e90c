#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "lfoacc/cost.hpp"
#include "lfoacc/memory.hpp"
#include "lfoacc/synth.hpp"
#include "test_support.hpp"

namespace lfoacc {
namespace {

using namespace lfoacc::testing;

TEST(DilationFor, ZeroAndUnitDisparityOn512) {
  EXPECT_EQ(dilation_for(0, 512, 512), std::make_pair(512, 512));
  EXPECT_EQ(dilation_for(1, 512, 512), std::make_pair(511, 511));
}

TEST(DilationFor, NegativeDisparityOnPaddedSai) {
  // 8x8 SAIs padded by 8 on each side.
  EXPECT_EQ(dilation_for(-2, 8 + 16, 8 + 16), std::make_pair(26, 26));
}

TEST(DilationFor, RejectsNonPositiveDilation) {
  EXPECT_THROW(dilation_for(8, 8, 10), Error);
  EXPECT_THROW(dilation_for(10, 12, 10), Error);
  EXPECT_NO_THROW(dilation_for(7, 8, 8));
}

TEST(RequiredPad, CoversTheFarthestView) {
  EXPECT_EQ(required_pad(9, 9, DispRange{-4, 4}), 16);
  EXPECT_EQ(required_pad(3, 3, DispRange{-1, 2}), 2);
  EXPECT_EQ(required_pad(4, 2, DispRange{-1, 1}), 2);  // u_c = 1, U-1-u_c = 2
  EXPECT_EQ(required_pad(1, 1, DispRange{-4, 4}), 0);
}

TEST(ShiftAndConcat, ZeroDisparitySliceIsTheLightField) {
  const auto lf = random_light_field({3, 3, 5, 6, 2}, 1);
  const auto vol = shift_and_concat_gather(lf, DispRange{0, 0});
  for (int k = 0; k < 9; ++k)
    for (int h = 0; h < 5; ++h)
      for (int w = 0; w < 6; ++w)
        for (int c = 0; c < 2; ++c) ASSERT_EQ(vol.at(0, k, h, w, c), lf.at(k / 3, k % 3, h, w, c));
}

TEST(ShiftAndConcat, ConstantFieldIsZeroOnlyWhereShiftedOut) {
  const auto lf = constant_light_field({3, 3, 6, 6, 1}, 0.7f);
  const DispRange range{-2, 2};
  const auto vol = shift_and_concat_gather(lf, range);
  for (int di = 0; di < range.count(); ++di) {
    const int d = range.value(di);
    for (int k = 0; k < 9; ++k)
      for (int h = 0; h < 6; ++h)
        for (int w = 0; w < 6; ++w) {
          const int hs = h + (1 - k / 3) * d, ws = w + (1 - k % 3) * d;
          const bool inside = hs >= 0 && hs < 6 && ws >= 0 && ws < 6;
          ASSERT_EQ(vol.at(di, k, h, w), inside ? 0.7f : 0.0f);
        }
  }
}

TEST(ShiftAndConcat, EqualsAngularPatchAtEveryEntry) {
  const auto lf = random_light_field({3, 3, 8, 8, 1}, 21);
  const DispRange range{-2, 2};
  const auto vol = shift_and_concat_gather(lf, range);
  for (int di = 0; di < range.count(); ++di)
    for (int h = 0; h < 8; ++h)
      for (int w = 0; w < 8; ++w) {
        const auto patch = angular_patch(lf, h, w, range.value(di));
        for (int k = 0; k < 9; ++k) ASSERT_EQ(vol.at(di, k, h, w), patch.values[k]);
      }
}

TEST(OaccForward, UnitWeightsAllOnesMatchShiftAndConcatMean) {
  const auto lf = random_light_field({5, 5, 12, 10, 2}, 33);
  const DispRange range{-3, 3};
  const auto mosaic = build_mosaic(lf, required_pad(5, 5, range));
  const auto out = oacc_forward(mosaic, KernelWeights::uniform(5, 5), MaskSet::ones(25, 12, 10),
                                range);
  const auto ref = mean_over_views(shift_and_concat_gather(lf, range));
  ASSERT_EQ(out.size(), 2u);
  for (int c = 0; c < 2; ++c) {
    for (std::size_t i = 0; i < ref[c].values().size(); ++i) {
      ASSERT_NEAR(out[c].values()[i], ref[c].values()[i], 1e-6);
    }
  }
}

TEST(OaccForward, AllZeroMasksGiveZero) {
  const auto lf = random_light_field({3, 3, 6, 6, 1}, 2);
  const DispRange range{-1, 1};
  const auto out = oacc_forward(build_mosaic(lf, 1), KernelWeights::uniform(3, 3),
                                MaskSet(9, 6, 6, 0.0f), range);
  for (float x : out[0].values()) {
    ASSERT_TRUE(std::isfinite(x));
    ASSERT_EQ(x, 0.0f);
  }
}

TEST(OaccForward, ConstantFieldReturnsTheConstantAwayFromBorders) {
  const float x = 0.37f;
  const auto lf = constant_light_field({3, 3, 10, 10, 1}, x);
  const DispRange range{-2, 2};
  const auto masks = random_masks(9, 10, 10, 5, 0.05f, 1.0f);
  const auto out = oacc_forward(build_mosaic(lf, 2), KernelWeights::uniform(3, 3), masks, range);
  // Interior pixels see only in-bounds samples for every d.
  for (int di = 0; di < range.count(); ++di)
    for (int h = 2; h < 8; ++h)
      for (int w = 2; w < 8; ++w) ASSERT_NEAR(out[0].at(di, h, w), x, 1e-6);
}

TEST(OaccForward, RejectsInsufficientPadAndBadOperands) {
  const auto lf = random_light_field({3, 3, 6, 6, 1}, 2);
  const DispRange range{-2, 2};
  const auto masks = MaskSet::ones(9, 6, 6);
  try {
    oacc_forward(build_mosaic(lf, 1), KernelWeights::uniform(3, 3), masks, range);
    FAIL() << "expected a precondition error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::precondition);
  }
  EXPECT_THROW(oacc_forward(build_mosaic(lf, 2), KernelWeights::uniform(3, 2), masks, range), Error);
  EXPECT_THROW(oacc_forward(build_mosaic(lf, 2), KernelWeights::uniform(3, 3), MaskSet::ones(9, 5, 6),
                            range),
               Error);
  EXPECT_THROW(oacc_forward(build_mosaic(lf, 2), KernelWeights::uniform(3, 3), masks, range, 0.0f),
               Error);
}

TEST(OaccForward, GeneralWeightsAndMasksMatchBruteForce) {
  const auto lf = random_light_field({3, 5, 7, 9, 1}, 8);
  const DispRange range{-2, 1};
  KernelWeights weights = KernelWeights::uniform(3, 5);
  std::mt19937 rng(4);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  for (float& w : weights.values) w = dist(rng);
  const auto masks = random_masks(15, 7, 9, 6);
  const auto out = oacc_forward(build_mosaic(lf, required_pad(3, 5, range)), weights, masks, range);
  for (int di = 0; di < range.count(); ++di)
    for (int h = 0; h < 7; ++h)
      for (int w = 0; w < 9; ++w) {
        double num = 0.0, den = 1e-8;
        for (int k = 0; k < 15; ++k) {
          const double m = masks.at(k, h, w);
          num += weights.values[k] * brute_sample(lf, k / 5, k % 5, h, w, range.value(di)) * m;
          den += m;
        }
        ASSERT_NEAR(out[0].at(di, h, w), num / den, 1e-6);
      }
}

// Property: on random fields across angular sizes, the dilated kernel equals
// the shift-and-concat mean.
TEST(OaccForward, OracleEquivalenceProperty) {
  std::mt19937 rng(2024);
  const int angular[] = {3, 5, 9};
  for (int trial = 0; trial < 12; ++trial) {
    const int U = angular[rng() % 3], V = angular[rng() % 3];
    const int H = 8 + static_cast<int>(rng() % 25), W = 8 + static_cast<int>(rng() % 25);
    const int lo = -static_cast<int>(rng() % 5), hi = static_cast<int>(rng() % 5);
    const DispRange range{lo, hi};
    const auto lf = random_light_field({U, V, H, W, 1}, rng());
    const auto out = oacc_forward(build_mosaic(lf, required_pad(U, V, range)),
                                  KernelWeights::uniform(U, V), MaskSet::ones(U * V, H, W), range);
    const auto ref = mean_over_views(shift_and_concat_gather(lf, range));
    for (std::size_t i = 0; i < ref[0].values().size(); ++i) {
      ASSERT_NEAR(out[0].values()[i], ref[0].values()[i], 1e-6)
          << U << "x" << V << "x" << H << "x" << W << " [" << lo << "," << hi << "]";
    }
  }
}

TEST(OaccForward, MaskScaleInvariance) {
  std::mt19937 rng(99);
  for (int trial = 0; trial < 6; ++trial) {
    const auto lf = random_light_field({5, 5, 10, 10, 1}, rng());
    const DispRange range{-2, 2};
    const auto mosaic = build_mosaic(lf, required_pad(5, 5, range));
    const auto masks = random_masks(25, 10, 10, rng(), 0.1f, 1.0f);
    const auto base = oacc_forward(mosaic, KernelWeights::uniform(5, 5), masks, range);
    for (float c : {1.0f, 0.5f, 0.1f, 0.01f}) {
      const auto scaled = oacc_forward(mosaic, KernelWeights::uniform(5, 5), masks.scaled(c), range);
      for (std::size_t i = 0; i < base[0].values().size(); ++i) {
        ASSERT_NEAR(scaled[0].values()[i], base[0].values()[i], 1e-5) << "c=" << c;
      }
    }
  }
}

TEST(OaccForward, ZeroMaskRemovesAView) {
  const auto lf = random_light_field({3, 3, 8, 8, 1}, 17);
  const DispRange range{-1, 2};
  MaskSet masks = random_masks(9, 8, 8, 3, 0.2f, 1.0f);
  const int dropped = 2;
  for (int h = 0; h < 8; ++h)
    for (int w = 0; w < 8; ++w) masks.at(dropped, h, w) = 0.0f;
  const auto out = oacc_forward(build_mosaic(lf, required_pad(3, 3, range)),
                                KernelWeights::uniform(3, 3), masks, range);
  for (int di = 0; di < range.count(); ++di)
    for (int h = 0; h < 8; ++h)
      for (int w = 0; w < 8; ++w) {
        double num = 0.0, den = 0.0;
        for (int k = 0; k < 9; ++k) {
          if (k == dropped) continue;
          num += masks.at(k, h, w) * brute_sample(lf, k / 3, k % 3, h, w, range.value(di));
          den += masks.at(k, h, w);
        }
        ASSERT_NEAR(out[0].at(di, h, w), num / den, 1e-6);
      }
}

TEST(OaccForward, DeterministicAcrossRuns) {
  const auto lf = random_light_field({5, 5, 16, 16, 1}, 3);
  const DispRange range{-2, 2};
  const auto mosaic = build_mosaic(lf, required_pad(5, 5, range));
  const auto masks = random_masks(25, 16, 16, 1);
  const auto a = oacc_forward(mosaic, KernelWeights::uniform(5, 5), masks, range);
  const auto b = oacc_forward(mosaic, KernelWeights::uniform(5, 5), masks, range);
  EXPECT_TRUE(a[0] == b[0]);
}

TEST(OaccForward, AuxiliaryMemoryExcludesTheGatherVolume) {
  const LightFieldShape shape{9, 9, 32, 32, 1};
  const auto lf = random_light_field(shape, 12);
  const DispRange range{-4, 4};
  const auto mosaic = build_mosaic(lf, required_pad(9, 9, range));
  const auto masks = MaskSet::ones(81, 32, 32);
  const auto weights = KernelWeights::uniform(9, 9);

  std::size_t oacc_peak = 0;
  {
    PeakScope scope;
    const auto out = oacc_forward(mosaic, weights, masks, range);
    oacc_peak = scope.peak_above_baseline();
  }
  const std::size_t volume_bytes =
      static_cast<std::size_t>(range.count()) * shape.sample_count() * sizeof(float);
  const std::size_t output_bytes = static_cast<std::size_t>(range.count()) * 32 * 32 * sizeof(float);
  EXPECT_GT(oacc_peak, output_bytes - 1);
  EXPECT_LE(oacc_peak, 2 * mosaic.byte_size() + output_bytes);
  EXPECT_LT(oacc_peak, volume_bytes);

  std::size_t gather_peak = 0;
  {
    PeakScope scope;
    const auto vol = shift_and_concat_gather(lf, range);
    gather_peak = scope.peak_above_baseline();
  }
  EXPECT_GE(gather_peak, volume_bytes);
}

TEST(MaskedStatCost, ZeroAtTruthOnNoiseFreeSinglePlane) {
  const auto scene = render(single_plane(5, 5, 20, 20, 1), 3);
  const DispRange range{-2, 2};
  const auto cost = masked_stat_cost(scene.light_field, MaskSet::ones(25, 20, 20), range);
  const int di = 1 - range.min;
  // Pixels whose patch at d = 1 stays inside the SAI for every view.
  for (int h = 2; h < 18; ++h)
    for (int w = 2; w < 18; ++w) ASSERT_NEAR(cost.at(di, h, w), 0.0f, 1e-6f);
}

TEST(MaskedStatCost, MatchesBruteForceMaskedStd) {
  const auto lf = random_light_field({3, 3, 9, 9, 1}, 61);
  const DispRange range{-2, 2};
  const auto masks = random_masks(9, 9, 9, 31, 0.0f, 1.0f);
  const auto cost = masked_stat_cost(lf, masks, range);
  for (int di = 0; di < range.count(); ++di)
    for (int h = 0; h < 9; ++h)
      for (int w = 0; w < 9; ++w)
        ASSERT_NEAR(cost.at(di, h, w), brute_masked_std(lf, masks, h, w, range.value(di)), 1e-6);
}

TEST(MaskedStatCost, HalvedMasksGiveTheSameVolume) {
  const auto lf = random_light_field({5, 5, 12, 12, 1}, 41);
  const DispRange range{-2, 2};
  const auto masks = random_masks(25, 12, 12, 9, 0.1f, 1.0f);
  const auto a = masked_stat_cost(lf, masks, range);
  const auto b = masked_stat_cost(lf, masks.scaled(0.5f), range);
  for (std::size_t i = 0; i < a.values().size(); ++i) ASSERT_NEAR(a.values()[i], b.values()[i], 1e-6);
}

TEST(MaskedStatCost, GroundTruthMasksRescueOccludedPixels) {
  SceneSpec spec = two_plane(7, 7, 32, 32, 3, 0, 5);
  const auto scene = render(spec, 2);
  const DispRange range{-1, 4};
  const auto unmasked = masked_stat_cost(scene.light_field, MaskSet::ones(49, 32, 32), range);
  const auto masked = masked_stat_cost(scene.light_field, scene.truth.occ_masks, range);

  auto argmin = [&](const CostVolume& cost, int h, int w) {
    int best = 0;
    for (int di = 1; di < cost.depth(); ++di)
      if (cost.at(di, h, w) < cost.at(best, h, w)) best = di;
    return range.value(best);
  };

  int wrong_unmasked = 0, checked = 0;
  for (int h = 0; h < 32; ++h) {
    for (int w = 0; w < 32; ++w) {
      int visible = 0;
      for (int k = 0; k < 49; ++k) visible += scene.truth.occ_masks.at(k, h, w) > 0.5f;
      if (visible == 49 || visible < 25) continue;
      const int gt = static_cast<int>(scene.truth.disparity(h, w));
      EXPECT_EQ(argmin(masked, h, w), gt) << h << "," << w;
      wrong_unmasked += argmin(unmasked, h, w) != gt;
      ++checked;
    }
  }
  ASSERT_GT(checked, 0);
  EXPECT_GT(wrong_unmasked, 0);
}

TEST(ModulatedConvGrad, ZeroUpstreamGivesZeroGradients) {
  const auto lf = random_light_field({3, 3, 4, 4, 1}, 1);
  const DispRange range{-1, 1};
  std::vector<CostVolume> upstream{CostVolume(range, 4, 4, 0.0f)};
  const auto g = modulated_conv_grad(build_mosaic(lf, 1), KernelWeights::uniform(3, 3),
                                     random_masks(9, 4, 4, 2), range, 1e-8f, upstream);
  for (double x : g.mosaic) ASSERT_EQ(x, 0.0);
  for (double x : g.weights) ASSERT_EQ(x, 0.0);
  for (double x : g.masks) ASSERT_EQ(x, 0.0);
}

double relative_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

TEST(ModulatedConvGrad, SinglePixelUpstreamMatchesFiniteDifferences) {
  const LightFieldShape shape{3, 3, 4, 4, 1};
  const auto lf = random_light_field(shape, 77);
  const DispRange range{-1, 1};
  const auto mosaic = build_mosaic(lf, 1);
  KernelWeights weights = KernelWeights::uniform(3, 3);
  std::mt19937 rng(5);
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  for (float& w : weights.values) w = dist(rng);
  const auto masks = random_masks(9, 4, 4, 8, 0.1f, 1.0f);
  std::vector<CostVolume> upstream{CostVolume(range, 4, 4, 0.0f)};
  upstream[0].at(2, 1, 2) = 1.0f;

  const auto g = modulated_conv_grad(mosaic, weights, masks, range, 1e-8f, upstream);

  ShadowProblem p;
  p.shape = shape;
  p.pad = 1;
  p.range = range;
  p.eps = static_cast<double>(1e-8f);
  p.mosaic.assign(mosaic.samples().begin(), mosaic.samples().end());
  p.weights.assign(weights.values.begin(), weights.values.end());
  p.masks.assign(masks.values().begin(), masks.values().end());
  p.upstream.assign(upstream[0].values().begin(), upstream[0].values().end());

  for (std::size_t i = 0; i < p.mosaic.size(); ++i)
    ASSERT_LE(relative_error(g.mosaic[i], central_difference(p, p.mosaic, i)), 1e-4) << "mosaic " << i;
  for (std::size_t i = 0; i < p.weights.size(); ++i)
    ASSERT_LE(relative_error(g.weights[i], central_difference(p, p.weights, i)), 1e-4) << "w " << i;
  for (std::size_t i = 0; i < p.masks.size(); ++i)
    ASSERT_LE(relative_error(g.masks[i], central_difference(p, p.masks, i)), 1e-4) << "m " << i;
}

TEST(ModulatedConvGrad, CenterMaskGradientFiniteWithAllOnes) {
  const auto lf = random_light_field({3, 3, 4, 4, 1}, 3);
  const DispRange range{-1, 1};
  std::vector<CostVolume> upstream{CostVolume(range, 4, 4, 1.0f)};
  const auto g = modulated_conv_grad(build_mosaic(lf, 1), KernelWeights::uniform(3, 3),
                                     MaskSet::ones(9, 4, 4), range, 1e-8f, upstream);
  for (int h = 0; h < 4; ++h)
    for (int w = 0; w < 4; ++w) EXPECT_TRUE(std::isfinite(g.masks[(4 * 4) * 4 + h * 4 + w]));
}

}  // namespace
}  // namespace lfoacc
