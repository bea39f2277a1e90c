#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "lfoacc/synth.hpp"
#include "test_support.hpp"

namespace lfoacc {
namespace {

double patch_std(const AngularPatch& p) {
  double mean = 0.0;
  for (float x : p.values) mean += x;
  mean /= p.values.size();
  double var = 0.0;
  for (float x : p.values) var += (x - mean) * (x - mean);
  return std::sqrt(var / p.values.size());
}

TEST(Render, FlatSceneHasNoParallax) {
  const auto scene = render(testing::single_plane(5, 5, 12, 10, 0), 3);
  const auto& lf = scene.light_field;
  const auto center = lf.sai(2, 2);
  for (int u = 0; u < 5; ++u)
    for (int v = 0; v < 5; ++v) {
      const auto view = lf.sai(u, v);
      EXPECT_TRUE(std::equal(view.begin(), view.end(), center.begin()));
    }
  for (float m : scene.truth.occ_masks.values()) EXPECT_EQ(m, 1.0f);
  for (float d : scene.truth.disparity.values.values()) EXPECT_EQ(d, 0.0f);
}

TEST(Render, ShadowBandsMatchClosedForm) {
  // Square [12, 20)^2 at d = 2 over background at d = 0, 9x9 views. A
  // background point (h, w) is hidden in view (u, v) iff the square covers
  // it there: (h - 2(uc-u), w - 2(vc-v)) lies inside the square.
  SceneSpec spec;
  spec.U = spec.V = 9;
  spec.H = spec.W = 32;
  spec.layers.push_back(Layer{2, Region::rect(12, 12, 20, 20), testing::noise_texture(4)});
  spec.layers.push_back(Layer{0, Region::full(), testing::noise_texture(5)});
  const auto scene = render(spec, 1);
  const auto& masks = scene.truth.occ_masks;
  auto in_square = [](int h, int w) { return h >= 12 && h < 20 && w >= 12 && w < 20; };
  for (int u = 0; u < 9; ++u) {
    for (int v = 0; v < 9; ++v) {
      const int k = u * 9 + v;
      const int du = 4 - u, dv = 4 - v;
      int zeros_in_column = 0;
      for (int h = 0; h < 32; ++h) {
        for (int w = 0; w < 32; ++w) {
          float expected;
          if (in_square(h, w)) {
            const int hk = h + 2 * du, wk = w + 2 * dv;
            expected = (hk >= 0 && hk < 32 && wk >= 0 && wk < 32) ? 1.0f : 0.0f;
          } else {
            expected = in_square(h - 2 * du, w - 2 * dv) ? 0.0f : 1.0f;
          }
          ASSERT_EQ(masks.at(k, h, w), expected) << "view " << k << " at " << h << "," << w;
        }
        if (dv == 0 && masks.at(k, h, 15) == 0.0f) ++zeros_in_column;
      }
      // Pure vertical parallax: the band past the square is 2|uc-u| rows.
      if (dv == 0) EXPECT_EQ(zeros_in_column, std::min(8, 2 * std::abs(du)));
    }
  }
}

TEST(Render, NonOccludedBackgroundPatchIsConstantAtTruth) {
  // Square [12, 36)^2 at d = 2 shifts by at most 8 px, so (1, 1) is never covered.
  const auto scene = render(testing::two_plane(9, 9, 48, 48, 2, 0, 8), 2);
  for (int k = 0; k < 81; ++k) ASSERT_EQ(scene.truth.occ_masks.at(k, 1, 1), 1.0f);
  const auto patch = angular_patch(scene.light_field, 1, 1, 0);
  for (float x : patch.values) EXPECT_EQ(x, patch.values[0]);
}

TEST(Render, GroundTruthDisparityIsAlwaysALayerDisparity) {
  const auto spec = testing::occluded_scene(4);
  const auto scene = render(spec, 4);
  for (float d : scene.truth.disparity.values.values()) {
    bool found = false;
    for (const auto& layer : spec.layers) found |= (d == static_cast<float>(layer.disparity));
    EXPECT_TRUE(found) << d;
  }
  const int center = scene.light_field.center_view();
  for (int h = 0; h < spec.H; ++h)
    for (int w = 0; w < spec.W; ++w) EXPECT_EQ(scene.truth.occ_masks.at(center, h, w), 1.0f);
}

TEST(Render, AngularConsistencyAtTruth) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto spec = testing::occluded_scene(seed, 3, 32, 7);
    const auto scene = render(spec, seed);
    const auto& lf = scene.light_field;
    const auto& truth = scene.truth;
    int occluded_textured = 0, occluded_positive = 0;
    for (int h = 0; h < lf.H(); ++h) {
      for (int w = 0; w < lf.W(); ++w) {
        const int d = static_cast<int>(truth.disparity(h, w));
        // Masked std at the truth with the true masks vanishes everywhere.
        ASSERT_EQ(testing::brute_masked_std(lf, truth.occ_masks, h, w, d), 0.0) << h << "," << w;
        bool all_visible = true;
        for (int k = 0; k < lf.view_count(); ++k) all_visible &= truth.occ_masks.at(k, h, w) == 1.0f;
        const double s = patch_std(angular_patch(lf, h, w, d));
        if (all_visible) {
          ASSERT_EQ(s, 0.0) << h << "," << w;
        } else {
          ++occluded_textured;
          occluded_positive += s > 0.0;
        }
      }
    }
    ASSERT_GT(occluded_textured, 0);
    // Value noise can coincide at isolated samples, but not across a patch.
    EXPECT_EQ(occluded_positive, occluded_textured);
  }
}

TEST(Render, IsDeterministic) {
  auto spec = testing::occluded_scene(9, 3, 24, 5, -1, 0.05f);
  const auto a = render(spec, 17);
  const auto b = render(spec, 17);
  EXPECT_EQ(a.light_field, b.light_field);
  EXPECT_TRUE(std::ranges::equal(a.truth.occ_masks.values(), b.truth.occ_masks.values()));
  EXPECT_NE(render(spec, 18).light_field, a.light_field);
}

TEST(Render, NoiseStaysInUnitRange) {
  auto spec = testing::single_plane(3, 3, 16, 16, 1);
  spec.noise_sigma = 0.5f;
  const auto scene = render(spec, 1);
  for (float x : scene.light_field.samples()) {
    EXPECT_GE(x, 0.0f);
    EXPECT_LE(x, 1.0f);
  }
}

TEST(Render, RejectsInvalidSpecs) {
  SceneSpec spec;
  EXPECT_THROW(render(spec, 1), Error);  // no layers
  spec.layers.push_back(Layer{0, Region::rect(0, 0, 2, 2), {}});
  EXPECT_THROW(render(spec, 1), Error);  // missing background
}

TEST(SceneSpecText, ParsesLayersInOrder) {
  const auto spec = parse_scene_spec(
      "U = 5\nV = 5\nH = 20\nW = 24\nnoise_sigma = 0.01\ndisp_min = -2\ndisp_max = 3\n"
      "layer = rect 2 3 10 12 disp=2 texture=stripes scale=5 seed=3\n"
      "layer = disk 10 10 4 disp=1 texture=constant level=0.25\n"
      "background = disp=-1 texture=noise scale=2.5 seed=9\n");
  EXPECT_EQ(spec.H, 20);
  EXPECT_EQ(spec.W, 24);
  EXPECT_FLOAT_EQ(spec.noise_sigma, 0.01f);
  EXPECT_EQ(spec.range, (DispRange{-2, 3}));
  ASSERT_EQ(spec.layers.size(), 3u);
  EXPECT_EQ(spec.layers[0].region.kind, Region::Kind::rect);
  EXPECT_EQ(spec.layers[0].region.bottom, 10);
  EXPECT_EQ(spec.layers[0].texture.pattern, Texture::Pattern::stripes);
  EXPECT_EQ(spec.layers[1].region.kind, Region::Kind::disk);
  EXPECT_FLOAT_EQ(spec.layers[1].texture.level, 0.25f);
  EXPECT_EQ(spec.layers[2].disparity, -1);
  EXPECT_EQ(spec.layers[2].texture.seed, 9u);
}

TEST(SceneSpecText, RejectsNonIntegerDisparity) {
  try {
    parse_scene_spec("background = disp=1.5\n");
    FAIL() << "expected rejection";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
  }
}

TEST(SceneSpecText, RejectsMalformedLines) {
  EXPECT_THROW(parse_scene_spec("U = 3\n"), Error);  // no background
  EXPECT_THROW(parse_scene_spec("background = disp=0\nbackground = disp=1\n"), Error);
  EXPECT_THROW(parse_scene_spec("layer = triangle 1 2 3 disp=1\nbackground = disp=0\n"), Error);
  EXPECT_THROW(parse_scene_spec("layer = rect 1 2 3 disp=1\nbackground = disp=0\n"), Error);
  EXPECT_THROW(parse_scene_spec("colour = 3\nbackground = disp=0\n"), Error);
}

}  // namespace
}  // namespace lfoacc
