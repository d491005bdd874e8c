#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "dpdisp/conversion.hpp"
#include "dpdisp/error.hpp"
#include "dpdisp/matching.hpp"
#include "dpdisp/optics.hpp"
#include "dpdisp/parallel.hpp"
#include "dpdisp/scenes.hpp"

using namespace dpdisp;

namespace {

CameraParams camera() { return CameraParams::from_f_number(0.025, 2.0, 2.0, calibrated_alpha()); }

double sum(const GridD& g) { return std::accumulate(g.values().begin(), g.values().end(), 0.0); }

GridD mirror(const GridD& g) {
  GridD m(g.width(), g.height());
  for (int y = 0; y < g.height(); ++y) {
    for (int x = 0; x < g.width(); ++x) m(x, y) = g(g.width() - 1 - x, y);
  }
  return m;
}

double median(std::vector<double> v) {
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST(Psf, InFocusIsDelta) {
  const auto psf = make_psf_pair(2.0, camera());
  EXPECT_EQ(psf.support(), 1);
  EXPECT_EQ(psf.left, psf.right);
  EXPECT_EQ(psf.left(0, 0), 1.0);
}

TEST(Psf, NormalizedAndMirrored) {
  for (double z : {0.6, 1.0, 1.5, 1.9, 2.2, 3.0, 8.0, 50.0}) {
    const auto psf = make_psf_pair(z, camera());
    EXPECT_NEAR(sum(psf.left), 1.0, 1e-12) << z;
    EXPECT_NEAR(sum(psf.right), 1.0, 1e-12) << z;
    ASSERT_EQ(psf.left.width(), psf.right.width());
    for (double v : psf.left.values()) EXPECT_GE(v, 0.0);
    const auto m = mirror(psf.right);
    for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(psf.left[i], m[i], 1e-9);
  }
}

TEST(Psf, InvertsAcrossFocalPlane) {
  const auto cam = camera();
  const double delta = 0.2;  // 1/m
  const auto near = make_psf_pair(1.0 / (0.5 + delta), cam);
  const auto far = make_psf_pair(1.0 / (0.5 - delta), cam);
  EXPECT_NEAR(near.radius, -far.radius, 1e-9);
  ASSERT_EQ(near.support(), far.support());
  const auto m = mirror(far.left);
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_NEAR(near.left[i], m[i], 1e-9);
}

TEST(Psf, CentroidSeparationIsLinearInDisparity) {
  const auto cam = camera();
  std::vector<double> xs;
  std::vector<double> ys;
  for (double z = 0.7; z < 12.0; z *= 1.15) {
    const auto psf = make_psf_pair(z, cam);
    if (std::abs(psf.radius) < 0.5) continue;
    xs.push_back(disparity_from_depth(z, cam));
    ys.push_back(kernel_centroid_x(psf.right) - kernel_centroid_x(psf.left));
  }
  ASSERT_GE(xs.size(), 10u);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  EXPECT_GE(sxy * sxy / (sxx * syy), 0.99);
  // The calibrated alpha predicts the matched shift, which exceeds the centroid separation.
  EXPECT_NEAR(sxy / sxx, 1.0 / kMatchingGain, 0.05);
}

TEST(Psf, SeparationMonotoneInDefocus) {
  const auto cam = camera();
  for (double sign : {-1.0, 1.0}) {
    double prev = 0.0;
    for (double delta = 0.0; delta < 0.45; delta += 0.01) {
      const auto psf = make_psf_pair(1.0 / (0.5 + sign * delta), cam);
      const double sep = std::abs(kernel_centroid_x(psf.right) - kernel_centroid_x(psf.left));
      EXPECT_GE(sep + 1e-12, prev) << delta;
      prev = sep;
    }
  }
}

TEST(Psf, OversizedRadiusIsASimulationError) {
  EXPECT_THROW(make_psf_pair(0.1, camera(), kDefaultPixelPitch, 8.0), SimulationError);
  EXPECT_THROW(make_psf_pair(-1.0, camera()), SimulationError);
}

TEST(Chart, DensityZeroIsBlack) {
  const auto c = render_random_dot_chart(32, 16, 0.0, 1);
  EXPECT_EQ(sum(c), 0.0);
}

TEST(Chart, Deterministic) {
  EXPECT_EQ(render_random_dot_chart(64, 48, 0.25, 9), render_random_dot_chart(64, 48, 0.25, 9));
  EXPECT_NE(render_random_dot_chart(64, 48, 0.25, 9), render_random_dot_chart(64, 48, 0.25, 10));
}

TEST(Chart, BrightFractionMatchesDensity) {
  const auto c = render_random_dot_chart(256, 256, 0.25, 4);
  std::size_t bright = 0;
  for (double v : c.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    bright += v >= 0.5;
  }
  EXPECT_NEAR(static_cast<double>(bright) / static_cast<double>(c.size()), 0.25, 0.02);
}

TEST(Chart, RejectsBadDensity) {
  EXPECT_THROW(render_random_dot_chart(8, 8, 1.0, 1), ConfigError);
  EXPECT_THROW(render_random_dot_chart(8, 8, -0.1, 1), ConfigError);
}

TEST(Simulate, InFocusReproducesInput) {
  const auto cam = camera();
  const Image img(render_random_dot_chart(48, 40, 0.25, 2));
  const auto pair = simulate_dp(img, DepthMap::dense(GridD(48, 40, cam.focus_distance)), cam);
  EXPECT_EQ(pair.left, img.channel(0));
  EXPECT_EQ(pair.right, img.channel(0));
  ASSERT_TRUE(pair.guide.has_value());
}

TEST(Simulate, DimensionMismatch) {
  const Image img(GridD(8, 8, 0.5));
  EXPECT_THROW(simulate_dp(img, DepthMap::dense(GridD(8, 7, 2.0)), camera()), SimulationError);
}

TEST(Simulate, ConstantDepthMatchesThinLensDisparity) {
  const auto cam = camera();
  for (double z : {1.4, 3.0}) {
    const Image img(render_random_dot_chart(128, 96, 0.25, 6));
    const auto pair = simulate_dp(img, DepthMap::dense(GridD(128, 96, z)), cam);
    MatchConfig mc;
    auto mask = edge_mask(pair.left, mc);
    const int margin = mc.window / 2 + 2;
    for (int y = 0; y < 96; ++y) {
      for (int x = 0; x < 128; ++x) {
        if (x < margin || y < margin || x >= 128 - margin || y >= 96 - margin) mask.values(x, y) = 0.0;
      }
    }
    const auto d = template_match(pair, mask, mc);
    std::vector<double> v;
    for (std::size_t i = 0; i < d.values.size(); ++i) {
      if (d.valid[i]) v.push_back(d.values[i]);
    }
    ASSERT_GT(v.size(), 500u);
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    EXPECT_NEAR(mean, disparity_from_depth(z, cam), 0.5) << "z = " << z;
  }
}

TEST(Simulate, TwoPlaneSignsDiffer) {
  const auto cam = camera();
  SceneOptions opts;
  opts.width = 160;
  opts.height = 96;
  opts.near_depth = 1.4;
  opts.far_depth = 3.0;
  const auto scene = make_scene(SceneKind::kTwoPlane, opts, 3);
  const auto pair = simulate_dp(scene.image, scene.depth, cam);
  MatchConfig mc;
  const auto d = template_match(pair, edge_mask(pair.left, mc), mc);
  std::vector<double> left_half;
  std::vector<double> right_half;
  for (int y = 20; y < 76; ++y) {
    for (int x = 16; x < 64; ++x) {
      if (d.is_valid(x, y)) left_half.push_back(d.values(x, y));
      if (d.is_valid(x + 80, y)) right_half.push_back(d.values(x + 80, y));
    }
  }
  ASSERT_FALSE(left_half.empty());
  ASSERT_FALSE(right_half.empty());
  EXPECT_LT(median(left_half), 0.0);   // near plane
  EXPECT_GT(median(right_half), 0.0);  // far plane
}

// Mirror padding only conserves energy when the frame border carries no
// texture, so these inputs get a flat band wider than the largest blur radius.
void flatten_border(Image& img, int band) {
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < img.height(); ++y) {
      for (int x = 0; x < img.width(); ++x) {
        if (x < band || y < band || x >= img.width() - band || y >= img.height() - band) img(x, y, c) = 0.5;
      }
    }
  }
}

TEST(Simulate, ConservesEnergy) {
  const auto cam = camera();
  auto scene = make_scene(SceneKind::kBoxes, SceneOptions{}, 8);
  flatten_border(scene.image, 24);
  const auto pair = simulate_dp(scene.image, scene.depth, cam);
  const double input = sum(scene.image.gray());
  EXPECT_NEAR(sum(pair.left), input, 0.01 * input);
  EXPECT_NEAR(sum(pair.right), input, 0.01 * input);

  Image chart(render_random_dot_chart(96, 96, 0.3, 1));
  flatten_border(chart, 24);
  const auto single = simulate_dp(chart, DepthMap::dense(GridD(96, 96, 4.0)), cam);
  EXPECT_NEAR(sum(single.left), sum(chart.channel(0)), 1e-9 * sum(chart.channel(0)));
  EXPECT_NEAR(sum(single.right), sum(chart.channel(0)), 1e-9 * sum(chart.channel(0)));
}

TEST(Simulate, SwapSymmetry) {
  const auto cam = camera();
  const auto scene = make_scene(SceneKind::kDisc, SceneOptions{}, 12);
  Image mirrored_img(scene.image.width(), scene.image.height(), scene.image.channels());
  for (int c = 0; c < scene.image.channels(); ++c) mirrored_img.channel(c) = mirror(scene.image.channel(c));
  const auto mirrored_depth = DepthMap::dense(mirror(scene.depth.values));
  const auto a = simulate_dp(scene.image, scene.depth, cam);
  const auto b = simulate_dp(mirrored_img, mirrored_depth, cam);
  const auto ml = mirror(a.left);
  const auto mr = mirror(a.right);
  for (std::size_t i = 0; i < ml.size(); ++i) {
    ASSERT_NEAR(b.right[i], ml[i], 1e-6);
    ASSERT_NEAR(b.left[i], mr[i], 1e-6);
  }
}

TEST(Simulate, NoiseIsSeededAndClamped) {
  const auto cam = camera();
  const auto scene = make_scene(SceneKind::kStepEdge, SceneOptions{}, 1);
  SimConfig cfg;
  cfg.noise_sigma = 0.2;
  cfg.seed = 77;
  const auto a = simulate_dp(scene.image, scene.depth, cam, cfg);
  const auto b = simulate_dp(scene.image, scene.depth, cam, cfg);
  EXPECT_EQ(a.left, b.left);
  EXPECT_NE(a.left, a.right);
  for (double v : a.left.values()) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  cfg.seed = 78;
  EXPECT_NE(simulate_dp(scene.image, scene.depth, cam, cfg).left, a.left);
}

TEST(Simulate, IndependentOfThreadCount) {
  const auto cam = camera();
  const auto scene = make_scene(SceneKind::kBoxes, SceneOptions{}, 4);
  SimConfig cfg;
  cfg.noise_sigma = 0.01;
  set_thread_count(1);
  const auto a = simulate_dp(scene.image, scene.depth, cam, cfg);
  set_thread_count(4);
  const auto b = simulate_dp(scene.image, scene.depth, cam, cfg);
  set_thread_count(0);
  EXPECT_EQ(a.left, b.left);
  EXPECT_EQ(a.right, b.right);
}

TEST(Simulate, ConfigValidation) {
  SimConfig cfg;
  cfg.layers = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.noise_sigma = -1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
