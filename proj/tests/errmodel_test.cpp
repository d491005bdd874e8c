#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dpdisp/conversion.hpp"
#include "dpdisp/errmodel.hpp"
#include "dpdisp/error.hpp"
#include "dpdisp/scenes.hpp"
#include "oracles.hpp"

using namespace dpdisp;

namespace {

std::vector<SweepRecord> synthesize(const ErrorModel& m, double noise, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<SweepRecord> out;
  for (double z_f : {1.0, 2.0, 4.0}) {
    for (double f : {1.4, 2.0, 2.8, 4.0}) {
      for (double z = 0.5; z <= 5.0; z += 0.5) {
        SweepRecord r;
        r.z = z;
        r.z_f = z_f;
        r.f_number = f;
        r.sigma_measured = sigma_d(m, z, z_f, f) * (1.0 + noise * n(rng));
        r.n_samples = 1000;
        out.push_back(r);
      }
    }
  }
  return out;
}

SweepConfig small_sweep() {
  SweepConfig c;
  c.z = {1.0, 2.0, 4.0};
  c.z_f = {2.0};
  c.f_number = {2.0};
  c.width = 96;
  c.height = 96;
  return c;
}

}  // namespace

TEST(SigmaD, UnitBaseGivesC1) {
  const ErrorModel m{6.93, 0.48, 1.39};
  // c2 z = F z_f with F = 2, z_f = 2 -> z = 4 / 0.48
  EXPECT_DOUBLE_EQ(sigma_d(m, 4.0 / 0.48, 2.0, 2.0), 6.93);
}

TEST(SigmaD, MatchesScalarEvaluation) {
  const ErrorModel m = kReferenceErrorModel;
  EXPECT_NEAR(sigma_d(m, 2.0, 2.0, 2.0), oracle::sigma_d(6.93, 0.48, 1.39, 2.0, 2.0, 2.0), 1e-12);
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double z = 0.1 + 10.0 * uniform01(rng);
    const double zf = 0.3 + 10.0 * uniform01(rng);
    const double f = 1.0 + 7.0 * uniform01(rng);
    const double expected = oracle::sigma_d(6.93, 0.48, 1.39, z, zf, f);
    ASSERT_NEAR(sigma_d(m, z, zf, f), expected, 1e-12 * std::max(1.0, expected));
  }
}

TEST(SigmaD, SmallDepthLimitIsC1) {
  EXPECT_NEAR(sigma_d(kReferenceErrorModel, 1e-9, 2.0, 2.0), 6.93, 1e-6);
}

TEST(SigmaD, DecreasingInFNumber) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const double z = 0.2 + 8.0 * uniform01(rng);
    const double zf = 0.5 + 8.0 * uniform01(rng);
    const double f = 1.2 + 6.0 * uniform01(rng);
    const double h = 1e-6 * f;
    const double grad = (sigma_d(kReferenceErrorModel, z, zf, f + h) - sigma_d(kReferenceErrorModel, z, zf, f - h)) /
                        (2.0 * h);
    EXPECT_LT(grad, 0.0) << z << " " << zf << " " << f;
  }
}

TEST(ErrorModel, Validation) {
  EXPECT_THROW((ErrorModel{0.0, 1.0, 1.0}.validate()), ConfigError);
  EXPECT_THROW((ErrorModel{1.0, -1.0, 1.0}.validate()), ConfigError);
  EXPECT_THROW((ErrorModel{1.0, 1.0, NAN}.validate()), ConfigError);
  EXPECT_NO_THROW(kReferenceErrorModel.validate());
}

TEST(Fit, RecoversNoiselessConstants) {
  const auto records = synthesize(kReferenceErrorModel, 0.0, 1);
  const auto fit = fit_error_model(records);
  EXPECT_NEAR(fit.model.c1, 6.93, 0.01 * 6.93);
  EXPECT_NEAR(fit.model.c2, 0.48, 0.01 * 0.48);
  EXPECT_NEAR(fit.model.c3, 1.39, 0.01 * 1.39);
  EXPECT_LT(fit.residual_rms, 1e-6);
}

TEST(Fit, RecoversNoisyConstants) {
  for (std::uint64_t seed : {2u, 3u, 4u}) {
    const auto fit = fit_error_model(synthesize(kReferenceErrorModel, 0.05, seed));
    EXPECT_NEAR(fit.model.c1, 6.93, 0.1 * 6.93) << seed;
    EXPECT_NEAR(fit.model.c2, 0.48, 0.1 * 0.48) << seed;
    EXPECT_NEAR(fit.model.c3, 1.39, 0.1 * 1.39) << seed;
  }
}

TEST(Fit, IdempotentOnOwnSynthesis) {
  const ErrorModel other{3.0, 0.7, 2.2};
  const auto first = fit_error_model(synthesize(other, 0.0, 5)).model;
  const auto second = fit_error_model(synthesize(first, 0.0, 5)).model;
  EXPECT_NEAR(second.c1, first.c1, 0.01 * first.c1);
  EXPECT_NEAR(second.c2, first.c2, 0.01 * first.c2);
  EXPECT_NEAR(second.c3, first.c3, 0.01 * first.c3);
}

TEST(Fit, DegenerateSweeps) {
  auto records = synthesize(kReferenceErrorModel, 0.0, 1);
  EXPECT_THROW(fit_error_model(std::vector<SweepRecord>(records.begin(), records.begin() + 2)), FitError);
  std::vector<SweepRecord> same_z;
  for (const auto& r : records) {
    if (r.z == 2.0) same_z.push_back(r);
  }
  ASSERT_GE(same_z.size(), 10u);
  EXPECT_THROW(fit_error_model(same_z), FitError);
}

TEST(Sweep, FocusAndDefocus) {
  const auto records = run_error_sweep(small_sweep(), 3);
  ASSERT_EQ(records.size(), 3u);
  EXPECT_EQ(records[1].z, 2.0);
  EXPECT_LT(records[1].sigma_measured, 0.5);
  EXPECT_GT(records[2].sigma_measured, records[1].sigma_measured);
  EXPECT_GT(records[0].sigma_measured, records[1].sigma_measured);
  for (const auto& r : records) EXPECT_GE(r.n_samples, 100);
}

TEST(Sweep, Deterministic) {
  const auto a = run_error_sweep(small_sweep(), 11);
  const auto b = run_error_sweep(small_sweep(), 11);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].sigma_measured, b[i].sigma_measured);
    EXPECT_EQ(a[i].n_samples, b[i].n_samples);
  }
}

TEST(Sweep, RejectsBadGrid) {
  auto c = small_sweep();
  c.z = {-1.0};
  EXPECT_THROW(run_error_sweep(c, 1), ConfigError);
  c = small_sweep();
  c.z_f.clear();
  EXPECT_THROW(run_error_sweep(c, 1), ConfigError);
}

TEST(Laplace, ZeroSigmaIsIdentity) {
  Rng rng(1);
  EXPECT_EQ(sample_disparity(3.25, 0.0, rng), 3.25);
  EXPECT_THROW(sample_disparity(0.0, -1.0, rng), ConfigError);
}

TEST(Laplace, MomentsAtUnitSigma) {
  Rng rng(12345);
  const int n = 1000000;
  double s1 = 0.0, s2 = 0.0, s4 = 0.0;
  std::vector<double> x(n);
  for (auto& v : x) {
    v = sample_disparity(0.0, 1.0, rng);
    s1 += v;
  }
  const double mean = s1 / n;
  for (double v : x) {
    const double c = v - mean;
    s2 += c * c;
    s4 += c * c * c * c;
  }
  const double var = s2 / n;
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(std::sqrt(var), 1.0, 0.01);
  EXPECT_NEAR(s4 / n / (var * var) - 3.0, 3.0, 0.3);
}

TEST(Sampler, DrawsWithinRanges) {
  CameraSampler s;
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    const auto cam = s.sample(rng);
    EXPECT_GE(cam.focus_distance, s.z_f_min);
    EXPECT_LE(cam.focus_distance, s.z_f_max);
    EXPECT_GE(cam.focal_length, s.focal_min);
    EXPECT_LE(cam.focal_length, s.focal_max);
    EXPECT_NE(std::find(s.f_numbers.begin(), s.f_numbers.end(), cam.f_number), s.f_numbers.end());
    EXPECT_DOUBLE_EQ(cam.alpha, calibrated_alpha(s.pixel_pitch));
  }
}

class TrainingSampleTest : public ::testing::Test {
 protected:
  void SetUp() override {
    scene = make_scene(SceneKind::kBoxes, SceneOptions{64, 48, 1.5, 3.0, -1}, 2);
    scene.depth.invalidate(10, 10);
    scene.depth.invalidate(20, 30);
  }
  Scene scene;
};

TEST_F(TrainingSampleTest, ZeroNoiseModelKeepsPseudoGt) {
  Rng rng(3);
  const ErrorModel silent{0.0, 0.48, 1.39};
  const auto t = generate_training_sample(scene.image, scene.depth, CameraSampler{}, silent, MatchConfig{}, rng);
  const auto mask = edge_mask(scene.image.gray(), MatchConfig{});
  for (std::size_t i = 0; i < t.sparse.values.size(); ++i) {
    const bool expected = mask.values[i] >= 0.5 && scene.depth.valid[i];
    ASSERT_EQ(t.sparse.valid[i] != 0, expected) << i;
    if (expected) EXPECT_EQ(t.sparse.values[i], t.pseudo_gt.values[i]);
  }
  EXPECT_GT(t.sparse.count_valid(), 0u);
  EXPECT_EQ(t.guide, scene.image);
}

TEST_F(TrainingSampleTest, Deterministic) {
  Rng a(9);
  Rng b(9);
  const auto ta = generate_training_sample(scene.image, scene.depth, CameraSampler{}, kReferenceErrorModel,
                                           MatchConfig{}, a);
  const auto tb = generate_training_sample(scene.image, scene.depth, CameraSampler{}, kReferenceErrorModel,
                                           MatchConfig{}, b);
  EXPECT_EQ(ta.sparse, tb.sparse);
  EXPECT_EQ(ta.camera, tb.camera);
}

TEST_F(TrainingSampleTest, DimensionMismatch) {
  Rng rng(1);
  const auto depth = DepthMap::dense(GridD(10, 10, 2.0));
  EXPECT_THROW(generate_training_sample(scene.image, depth, CameraSampler{}, kReferenceErrorModel, MatchConfig{}, rng),
               ConfigError);
}

TEST(TrainingSample, PooledResidualMatchesSigma) {
  CameraSampler fixed;
  fixed.z_f_min = fixed.z_f_max = 2.0;
  fixed.f_numbers = {2.0};
  fixed.focal_min = fixed.focal_max = 0.035;
  const double z = 3.0;
  const Image img(render_random_dot_chart(32, 32, 0.25, 1));
  const auto depth = DepthMap::dense(GridD(32, 32, z));
  Rng rng(21);
  double s2 = 0.0;
  std::size_t n = 0;
  for (int k = 0; k < 100; ++k) {
    const auto t = generate_training_sample(img, depth, fixed, kReferenceErrorModel, MatchConfig{}, rng);
    for (std::size_t i = 0; i < t.sparse.values.size(); ++i) {
      if (!t.sparse.valid[i]) continue;
      const double r = t.sparse.values[i] - t.pseudo_gt.values[i];
      s2 += r * r;
      ++n;
    }
  }
  ASSERT_GT(n, 10000u);
  const double expected = sigma_d(kReferenceErrorModel, z, 2.0, 2.0);
  EXPECT_NEAR(std::sqrt(s2 / static_cast<double>(n)), expected, 0.1 * expected);
}
