#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "dpdisp/error.hpp"
#include "dpdisp/eval.hpp"
#include "dpdisp/random.hpp"
#include "oracles.hpp"

using namespace dpdisp;

namespace {

struct Pair {
  std::vector<double> est;
  std::vector<double> gt;
};

Pair noisy_affine(std::size_t n, std::uint64_t seed, double noise) {
  Rng rng(seed);
  Pair p;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = 20.0 * (uniform01(rng) - 0.5);
    p.est.push_back(e);
    p.gt.push_back(0.3 - 0.05 * e + noise * (uniform01(rng) - 0.5));
  }
  return p;
}

}  // namespace

TEST(Affine, ExactRelationGivesZero) {
  std::vector<double> est{-3, -1, 0, 2, 5, 7};
  std::vector<double> gt;
  for (double e : est) gt.push_back(1.5 + 0.25 * e);
  const auto l2 = fit_affine_l2(est, gt);
  EXPECT_NEAR(l2.value, 0.0, 1e-12);
  EXPECT_NEAR(l2.beta0, 1.5, 1e-12);
  EXPECT_NEAR(l2.beta1, 0.25, 1e-12);
  EXPECT_NEAR(fit_affine_irls(est, gt, 1.0).value, 0.0, 1e-9);
}

TEST(Affine, InvariantToAffineChangeOfEstimate) {
  const auto p = noisy_affine(300, 1, 0.1);
  std::vector<double> moved;
  for (double e : p.est) moved.push_back(-7.0 + 3.5 * e);
  EXPECT_NEAR(fit_affine_l2(p.est, p.gt).value, fit_affine_l2(moved, p.gt).value, 1e-9);
  EXPECT_NEAR(fit_affine_irls(p.est, p.gt, 1.0).value, fit_affine_irls(moved, p.gt, 1.0).value, 1e-9);
}

TEST(Affine, L2MatchesGridSearch) {
  for (std::uint64_t s = 0; s < 3; ++s) {
    const auto p = noisy_affine(50, 10 + s, 0.5);
    EXPECT_NEAR(fit_affine_l2(p.est, p.gt).value, oracle::brute_force_ai(p.est, p.gt, 2.0), 1e-6);
  }
}

TEST(Affine, L1MatchesPairEnumeration) {
  for (std::uint64_t s = 0; s < 5; ++s) {
    const auto p = noisy_affine(40, 20 + s, 0.5);
    const double expected = oracle::l1_by_pairs(p.est, p.gt);
    EXPECT_NEAR(fit_affine_irls(p.est, p.gt, 1.0).value, expected, 1e-4 * std::max(1.0, expected)) << s;
  }
}

TEST(Affine, IrlsAtTwoIsClosedForm) {
  const auto p = noisy_affine(200, 3, 0.4);
  const auto a = fit_affine_irls(p.est, p.gt, 2.0);
  const auto b = fit_affine_l2(p.est, p.gt);
  EXPECT_NEAR(a.value, b.value, 1e-8);
  EXPECT_NEAR(a.beta0, b.beta0, 1e-8);
  EXPECT_NEAR(a.beta1, b.beta1, 1e-8);
}

TEST(Affine, DegenerateInputsAreFlagged) {
  std::vector<double> one{1.0};
  EXPECT_TRUE(fit_affine_l2(one, one).degenerate);
  std::vector<double> flat{2.0, 2.0, 2.0};
  std::vector<double> gt{1.0, 2.0, 4.0};
  const auto f = fit_affine_irls(flat, gt, 1.0);
  EXPECT_TRUE(f.degenerate);
  EXPECT_EQ(f.beta0, 2.0);
  EXPECT_NEAR(f.value, 1.0, 1e-12);
  EXPECT_THROW(fit_affine_l2(one, gt), EvalError);
  EXPECT_THROW(fit_affine_irls(gt, gt, 3.0), EvalError);
}

TEST(Spearman, MonotoneMapsGiveZero) {
  const auto p = noisy_affine(100, 4, 0.0);
  std::vector<double> cubed;
  for (double e : p.est) cubed.push_back(e * e * e);
  EXPECT_NEAR(spearman_measure(p.est, cubed).value, 0.0, 1e-12);
  std::vector<double> neg;
  for (double e : p.est) neg.push_back(-std::exp(e));
  const auto r = spearman_measure(p.est, neg);
  EXPECT_NEAR(r.rho, -1.0, 1e-12);
  EXPECT_NEAR(r.value, 0.0, 1e-12);
}

TEST(Spearman, TiesUseAverageRanks) {
  const std::vector<double> a{1, 2, 2, 3, 4, 4, 4, 5};
  const std::vector<double> b{2, 1, 3, 3, 5, 6, 4, 8};
  // ranks a: 1 2.5 2.5 4 6 6 6 8;  ranks b: 2 1 3.5 3.5 6 7 5 8
  // centered products sum to 37.25; squared deviations 39.5 and 41.5.
  const double rho = 37.25 / std::sqrt(39.5 * 41.5);
  const auto r = spearman_measure(a, b);
  EXPECT_NEAR(r.rho, rho, 1e-12);
  EXPECT_NEAR(r.value, 1.0 - rho, 1e-12);
}

TEST(Spearman, Degenerate) {
  std::vector<double> two{1.0, 2.0};
  EXPECT_TRUE(spearman_measure(two, two).degenerate);
  std::vector<double> flat{1.0, 1.0, 1.0};
  std::vector<double> inc{1.0, 2.0, 3.0};
  EXPECT_TRUE(spearman_measure(flat, inc).degenerate);
}

TEST(Evaluate, InvariantUnderAffineAndMonotoneChanges) {
  Rng rng(5);
  DisparityMap est(20, 20);
  GridD gt(20, 20);
  Mask valid(20, 20, 1);
  DisparityMap moved(20, 20);
  for (int y = 0; y < 20; ++y) {
    for (int x = 0; x < 20; ++x) {
      const double e = 4.0 * (uniform01(rng) - 0.5);
      est.set(x, y, e);
      moved.set(x, y, 2.0 - 0.5 * e);
      gt(x, y) = 0.5 + 0.1 * e + 0.02 * (uniform01(rng) - 0.5);
    }
  }
  const auto a = evaluate(est, gt, valid);
  const auto b = evaluate(moved, gt, valid);
  EXPECT_NEAR(a.ai1, b.ai1, 1e-9);
  EXPECT_NEAR(a.ai2, b.ai2, 1e-9);
  EXPECT_NEAR(a.spearman_one_minus_abs, b.spearman_one_minus_abs, 1e-12);
  EXPECT_EQ(a.n_pixels, 400u);
  EXPECT_FALSE(a.degenerate);
  EXPECT_EQ(ai_metric(est, gt, valid, 1).value, a.ai1);
  EXPECT_EQ(ai_metric(est, gt, valid, 2).value, a.ai2);
  EXPECT_THROW(ai_metric(est, gt, valid, 3), EvalError);
}

TEST(Evaluate, UsesOnlyPixelsValidInBothAndInsideCrop) {
  DisparityMap est(6, 4);
  GridD gt(6, 4, 1.0);
  Mask valid(6, 4, 1);
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 6; ++x) est.set(x, y, x + y);
  }
  est.invalidate(1, 1);
  valid(2, 2) = 0;
  EXPECT_EQ(collect_samples(est, gt, valid).est.size(), 22u);
  EXPECT_EQ(collect_samples(est, gt, valid, CropRect{1, 1, 2, 2}).est.size(), 2u);
  EXPECT_THROW(collect_samples(est, gt, valid, CropRect{5, 0, 2, 1}), EvalError);
  EXPECT_THROW(collect_samples(est, GridD(5, 4), Mask(5, 4)), EvalError);
}

TEST(Reference, InverseDepth) {
  DepthMap depth(3, 1);
  depth.set(0, 0, 2.0);
  depth.set(1, 0, 0.5);
  const auto r = inverse_depth_reference(depth);
  EXPECT_EQ(r.values(0, 0), 0.5);
  EXPECT_EQ(r.values(1, 0), 2.0);
  EXPECT_FALSE(r.valid(2, 0));
}

TEST(UncertaintyLoss, ZeroResidualUnitSigma) {
  const auto d = DisparityMap::dense(GridD(3, 3, 1.0));
  EXPECT_EQ(uncertainty_loss(d, d, GridD(3, 3, 1.0)), 0.0);
}

TEST(UncertaintyLoss, UnitSigmaGivesMeanAbsoluteResidual) {
  auto est = DisparityMap::dense(GridD(2, 1, 0.0));
  est.values(0, 0) = 3.0;
  est.values(1, 0) = -1.0;
  const auto gt = DisparityMap::dense(GridD(2, 1, 0.0));
  EXPECT_NEAR(uncertainty_loss(est, gt, GridD(2, 1, 1.0)), 2.0, 1e-12);
}

TEST(UncertaintyLoss, MatchesDirectSum) {
  auto est = DisparityMap::dense(GridD(4, 1, 0.0));
  auto gt = DisparityMap::dense(GridD(4, 1, 0.0));
  GridD sigma(4, 1);
  const double e[] = {1.0, -2.0, 0.5, 0.0};
  const double g[] = {0.0, 1.0, 0.5, 3.0};
  const double s[] = {0.5, 2.0, 0.1, 1.5};
  double expected = 0.0;
  for (int i = 0; i < 4; ++i) {
    est.values(i, 0) = e[i];
    gt.values(i, 0) = g[i];
    sigma(i, 0) = s[i];
    const double r = e[i] - g[i];
    const double rad = r * r / (s[i] * s[i]) + 4.0 * std::log(s[i]);
    expected += std::sqrt(std::max(0.0, rad));
  }
  EXPECT_NEAR(uncertainty_loss(est, gt, sigma), expected / 4.0, 1e-12);
}

TEST(UncertaintyLoss, Errors) {
  const auto d = DisparityMap::dense(GridD(2, 2, 1.0));
  EXPECT_THROW(uncertainty_loss(d, d, GridD(2, 2, 0.0)), EvalError);
  EXPECT_THROW(uncertainty_loss(d, DisparityMap(2, 2), GridD(2, 2, 1.0)), EvalError);
  EXPECT_THROW(uncertainty_loss(d, d, GridD(3, 2, 1.0)), EvalError);
}

TEST(UncertaintyLoss, SigmaFromConfidence) {
  ConfidenceMap c(2, 1);
  c.values(0, 0) = 0.25;
  c.values(1, 0) = 1.0;
  const auto s = uncertainty_from_confidence(c);
  EXPECT_EQ(s(0, 0), 0.75);
  EXPECT_EQ(s(1, 0), 1e-6);
}
