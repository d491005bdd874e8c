#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dpdisp/types.hpp"

namespace dpdisp {

/// Result of aligning an estimate to a reference with an affine map.
struct AffineFit {
  double value = 0.0;  ///< (mean |gt - (beta0 + beta1 est)|^p)^(1/p) at the optimum
  double beta0 = 0.0;
  double beta1 = 0.0;
  std::size_t n = 0;
  bool degenerate = false;  ///< fewer than 2 samples or constant estimate
};

/// Closed-form least squares (p = 2).
AffineFit fit_affine_l2(std::span<const double> est, std::span<const double> gt);

/// Iteratively reweighted least squares for p in [1, 2]; weights
/// max(|r|, 1e-9)^(p - 2), stops once the coefficients move less than 1e-8.
AffineFit fit_affine_irls(std::span<const double> est, std::span<const double> gt, double p);

struct SpearmanResult {
  double value = 0.0;  ///< 1 - |rho_s|
  double rho = 0.0;
  bool degenerate = false;
};

/// 1 - |rho_s| with average ranks for ties. Needs >= 3 samples.
SpearmanResult spearman_measure(std::span<const double> a, std::span<const double> b);

/// Pixel window used for evaluation.
struct CropRect {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
};

/// Paired samples where both est and reference are valid (and inside the crop).
struct Samples {
  std::vector<double> est;
  std::vector<double> gt;
};

Samples collect_samples(const DisparityMap& est, const GridD& gt, const Mask& gt_valid,
                        const std::optional<CropRect>& crop = std::nullopt);

/// AI(p) for p = 1 (IRLS) or p = 2 (closed form). Degenerate cases are flagged.
AffineFit ai_metric(const DisparityMap& est, const GridD& gt, const Mask& gt_valid, int p);

struct MetricReport {
  double ai1 = 0.0;
  double ai2 = 0.0;
  double spearman_one_minus_abs = 0.0;
  double beta0 = 0.0;  ///< from the AI(1) fit
  double beta1 = 0.0;
  std::size_t n_pixels = 0;
  bool degenerate = false;
};

MetricReport evaluate(const DisparityMap& est, const GridD& gt, const Mask& gt_valid,
                      const std::optional<CropRect>& crop = std::nullopt);

/// Reference grids derived from ground truth for evaluation.
struct Reference {
  GridD values;
  Mask valid;
};

/// 1 / z on valid depth pixels.
Reference inverse_depth_reference(const DepthMap& depth);
Reference disparity_reference(const DisparityMap& gt);

/// (1/N) sum sqrt(exp(-s_i) (est_i - gt_i)^2 + 2 s_i), s_i = 2 log sigma_i, over
/// pixels valid in both maps. Negative radicands are clamped to zero.
/// Throws EvalError for non-positive sigma on a used pixel or an empty overlap.
double uncertainty_loss(const DisparityMap& est, const DisparityMap& gt, const GridD& sigma);

/// sigma = max(1 - confidence, 1e-6).
GridD uncertainty_from_confidence(const ConfidenceMap& conf);

}  // namespace dpdisp
