#pragma once

#include "dpdisp/types.hpp"

namespace dpdisp {

enum class LambdaSchedule {
  kGeometric,  ///< lambda_t = 3 lambda 4^(T - t) / (4^T - 1), t = 1..T
  kConstant,   ///< lambda_t = lambda
};

struct FgsConfig {
  double lambda = 128.0;
  double sigma_color = 8.0 / 255.0;
  int iterations = 3;
  LambdaSchedule schedule = LambdaSchedule::kGeometric;

  void validate() const;
  /// Smoothness weight of iteration t (1-based).
  double lambda_at(int t) const;
};

/// Guide affinity exp(-|g_p - g_q|_1 / sigma_color).
double guide_weight(const Image& guide, int x0, int y0, int x1, int y1, double sigma_color);

/// J(u) = sum_p h_p (u_p - f_p)^2 + lambda sum_p sum_{q in N4(p)} w_pq (u_p - u_q)^2.
/// Every neighbor pair appears twice in the inner sum. Pixels where f is
/// invalid contribute no data term.
double fgs_energy(const DisparityMap& u, const DisparityMap& f, const ConfidenceMap& h,
                  const Image& guide, const FgsConfig& cfg);

/// Fast approximate minimizer of fgs_energy: T rounds of row then column
/// tridiagonal solves. Each 1-D solve uses the propagated confidence as its
/// data weight; the confidence itself is spread by the same 1-D smoother.
/// Throws SolverError when no pixel carries data.
DisparityMap fgs_solve(const DisparityMap& f, const ConfidenceMap& h, const Image& guide,
                       const FgsConfig& cfg);

struct ExactSolveOptions {
  int max_pixels = 128 * 128;
  double tolerance = 1e-10;  ///< relative residual
  int max_iterations = 0;    ///< 0 = 20 * pixel count
};

/// Exact minimizer of fgs_energy: Jacobi-preconditioned conjugate gradient on
/// (H + 2 lambda L_w) u = H f, where L_w is the weighted 4-neighbor graph
/// Laplacian. Intended as a reference on small problems. At lambda = 0, pixels
/// without data have no defined value and come back invalid.
DisparityMap fgs_solve_exact(const DisparityMap& f, const ConfidenceMap& h, const Image& guide,
                             const FgsConfig& cfg, const ExactSolveOptions& opts = {});

/// Guide-weighted median over a square window of valid neighbors. Always
/// returns one of the window's input values; invalid pixels stay invalid.
DisparityMap weighted_median(const DisparityMap& d, const Image& guide, int window,
                             double sigma_color);

/// Disparity edge detector: 3x3 Sobel magnitude expressed as a disparity
/// gradient (pixels per pixel), divided by `gradient_scale`, clamped to [0,1]
/// and dilated by `dilate_radius`.
struct DisparityEdgeConfig {
  int dilate_radius = 13;
  double gradient_scale = 1.0;
};

GridD disparity_edges(const DisparityMap& d, const DisparityEdgeConfig& cfg);

/// h = [conf * (1 - edges(d)) >= threshold].
ConfidenceMap refine_confidence(const ConfidenceMap& conf, const DisparityMap& d,
                                const DisparityEdgeConfig& edge_cfg, double binarize_threshold);

struct CompletionConfig {
  FgsConfig fgs;
  double tau = 8.0;  ///< pixels; confidence = exp(-distance to nearest sample / tau)
};

struct Completion {
  DisparityMap dense;
  ConfidenceMap confidence;
};

/// Guided sparse-to-dense completion with fgs_solve (h = sparse validity).
Completion complete_sparse(const DisparityMap& sparse, const Image& guide,
                           const CompletionConfig& cfg = {});

struct RefineConfig {
  FgsConfig fgs;
  int wmf_window = 7;
  double wmf_sigma_color = 8.0 / 255.0;
  DisparityEdgeConfig edge;
  double binarize_threshold = 0.5;

  void validate() const;
};

struct RefineStages {
  DisparityMap prefiltered;
  ConfidenceMap confidence;
  DisparityMap refined;
};

/// weighted_median -> refine_confidence -> fgs_solve, in that order.
RefineStages refine_pipeline_stages(const DisparityMap& dense, const ConfidenceMap& conf,
                                    const Image& guide, const RefineConfig& cfg = {});

inline DisparityMap refine_pipeline(const DisparityMap& dense, const ConfidenceMap& conf,
                                    const Image& guide, const RefineConfig& cfg = {}) {
  return refine_pipeline_stages(dense, conf, guide, cfg).refined;
}

}  // namespace dpdisp
