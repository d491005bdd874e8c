#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "dpdisp/error.hpp"
#include "dpdisp/filters.hpp"
#include "dpdisp/parallel.hpp"
#include "dpdisp/refine.hpp"

namespace dpdisp {

DisparityMap weighted_median(const DisparityMap& d, const Image& guide, int window, double sigma_color) {
  if (d.width() != guide.width() || d.height() != guide.height()) {
    throw SolverError("weighted_median: disparity and guide dimensions differ");
  }
  if (window < 1 || window % 2 == 0) throw ConfigError("weighted_median: window must be odd and >= 1");
  if (!(sigma_color > 0.0)) throw ConfigError("weighted_median: sigma_color must be > 0");
  const int r = window / 2;
  const int w = d.width();
  const int h = d.height();
  DisparityMap out(w, h);
  parallel_for(0, h, [&](std::ptrdiff_t yy) {
    const int y = static_cast<int>(yy);
    std::vector<std::pair<double, double>> samples;
    samples.reserve(static_cast<std::size_t>(window) * window);
    for (int x = 0; x < w; ++x) {
      if (!d.is_valid(x, y)) continue;
      samples.clear();
      double total = 0.0;
      for (int j = std::max(0, y - r); j <= std::min(h - 1, y + r); ++j) {
        for (int i = std::max(0, x - r); i <= std::min(w - 1, x + r); ++i) {
          if (!d.is_valid(i, j)) continue;
          const double wt = guide_weight(guide, x, y, i, j, sigma_color);
          samples.emplace_back(d.values(i, j), wt);
          total += wt;
        }
      }
      std::stable_sort(samples.begin(), samples.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      double acc = 0.0;
      double pick = samples.back().first;
      for (const auto& [v, wt] : samples) {
        acc += wt;
        if (acc >= 0.5 * total) {
          pick = v;
          break;
        }
      }
      out.set(x, y, pick);
    }
  });
  return out;
}

GridD disparity_edges(const DisparityMap& d, const DisparityEdgeConfig& cfg) {
  const int w = d.width();
  const int h = d.height();
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < d.values.size(); ++i) {
    if (d.valid[i]) {
      sum += d.values[i];
      ++n;
    }
  }
  GridD filled(w, h, n ? sum / static_cast<double>(n) : 0.0);
  for (std::size_t i = 0; i < filled.size(); ++i) {
    if (d.valid[i]) filled[i] = d.values[i];
  }
  GridD mag = sobel(filled).magnitude;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      bool touches_invalid = false;
      for (int j = -1; j <= 1 && !touches_invalid; ++j) {
        for (int i = -1; i <= 1; ++i) {
          if (!d.is_valid(reflect_index(x + i, w), reflect_index(y + j, h))) {
            touches_invalid = true;
            break;
          }
        }
      }
      if (touches_invalid) mag(x, y) = 0.0;
    }
  }
  // The Sobel kernel responds with 8x the gradient of a linear ramp.
  for (auto& v : mag.values()) v = std::clamp(v / (8.0 * cfg.gradient_scale), 0.0, 1.0);
  if (cfg.dilate_radius > 0) mag = max_filter(mag, cfg.dilate_radius);
  return mag;
}

ConfidenceMap refine_confidence(const ConfidenceMap& conf, const DisparityMap& d, const DisparityEdgeConfig& edge_cfg,
                                double binarize_threshold) {
  if (conf.width() != d.width() || conf.height() != d.height()) {
    throw SolverError("refine_confidence: confidence and disparity dimensions differ");
  }
  const GridD edges = disparity_edges(d, edge_cfg);
  ConfidenceMap out(conf.width(), conf.height());
  for (std::size_t i = 0; i < edges.size(); ++i) {
    out.values[i] = conf.values[i] * (1.0 - edges[i]) >= binarize_threshold ? 1.0 : 0.0;
  }
  return out;
}

Completion complete_sparse(const DisparityMap& sparse, const Image& guide, const CompletionConfig& cfg) {
  if (!(cfg.tau > 0.0)) throw ConfigError("completion: tau must be > 0");
  if (sparse.count_valid() == 0) throw SolverError("completion: sparse input has no valid pixels");
  Completion out;
  out.dense = fgs_solve(sparse, ConfidenceMap::from_mask(sparse.valid), guide, cfg.fgs);
  const GridD dist = distance_transform(sparse.valid);
  GridD conf(sparse.width(), sparse.height());
  for (std::size_t i = 0; i < conf.size(); ++i) conf[i] = std::exp(-dist[i] / cfg.tau);
  out.confidence = ConfidenceMap(std::move(conf));
  return out;
}

void RefineConfig::validate() const {
  fgs.validate();
  if (wmf_window < 1 || wmf_window % 2 == 0) throw ConfigError("refine: wmf_window must be odd and >= 1");
  if (!(wmf_sigma_color > 0.0)) throw ConfigError("refine: wmf_sigma_color must be > 0");
  if (edge.dilate_radius < 0) throw ConfigError("refine: edge_dilate_radius must be >= 0");
  if (!(edge.gradient_scale > 0.0)) throw ConfigError("refine: edge_gradient_scale must be > 0");
  if (!(binarize_threshold >= 0.0 && binarize_threshold <= 1.0)) {
    throw ConfigError("refine: binarize_threshold must be in [0, 1]");
  }
}

RefineStages refine_pipeline_stages(const DisparityMap& dense, const ConfidenceMap& conf, const Image& guide,
                                    const RefineConfig& cfg) {
  cfg.validate();
  if (dense.width() != conf.width() || dense.height() != conf.height() || dense.width() != guide.width() ||
      dense.height() != guide.height()) {
    throw SolverError("refine: disparity, confidence and guide dimensions differ");
  }
  RefineStages s;
  s.prefiltered = weighted_median(dense, guide, cfg.wmf_window, cfg.wmf_sigma_color);
  s.confidence = refine_confidence(conf, s.prefiltered, cfg.edge, cfg.binarize_threshold);
  s.refined = fgs_solve(s.prefiltered, s.confidence, guide, cfg.fgs);
  return s;
}

}  // namespace dpdisp
