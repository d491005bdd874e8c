#pragma once

#include "dpdisp/types.hpp"

namespace dpdisp {

struct MatchConfig {
  int window = 27;
  int search_range = 25;
  bool subpixel = true;
  double lowpass_sigma = 1.5;
  /// Threshold on the Sobel magnitude of the low-passed left view.
  double edge_threshold = 0.05;

  void validate() const;
};

/// Binary mask of reliable texture: Gaussian low-pass, Sobel magnitude, threshold.
ConfidenceMap edge_mask(const GridD& left, const MatchConfig& cfg);

/// SAD block matching along rows. For each masked pixel the disparity d
/// minimizes sum |L(x + i, y + j) - R(x + i + d, y + j)| over integer
/// shifts in [-search, search]; windows are clipped to the image and the
/// cost is normalized by the overlap. Ties go to the smallest |d|, then the
/// negative shift. Unmasked pixels are invalid.
DisparityMap template_match(const GridD& left, const GridD& right, const ConfidenceMap& mask,
                            const MatchConfig& cfg);

inline DisparityMap template_match(const DPImagePair& pair, const ConfidenceMap& mask,
                                   const MatchConfig& cfg) {
  return template_match(pair.left, pair.right, mask, cfg);
}

}  // namespace dpdisp
