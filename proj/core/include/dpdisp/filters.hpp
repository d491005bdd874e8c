#pragma once

#include <vector>

#include "dpdisp/grid.hpp"

namespace dpdisp {

/// Half-sample symmetric reflection of an index into [0, n).
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

/// Separable Gaussian blur with reflected borders. sigma <= 0 returns a copy.
GridD gaussian_blur(const GridD& src, double sigma);

struct SobelResponse {
  GridD gx;
  GridD gy;
  GridD magnitude;
};

/// 3x3 Sobel derivatives with reflected borders; magnitude is the L2 norm.
SobelResponse sobel(const GridD& src);

/// Square max filter of the given radius (morphological dilation).
GridD max_filter(const GridD& src, int radius);

/// q-quantile (q in [0,1]) of the values, linear interpolation between order statistics.
double quantile(std::vector<double> values, double q);

/// Exact Euclidean distance from each pixel to the nearest non-zero mask entry.
/// Pixels are +inf when the mask is empty.
GridD distance_transform(const Mask& seeds);

}  // namespace dpdisp
