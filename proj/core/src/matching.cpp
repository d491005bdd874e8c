#include "dpdisp/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dpdisp/error.hpp"
#include "dpdisp/filters.hpp"
#include "dpdisp/parallel.hpp"

namespace dpdisp {
namespace {

// Summed-area table with a zero guard row/column: (w + 1) x (h + 1).
class Integral {
 public:
  Integral(int w, int h) : w_(w), table_(static_cast<std::size_t>(w + 1) * static_cast<std::size_t>(h + 1), 0.0) {}

  double& at(int x, int y) { return table_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }
  double at(int x, int y) const { return table_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }

  /// Sum over the inclusive box [x0, x1] x [y0, y1].
  double box(int x0, int y0, int x1, int y1) const {
    return at(x1 + 1, y1 + 1) - at(x0, y1 + 1) - at(x1 + 1, y0) + at(x0, y0);
  }

 private:
  int w_;
  std::vector<double> table_;
};

// Search order 0, -1, +1, -2, +2, ... implements the tie-breaking rule.
std::vector<int> shift_order(int range) {
  std::vector<int> order{0};
  for (int s = 1; s <= range; ++s) {
    order.push_back(-s);
    order.push_back(s);
  }
  return order;
}

}  // namespace

void MatchConfig::validate() const {
  if (window < 3 || window % 2 == 0) throw ConfigError("match: window must be odd and >= 3");
  if (search_range < 1) throw ConfigError("match: search range must be >= 1");
  if (!(lowpass_sigma >= 0.0) || !std::isfinite(lowpass_sigma)) throw ConfigError("match: lowpass sigma must be >= 0");
  if (!std::isfinite(edge_threshold)) throw ConfigError("match: edge threshold must be finite");
}

ConfidenceMap edge_mask(const GridD& left, const MatchConfig& cfg) {
  cfg.validate();
  const auto grad = sobel(gaussian_blur(left, cfg.lowpass_sigma));
  ConfidenceMap mask(left.width(), left.height());
  for (std::size_t i = 0; i < mask.values.size(); ++i) {
    mask.values[i] = grad.magnitude[i] >= cfg.edge_threshold ? 1.0 : 0.0;
  }
  return mask;
}

DisparityMap template_match(const GridD& left, const GridD& right, const ConfidenceMap& mask,
                            const MatchConfig& cfg) {
  cfg.validate();
  const int w = left.width();
  const int h = left.height();
  if (!left.same_shape(right)) throw MatchError("left and right views differ in size");
  if (mask.width() != w || mask.height() != h) throw MatchError("mask size differs from the views");
  if (cfg.window > w || cfg.window > h) {
    throw MatchError("window " + std::to_string(cfg.window) + " exceeds the image size");
  }
  const int r = cfg.window / 2;

  std::vector<std::size_t> pixels;
  for (std::size_t i = 0; i < mask.values.size(); ++i) {
    if (mask.values[i] >= 0.5) pixels.push_back(i);
  }

  const auto order = shift_order(cfg.search_range);
  const auto n_shifts = order.size();
  const std::size_t n_pix = pixels.size();
  // cost[shift_slot * n_pix + k], shift_slot = s + search_range
  std::vector<double> cost(static_cast<std::size_t>(2 * cfg.search_range + 1) * n_pix,
                           std::numeric_limits<double>::infinity());

  parallel_for(0, static_cast<std::ptrdiff_t>(n_shifts), [&](std::ptrdiff_t t) {
    const int s = order[static_cast<std::size_t>(t)];
    Integral sad(w, h);
    Integral cnt(w, h);
    for (int y = 0; y < h; ++y) {
      double row_sad = 0.0;
      double row_cnt = 0.0;
      for (int x = 0; x < w; ++x) {
        const int xr = x + s;
        if (xr >= 0 && xr < w) {
          row_sad += std::abs(left(x, y) - right(xr, y));
          row_cnt += 1.0;
        }
        sad.at(x + 1, y + 1) = sad.at(x + 1, y) + row_sad;
        cnt.at(x + 1, y + 1) = cnt.at(x + 1, y) + row_cnt;
      }
    }
    const auto slot = static_cast<std::size_t>(s + cfg.search_range);
    for (std::size_t k = 0; k < n_pix; ++k) {
      const int x = static_cast<int>(pixels[k] % static_cast<std::size_t>(w));
      const int y = static_cast<int>(pixels[k] / static_cast<std::size_t>(w));
      const int x0 = std::max(0, x - r);
      const int x1 = std::min(w - 1, x + r);
      const int y0 = std::max(0, y - r);
      const int y1 = std::min(h - 1, y + r);
      const double n = cnt.box(x0, y0, x1, y1);
      if (n > 0.0) cost[slot * n_pix + k] = sad.box(x0, y0, x1, y1) / n;
    }
  });

  DisparityMap out(w, h);
  for (std::size_t k = 0; k < n_pix; ++k) {
    auto c = [&](int s) { return cost[static_cast<std::size_t>(s + cfg.search_range) * n_pix + k]; };
    int best = 0;
    double best_cost = std::numeric_limits<double>::infinity();
    for (int s : order) {
      if (c(s) < best_cost) {
        best_cost = c(s);
        best = s;
      }
    }
    if (!std::isfinite(best_cost)) continue;
    double d = best;
    // A zero cost is an exact match; the parabola would only pull it off the true shift.
    if (cfg.subpixel && best_cost > 0.0 && best > -cfg.search_range && best < cfg.search_range) {
      const double cm = c(best - 1);
      const double cp = c(best + 1);
      const double denom = cm - 2.0 * best_cost + cp;
      if (std::isfinite(cm) && std::isfinite(cp) && denom > 0.0) {
        d += std::clamp((cm - cp) / (2.0 * denom), -0.5, 0.5);
      }
    }
    out.values[pixels[k]] = d;
    out.valid[pixels[k]] = 1;
  }
  return out;
}

}  // namespace dpdisp
