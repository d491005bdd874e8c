#include "dpdisp/optics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dpdisp/error.hpp"
#include "dpdisp/filters.hpp"
#include "dpdisp/parallel.hpp"
#include "dpdisp/random.hpp"

namespace dpdisp {
namespace {

constexpr int kKernelSupersample = 8;
constexpr double kDotRadius = 1.0;
constexpr int kDotSupersample = 4;
constexpr int kDotMargin = 40;

struct KernelTap {
  int dx;
  int dy;
  double w;
};

std::vector<KernelTap> taps_of(const GridD& k) {
  const int r = k.width() / 2;
  std::vector<KernelTap> taps;
  for (int y = 0; y < k.height(); ++y) {
    for (int x = 0; x < k.width(); ++x) {
      if (k(x, y) > 0.0) taps.push_back({x - r, y - r, k(x, y)});
    }
  }
  return taps;
}

// out(x + dx, y + dy) += w * src(x, y), reflecting targets that leave the frame.
GridD scatter(const GridD& src, const std::vector<KernelTap>& taps, int radius) {
  const int w = src.width();
  const int h = src.height();
  GridD out(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    const bool y_inside = y - radius >= 0 && y + radius < h;
    for (int x = 0; x < w; ++x) {
      const double v = src(x, y);
      if (v == 0.0) continue;
      if (y_inside && x - radius >= 0 && x + radius < w) {
        for (const auto& t : taps) out(x + t.dx, y + t.dy) += t.w * v;
      } else {
        for (const auto& t : taps) out(reflect_index(x + t.dx, w), reflect_index(y + t.dy, h)) += t.w * v;
      }
    }
  }
  return out;
}

GridD mirrored(const GridD& k) {
  GridD m(k.width(), k.height());
  for (int y = 0; y < k.height(); ++y) {
    for (int x = 0; x < k.width(); ++x) m(x, y) = k(k.width() - 1 - x, y);
  }
  return m;
}

}  // namespace

double blur_radius_px(double z, const CameraParams& cam, double pixel_pitch) {
  return cam.blur_scale() * (1.0 / cam.focus_distance - 1.0 / z) / (2.0 * pixel_pitch);
}

double calibrated_alpha(double pixel_pitch) {
  return kMatchingGain * 3.0 * std::numbers::pi / (16.0 * pixel_pitch);
}

DPPsfPair make_psf_pair(double z, const CameraParams& cam, double pixel_pitch, double max_radius) {
  if (!(z > 0.0) || !std::isfinite(z)) throw SimulationError("PSF depth must be positive");
  if (!(pixel_pitch > 0.0)) throw ConfigError("pixel pitch must be positive");
  cam.validate();

  DPPsfPair psf;
  psf.radius = blur_radius_px(z, cam, pixel_pitch);
  const double r = std::abs(psf.radius);
  if (r > max_radius) {
    throw SimulationError("PSF radius " + std::to_string(r) + " px exceeds the maximum support of " +
                          std::to_string(max_radius) + " px");
  }
  if (r < 0.5) {
    psf.left = GridD(1, 1, 1.0);
    psf.right = GridD(1, 1, 1.0);
    return psf;
  }

  const int half = static_cast<int>(std::ceil(r));
  const int side = 2 * half + 1;
  const double sign = psf.radius > 0.0 ? 1.0 : -1.0;
  GridD right(side, side, 0.0);
  double total = 0.0;
  for (int j = 0; j < side; ++j) {
    for (int i = 0; i < side; ++i) {
      double acc = 0.0;
      for (int sy = 0; sy < kKernelSupersample; ++sy) {
        const double y = (j - half) + (sy + 0.5) / kKernelSupersample - 0.5;
        for (int sx = 0; sx < kKernelSupersample; ++sx) {
          const double x = (i - half) + (sx + 0.5) / kKernelSupersample - 0.5;
          if (x * x + y * y > r * r) continue;
          acc += std::max(0.0, sign * x / r);
        }
      }
      right(i, j) = acc;
      total += acc;
    }
  }
  for (auto& v : right.values()) v /= total;
  psf.left = mirrored(right);
  psf.right = std::move(right);
  return psf;
}

double kernel_centroid_x(const GridD& kernel) {
  const int r = kernel.width() / 2;
  double m = 0.0;
  double s = 0.0;
  for (int y = 0; y < kernel.height(); ++y) {
    for (int x = 0; x < kernel.width(); ++x) {
      m += kernel(x, y) * (x - r);
      s += kernel(x, y);
    }
  }
  return s > 0.0 ? m / s : 0.0;
}

void SimConfig::validate() const {
  if (!(pixel_pitch > 0.0) || !std::isfinite(pixel_pitch)) throw ConfigError("sim: pixel pitch must be > 0");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ConfigError("sim: noise sigma must be >= 0");
  if (layers < 1) throw ConfigError("sim: layers must be >= 1");
  if (!(max_radius > 0.0)) throw ConfigError("sim: max radius must be > 0");
}

DPImagePair simulate_dp(const Image& image, const DepthMap& depth, const CameraParams& cam,
                        const SimConfig& cfg) {
  cfg.validate();
  cam.validate();
  if (image.empty()) throw SimulationError("empty input image");
  if (image.width() != depth.width() || image.height() != depth.height()) {
    throw SimulationError("image and depth dimensions differ");
  }
  const int w = image.width();
  const int h = image.height();
  const GridD gray = image.gray();

  GridD inv_depth(w, h);
  double qmin = std::numeric_limits<double>::infinity();
  double qmax = -qmin;
  for (std::size_t i = 0; i < inv_depth.size(); ++i) {
    const double z = depth.values[i];
    if (!depth.valid[i] || !(z > 0.0) || !std::isfinite(z)) {
      throw SimulationError("depth map must be valid and positive everywhere");
    }
    inv_depth[i] = 1.0 / z;
    qmin = std::min(qmin, inv_depth[i]);
    qmax = std::max(qmax, inv_depth[i]);
  }

  const bool flat = qmax - qmin <= 1e-12 * qmax;
  const int n_layers = flat ? 1 : cfg.layers;
  std::vector<int> layer_of(inv_depth.size(), 0);
  std::vector<double> layer_sum(static_cast<std::size_t>(n_layers), 0.0);
  std::vector<std::size_t> layer_count(static_cast<std::size_t>(n_layers), 0);
  for (std::size_t i = 0; i < inv_depth.size(); ++i) {
    int k = 0;
    if (!flat) {
      k = static_cast<int>(std::floor((inv_depth[i] - qmin) / (qmax - qmin) * n_layers));
      k = std::clamp(k, 0, n_layers - 1);
    }
    layer_of[i] = k;
    layer_sum[static_cast<std::size_t>(k)] += inv_depth[i];
    ++layer_count[static_cast<std::size_t>(k)];
  }

  std::array<GridD, 2> out{GridD(w, h, 0.0), GridD(w, h, 0.0)};
  std::array<GridD, 2> coverage{GridD(w, h, 0.0), GridD(w, h, 0.0)};

  // Far (small inverse depth) to near.
  for (int k = 0; k < n_layers; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    if (layer_count[ku] == 0) continue;
    const double z_layer = static_cast<double>(layer_count[ku]) / layer_sum[ku];
    const auto psf = make_psf_pair(z_layer, cam, cfg.pixel_pitch, cfg.max_radius);
    const int radius = psf.support() / 2;
    const std::array<std::vector<KernelTap>, 2> taps{taps_of(psf.left), taps_of(psf.right)};

    GridD alpha(w, h, 0.0);
    GridD premult(w, h, 0.0);
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      if (layer_of[i] == k) {
        alpha[i] = 1.0;
        premult[i] = gray[i];
      }
    }

    std::array<GridD, 4> blurred;  // (color, alpha) x (left, right)
    parallel_for(0, 4, [&](std::ptrdiff_t t) {
      const auto view = static_cast<std::size_t>(t / 2);
      blurred[static_cast<std::size_t>(t)] = scatter(t % 2 == 0 ? premult : alpha, taps[view], radius);
    });

    for (std::size_t v = 0; v < 2; ++v) {
      const GridD& color = blurred[2 * v];
      const GridD& a = blurred[2 * v + 1];
      for (std::size_t i = 0; i < out[v].size(); ++i) {
        const double keep = 1.0 - a[i];
        out[v][i] = out[v][i] * keep + color[i];
        coverage[v][i] = coverage[v][i] * keep + a[i];
      }
    }
  }

  for (std::size_t v = 0; v < 2; ++v) {
    for (std::size_t i = 0; i < out[v].size(); ++i) {
      out[v][i] = coverage[v][i] > 1e-12 ? out[v][i] / coverage[v][i] : gray[i];
    }
  }

  if (cfg.noise_sigma > 0.0) {
    for (std::size_t v = 0; v < 2; ++v) {
      Rng rng(derive_seed(cfg.seed, v));
      std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
      for (auto& x : out[v].values()) x += noise(rng);
    }
  }
  for (auto& g : out) {
    for (auto& x : g.values()) x = std::clamp(x, 0.0, 1.0);
  }

  DPImagePair pair;
  pair.left = std::move(out[0]);
  pair.right = std::move(out[1]);
  pair.guide = image;
  return pair;
}

GridD render_random_dot_chart(int width, int height, double density, std::uint64_t seed, double x_offset) {
  if (width <= 0 || height <= 0) throw ConfigError("chart dimensions must be positive");
  if (!(density >= 0.0) || !(density < 1.0)) throw ConfigError("dot density must lie in [0, 1)");
  GridD chart(width, height, 0.0);
  if (density == 0.0) return chart;

  const double ext_w = width + 2.0 * kDotMargin;
  const double ext_h = height + 2.0 * kDotMargin;
  const double dot_area = std::numbers::pi * kDotRadius * kDotRadius;
  const auto n_dots = static_cast<std::size_t>(std::llround(-ext_w * ext_h * std::log1p(-density) / dot_area));

  const int ss = kDotSupersample;
  const int sw = width * ss;
  const int sh = height * ss;
  std::vector<std::uint8_t> hit(static_cast<std::size_t>(sw) * static_cast<std::size_t>(sh), 0);

  Rng rng(seed);
  const double r2 = kDotRadius * kDotRadius;
  for (std::size_t n = 0; n < n_dots; ++n) {
    const double cx = -kDotMargin + uniform01(rng) * ext_w + x_offset;
    const double cy = -kDotMargin + uniform01(rng) * ext_h;
    // Subsample s covers pixel coordinate (s + 0.5) / ss - 0.5.
    const int sx0 = std::max(0, static_cast<int>(std::floor((cx - kDotRadius + 0.5) * ss)));
    const int sx1 = std::min(sw - 1, static_cast<int>(std::ceil((cx + kDotRadius + 0.5) * ss)));
    const int sy0 = std::max(0, static_cast<int>(std::floor((cy - kDotRadius + 0.5) * ss)));
    const int sy1 = std::min(sh - 1, static_cast<int>(std::ceil((cy + kDotRadius + 0.5) * ss)));
    for (int sy = sy0; sy <= sy1; ++sy) {
      const double py = (sy + 0.5) / ss - 0.5 - cy;
      for (int sx = sx0; sx <= sx1; ++sx) {
        const double px = (sx + 0.5) / ss - 0.5 - cx;
        if (px * px + py * py <= r2) hit[static_cast<std::size_t>(sy) * sw + sx] = 1;
      }
    }
  }
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      int count = 0;
      for (int j = 0; j < ss; ++j) {
        for (int i = 0; i < ss; ++i) count += hit[static_cast<std::size_t>(y * ss + j) * sw + x * ss + i];
      }
      chart(x, y) = static_cast<double>(count) / (ss * ss);
    }
  }
  return chart;
}

}  // namespace dpdisp
