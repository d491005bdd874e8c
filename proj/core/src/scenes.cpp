#include "dpdisp/scenes.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "dpdisp/error.hpp"
#include "dpdisp/optics.hpp"
#include "dpdisp/random.hpp"

namespace dpdisp {
namespace {

using Rgb = std::array<double, 3>;

constexpr double kTextureDensity = 0.2;
constexpr double kTextureAmplitude = 0.3;

// Paints per-pixel region colors, then adds a shared random-dot texture.
Image paint(const Grid<int>& region, const std::vector<Rgb>& colors, std::uint64_t seed) {
  const int w = region.width();
  const int h = region.height();
  const GridD dots = render_random_dot_chart(w, h, kTextureDensity, seed);
  Image img(w, h, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Rgb& c = colors[static_cast<std::size_t>(region(x, y))];
      for (int ch = 0; ch < 3; ++ch) {
        img(x, y, ch) = std::clamp(c[static_cast<std::size_t>(ch)] + kTextureAmplitude * (dots(x, y) - 0.5), 0.0, 1.0);
      }
    }
  }
  return img;
}

}  // namespace

std::string_view scene_kind_name(SceneKind kind) {
  switch (kind) {
    case SceneKind::kTwoPlane: return "two-plane";
    case SceneKind::kStepEdge: return "step-edge";
    case SceneKind::kSlanted: return "slanted";
    case SceneKind::kBoxes: return "boxes";
    case SceneKind::kDisc: return "disc";
  }
  return "unknown";
}

SceneKind scene_kind_from_name(std::string_view name) {
  for (auto k : {SceneKind::kTwoPlane, SceneKind::kStepEdge, SceneKind::kSlanted, SceneKind::kBoxes, SceneKind::kDisc}) {
    if (scene_kind_name(k) == name) return k;
  }
  throw ConfigError("unknown scene kind '" + std::string(name) + "'");
}

Scene make_scene(SceneKind kind, const SceneOptions& opts, std::uint64_t seed) {
  const int w = opts.width;
  const int h = opts.height;
  if (w < 8 || h < 8) throw ConfigError("scene must be at least 8x8");
  if (!(opts.near_depth > 0.0) || !(opts.far_depth > opts.near_depth)) {
    throw ConfigError("scene depths must satisfy 0 < near < far");
  }
  const int edge = opts.edge_column >= 0 ? opts.edge_column : w / 2;
  if (edge <= 0 || edge >= w) throw ConfigError("scene edge column must lie inside the image");

  Rng rng(derive_seed(seed, 0));
  Grid<int> region(w, h, 0);
  GridD depth(w, h, opts.far_depth);
  std::vector<Rgb> colors;
  auto random_color = [&]() {
    return Rgb{0.2 + 0.6 * uniform01(rng), 0.2 + 0.6 * uniform01(rng), 0.2 + 0.6 * uniform01(rng)};
  };

  switch (kind) {
    case SceneKind::kTwoPlane:
    case SceneKind::kStepEdge: {
      // Two-plane: near on the left. Step edge: near on the right.
      const bool near_left = kind == SceneKind::kTwoPlane;
      colors = {Rgb{0.25, 0.3, 0.35}, Rgb{0.75, 0.7, 0.6}};
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const bool left = x < edge;
          region(x, y) = left ? 0 : 1;
          depth(x, y) = left == near_left ? opts.near_depth : opts.far_depth;
        }
      }
      break;
    }
    case SceneKind::kSlanted: {
      colors = {Rgb{0.35, 0.4, 0.45}, Rgb{0.6, 0.55, 0.5}};
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const double t = static_cast<double>(x) / (w - 1);
          depth(x, y) = 1.0 / ((1.0 - t) / opts.near_depth + t / opts.far_depth);
          region(x, y) = (y / 32) % 2;
        }
      }
      break;
    }
    case SceneKind::kBoxes: {
      colors = {Rgb{0.3, 0.3, 0.3}};
      constexpr int kBoxes = 3;
      for (int b = 0; b < kBoxes; ++b) {
        colors.push_back(random_color());
        const int bw = w / 5 + static_cast<int>(uniform01(rng) * (w / 6));
        const int bh = h / 5 + static_cast<int>(uniform01(rng) * (h / 6));
        const int x0 = static_cast<int>(uniform01(rng) * (w - bw));
        const int y0 = static_cast<int>(uniform01(rng) * (h - bh));
        const double t = (b + 1.0) / (kBoxes + 1.0);
        const double z = 1.0 / ((1.0 - t) / opts.far_depth + t / opts.near_depth);
        for (int y = y0; y < y0 + bh; ++y) {
          for (int x = x0; x < x0 + bw; ++x) {
            if (z < depth(x, y)) {
              depth(x, y) = z;
              region(x, y) = b + 1;
            }
          }
        }
      }
      break;
    }
    case SceneKind::kDisc: {
      colors = {Rgb{0.7, 0.65, 0.55}, Rgb{0.25, 0.35, 0.3}};
      const double cx = 0.5 * (w - 1);
      const double cy = 0.5 * (h - 1);
      const double r = 0.3 * std::min(w, h);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          if (std::hypot(x - cx, y - cy) <= r) {
            region(x, y) = 1;
            depth(x, y) = opts.near_depth;
          }
        }
      }
      break;
    }
  }

  Scene s;
  s.name = std::string(scene_kind_name(kind));
  s.image = paint(region, colors, derive_seed(seed, 1));
  s.depth = DepthMap::dense(std::move(depth));
  return s;
}

std::vector<Scene> regression_scenes(std::uint64_t seed, int width, int height) {
  SceneOptions opts;
  opts.width = width;
  opts.height = height;
  std::vector<Scene> out;
  std::uint64_t i = 0;
  for (auto k : {SceneKind::kTwoPlane, SceneKind::kStepEdge, SceneKind::kSlanted, SceneKind::kBoxes, SceneKind::kDisc}) {
    out.push_back(make_scene(k, opts, derive_seed(seed, i++)));
  }
  return out;
}

}  // namespace dpdisp
