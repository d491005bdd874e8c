#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dpdisp/types.hpp"

namespace dpdisp {

/// Synthetic textured scene with ground-truth depth.
struct Scene {
  std::string name;
  Image image;
  DepthMap depth;
};

enum class SceneKind {
  kTwoPlane,  ///< near plane on the left, far plane on the right
  kStepEdge,  ///< far plane on the left, near plane on the right
  kSlanted,   ///< depth varies linearly across the frame
  kBoxes,     ///< rectangles at several depths over a background
  kDisc,      ///< near disc over a far background
};

std::string_view scene_kind_name(SceneKind kind);
SceneKind scene_kind_from_name(std::string_view name);  // throws ConfigError

struct SceneOptions {
  int width = 192;
  int height = 192;
  double near_depth = 1.5;
  double far_depth = 3.0;
  /// Column of the depth edge for kTwoPlane / kStepEdge (default: center).
  int edge_column = -1;
};

/// Regions carry distinct base intensities plus sparse random texture so
/// both matching and guided filtering have something to work with.
Scene make_scene(SceneKind kind, const SceneOptions& opts, std::uint64_t seed);

/// The five regression scenes used by end-to-end tests.
std::vector<Scene> regression_scenes(std::uint64_t seed, int width = 192, int height = 192);

}  // namespace dpdisp
