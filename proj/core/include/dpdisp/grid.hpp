#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace dpdisp {

/// Dense row-major single-channel 2-D grid.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width < 0 || height < 0) throw std::invalid_argument("negative grid size");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }

  T& operator()(int x, int y) {
    assert(contains(x, y));
    return data_[index(x, y)];
  }
  const T& operator()(int x, int y) const {
    assert(contains(x, y));
    return data_[index(x, y)];
  }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> row(int y) { return {data_.data() + index(0, y), static_cast<std::size_t>(width_)}; }
  std::span<const T> row(int y) const {
    return {data_.data() + index(0, y), static_cast<std::size_t>(width_)};
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

using GridD = Grid<double>;
using Mask = Grid<std::uint8_t>;

/// Planar multi-channel image (1 = gray, 3 = RGB), samples nominally in [0,1].
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0);
  explicit Image(GridD gray);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return static_cast<int>(planes_.size()); }
  bool empty() const { return planes_.empty() || planes_.front().empty(); }

  GridD& channel(int c) { return planes_.at(static_cast<std::size_t>(c)); }
  const GridD& channel(int c) const { return planes_.at(static_cast<std::size_t>(c)); }

  double& operator()(int x, int y, int c) { return planes_[static_cast<std::size_t>(c)](x, y); }
  double operator()(int x, int y, int c) const { return planes_[static_cast<std::size_t>(c)](x, y); }

  /// Rec.601 luma for RGB, identity for single channel.
  GridD gray() const;

  /// L1 distance between two pixels across all channels.
  double l1_distance(int x0, int y0, int x1, int y1) const {
    double s = 0.0;
    for (const auto& p : planes_) s += std::abs(p(x0, y0) - p(x1, y1));
    return s;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<GridD> planes_;
};

}  // namespace dpdisp
