#include "dpdisp/filters.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpdisp/parallel.hpp"

namespace dpdisp {
namespace {

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = v;
    sum += v;
  }
  for (auto& v : k) v /= sum;
  return k;
}

// One-dimensional squared-distance transform (Felzenszwalb & Huttenlocher).
void edt_1d(std::span<const double> f, std::span<double> d, std::vector<int>& v,
            std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double inf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (!std::isfinite(f[static_cast<std::size_t>(q)])) continue;
    while (k >= 0) {
      const int p = v[static_cast<std::size_t>(k)];
      const double s = ((f[static_cast<std::size_t>(q)] + q * q) - (f[static_cast<std::size_t>(p)] + p * p)) /
                       (2.0 * (q - p));
      if (s <= z[static_cast<std::size_t>(k)]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[static_cast<std::size_t>(k)] = q;
    if (k == 0) {
      z[0] = -inf;
    } else {
      const int p = v[static_cast<std::size_t>(k - 1)];
      z[static_cast<std::size_t>(k)] =
          ((f[static_cast<std::size_t>(q)] + q * q) - (f[static_cast<std::size_t>(p)] + p * p)) / (2.0 * (q - p));
    }
    z[static_cast<std::size_t>(k + 1)] = inf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), inf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[static_cast<std::size_t>(j + 1)] < q) ++j;
    const int p = v[static_cast<std::size_t>(j)];
    d[static_cast<std::size_t>(q)] = (q - p) * (q - p) + f[static_cast<std::size_t>(p)];
  }
}

}  // namespace

GridD gaussian_blur(const GridD& src, double sigma) {
  if (sigma <= 0.0 || src.empty()) return src;
  const auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  const int w = src.width();
  const int h = src.height();

  GridD tmp(w, h);
  parallel_for(0, h, [&](std::ptrdiff_t yy) {
    const int y = static_cast<int>(yy);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * src(reflect_index(x + i, w), y);
      tmp(x, y) = acc;
    }
  });
  GridD out(w, h);
  parallel_for(0, h, [&](std::ptrdiff_t yy) {
    const int y = static_cast<int>(yy);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += k[static_cast<std::size_t>(i + r)] * tmp(x, reflect_index(y + i, h));
      out(x, y) = acc;
    }
  });
  return out;
}

SobelResponse sobel(const GridD& src) {
  const int w = src.width();
  const int h = src.height();
  SobelResponse r{GridD(w, h), GridD(w, h), GridD(w, h)};
  parallel_for(0, h, [&](std::ptrdiff_t yy) {
    const int y = static_cast<int>(yy);
    const int ym = reflect_index(y - 1, h);
    const int yp = reflect_index(y + 1, h);
    for (int x = 0; x < w; ++x) {
      const int xm = reflect_index(x - 1, w);
      const int xp = reflect_index(x + 1, w);
      const double gx = (src(xp, ym) + 2.0 * src(xp, y) + src(xp, yp)) -
                        (src(xm, ym) + 2.0 * src(xm, y) + src(xm, yp));
      const double gy = (src(xm, yp) + 2.0 * src(x, yp) + src(xp, yp)) -
                        (src(xm, ym) + 2.0 * src(x, ym) + src(xp, ym));
      r.gx(x, y) = gx;
      r.gy(x, y) = gy;
      r.magnitude(x, y) = std::hypot(gx, gy);
    }
  });
  return r;
}

GridD max_filter(const GridD& src, int radius) {
  if (radius <= 0) return src;
  const int w = src.width();
  const int h = src.height();
  GridD tmp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double m = -std::numeric_limits<double>::infinity();
      for (int i = std::max(0, x - radius); i <= std::min(w - 1, x + radius); ++i) m = std::max(m, src(i, y));
      tmp(x, y) = m;
    }
  }
  GridD out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double m = -std::numeric_limits<double>::infinity();
      for (int j = std::max(0, y - radius); j <= std::min(h - 1, y + radius); ++j) m = std::max(m, tmp(x, j));
      out(x, y) = m;
    }
  }
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  q = std::clamp(q, 0.0, 1.0);
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(values.size() - 1, lo + 1);
  const double t = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - t) + values[hi] * t;
}

GridD distance_transform(const Mask& seeds) {
  const int w = seeds.width();
  const int h = seeds.height();
  constexpr double inf = std::numeric_limits<double>::infinity();
  GridD sq(w, h, inf);
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (seeds[i]) sq[i] = 0.0;
  }
  const int n = std::max(w, h);
  std::vector<int> v(static_cast<std::size_t>(n));
  std::vector<double> z(static_cast<std::size_t>(n + 1));
  std::vector<double> f(static_cast<std::size_t>(n));
  std::vector<double> d(static_cast<std::size_t>(n));

  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[static_cast<std::size_t>(y)] = sq(x, y);
    edt_1d(std::span(f).first(static_cast<std::size_t>(h)), std::span(d).first(static_cast<std::size_t>(h)), v, z);
    for (int y = 0; y < h; ++y) sq(x, y) = d[static_cast<std::size_t>(y)];
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) f[static_cast<std::size_t>(x)] = sq(x, y);
    edt_1d(std::span(f).first(static_cast<std::size_t>(w)), std::span(d).first(static_cast<std::size_t>(w)), v, z);
    for (int x = 0; x < w; ++x) sq(x, y) = std::sqrt(d[static_cast<std::size_t>(x)]);
  }
  return sq;
}

}  // namespace dpdisp
