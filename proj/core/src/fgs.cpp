#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "dpdisp/error.hpp"
#include "dpdisp/parallel.hpp"
#include "dpdisp/refine.hpp"

namespace dpdisp {
namespace {

constexpr double kEps = 1e-10;

struct EdgeWeights {
  GridD wx;  // (x, y) <-> (x + 1, y)
  GridD wy;  // (x, y) <-> (x, y + 1)
};

EdgeWeights edge_weights(const Image& guide, double sigma_color) {
  const int w = guide.width();
  const int h = guide.height();
  EdgeWeights e{GridD(std::max(w - 1, 0), h), GridD(w, std::max(h - 1, 0))};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x + 1 < w; ++x) e.wx(x, y) = guide_weight(guide, x, y, x + 1, y, sigma_color);
  }
  for (int y = 0; y + 1 < h; ++y) {
    for (int x = 0; x < w; ++x) e.wy(x, y) = guide_weight(guide, x, y, x, y + 1, sigma_color);
  }
  return e;
}

void check_inputs(const DisparityMap& f, const ConfidenceMap& h, const Image& guide) {
  if (f.width() != h.width() || f.height() != h.height() || f.width() != guide.width() ||
      f.height() != guide.height()) {
    throw SolverError("fgs: disparity, confidence and guide dimensions differ");
  }
}

// Effective data weight: zero where f is invalid.
GridD data_weight(const DisparityMap& f, const ConfidenceMap& h) {
  GridD c(f.width(), f.height(), 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = f.valid[i] ? h.values[i] : 0.0;
  return c;
}

// Solves (diag(d) + L) x = rhs for the 1-D chain Laplacian L with edge weights k.
// All vectors have length n; k has length n - 1. Scratch buffers are reused.
void solve_chain(const double* d, const double* k, const double* rhs, double* x, int n,
                 std::vector<double>& cp, std::vector<double>& dp) {
  if (n == 1) {
    x[0] = rhs[0] / d[0];
    return;
  }
  cp.resize(n);
  dp.resize(n);
  double b = d[0] + k[0];
  cp[0] = -k[0] / b;
  dp[0] = rhs[0] / b;
  for (int i = 1; i < n; ++i) {
    const double left = k[i - 1];
    const double right = i + 1 < n ? k[i] : 0.0;
    const double m = d[i] + left + right + left * cp[i - 1];
    cp[i] = i + 1 < n ? -right / m : 0.0;
    dp[i] = (rhs[i] + left * dp[i - 1]) / m;
  }
  x[n - 1] = dp[n - 1];
  for (int i = n - 2; i >= 0; --i) x[i] = dp[i] - cp[i] * x[i + 1];
}

// One 1-D pass along rows (horizontal) or columns. Updates u with the
// confidence-weighted smoother and spreads c with the unit-weight smoother.
void pass(GridD& u, GridD& c, const GridD& weights, double lambda, bool horizontal) {
  const int lines = horizontal ? u.height() : u.width();
  const int n = horizontal ? u.width() : u.height();
  parallel_for(0, lines, [&](std::ptrdiff_t line) {
    const int l = static_cast<int>(line);
    auto at = [&](GridD& g, int i) -> double& { return horizontal ? g(i, l) : g(l, i); };
    std::vector<double> cu(n), uu(n), k(std::max(n - 1, 0)), d(n), rhs(n), out(n), cp, dp;
    bool any = false;
    for (int i = 0; i < n; ++i) {
      cu[i] = at(c, i);
      uu[i] = at(u, i);
      any = any || cu[i] > 0.0;
    }
    if (!any) return;
    for (int i = 0; i + 1 < n; ++i) {
      k[i] = 2.0 * lambda * (horizontal ? weights(i, l) : weights(l, i));
    }
    for (int i = 0; i < n; ++i) {
      d[i] = cu[i] + kEps;
      rhs[i] = d[i] * uu[i];
    }
    solve_chain(d.data(), k.data(), rhs.data(), out.data(), n, cp, dp);
    for (int i = 0; i < n; ++i) at(u, i) = out[i];
    std::fill(d.begin(), d.end(), 1.0);
    solve_chain(d.data(), k.data(), cu.data(), out.data(), n, cp, dp);
    for (int i = 0; i < n; ++i) at(c, i) = out[i];
  });
}

// Starting estimate: data where it exists, linear interpolation along rows
// elsewhere, then along columns for rows without data. Pixels the smoother
// cannot reach through the guide keep this value.
GridD initial_fill(const DisparityMap& f, const GridD& c) {
  const int w = f.width();
  const int h = f.height();
  GridD u(w, h, 0.0);
  std::vector<uint8_t> row_has(static_cast<std::size_t>(h), 0);
  for (int y = 0; y < h; ++y) {
    int prev = -1;
    for (int x = 0; x <= w; ++x) {
      if (x < w && !(c(x, y) > 0.0)) continue;
      if (x < w) u(x, y) = f.values(x, y);
      if (prev < 0 && x < w) {
        for (int i = 0; i < x; ++i) u(i, y) = u(x, y);
      } else if (prev >= 0 && x == w) {
        for (int i = prev + 1; i < w; ++i) u(i, y) = u(prev, y);
      } else if (prev >= 0) {
        const double a = u(prev, y);
        const double b = u(x, y);
        for (int i = prev + 1; i < x; ++i) u(i, y) = a + (b - a) * (i - prev) / static_cast<double>(x - prev);
      }
      if (x < w) prev = x;
    }
    row_has[static_cast<std::size_t>(y)] = prev >= 0;
  }
  int prev = -1;
  for (int y = 0; y <= h; ++y) {
    if (y < h && !row_has[static_cast<std::size_t>(y)]) continue;
    for (int x = 0; x < w; ++x) {
      if (prev < 0 && y < h) {
        for (int j = 0; j < y; ++j) u(x, j) = u(x, y);
      } else if (prev >= 0 && y == h) {
        for (int j = prev + 1; j < h; ++j) u(x, j) = u(x, prev);
      } else if (prev >= 0) {
        const double a = u(x, prev);
        const double b = u(x, y);
        for (int j = prev + 1; j < y; ++j) u(x, j) = a + (b - a) * (j - prev) / static_cast<double>(y - prev);
      }
    }
    if (y < h) prev = y;
  }
  return u;
}

}  // namespace

void FgsConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("fgs: lambda must be >= 0");
  if (!(sigma_color > 0.0)) throw ConfigError("fgs: sigma_color must be > 0");
  if (iterations < 1) throw ConfigError("fgs: iterations must be >= 1");
}

double FgsConfig::lambda_at(int t) const {
  if (schedule == LambdaSchedule::kConstant) return lambda;
  const double T = iterations;
  return 3.0 * lambda * std::pow(4.0, T - t) / (std::pow(4.0, T) - 1.0);
}

double guide_weight(const Image& guide, int x0, int y0, int x1, int y1, double sigma_color) {
  return std::exp(-guide.l1_distance(x0, y0, x1, y1) / sigma_color);
}

double fgs_energy(const DisparityMap& u, const DisparityMap& f, const ConfidenceMap& h, const Image& guide,
                  const FgsConfig& cfg) {
  check_inputs(f, h, guide);
  if (u.width() != f.width() || u.height() != f.height()) throw SolverError("fgs_energy: size mismatch");
  const auto c = data_weight(f, h);
  const auto e = edge_weights(guide, cfg.sigma_color);
  double data = 0.0;
  double smooth = 0.0;
  for (int y = 0; y < u.height(); ++y) {
    for (int x = 0; x < u.width(); ++x) {
      const double up = u.values(x, y);
      if (c(x, y) > 0.0) data += c(x, y) * (up - f.values(x, y)) * (up - f.values(x, y));
      if (x + 1 < u.width()) {
        const double dx = up - u.values(x + 1, y);
        smooth += e.wx(x, y) * dx * dx;
      }
      if (y + 1 < u.height()) {
        const double dy = up - u.values(x, y + 1);
        smooth += e.wy(x, y) * dy * dy;
      }
    }
  }
  return data + 2.0 * cfg.lambda * smooth;
}

DisparityMap fgs_solve(const DisparityMap& f, const ConfidenceMap& h, const Image& guide, const FgsConfig& cfg) {
  cfg.validate();
  check_inputs(f, h, guide);
  GridD c = data_weight(f, h);
  if (std::none_of(c.values().begin(), c.values().end(), [](double v) { return v > 0.0; })) {
    throw SolverError("fgs: confidence is zero everywhere; nothing to propagate");
  }
  GridD u = initial_fill(f, c);

  const auto e = edge_weights(guide, cfg.sigma_color);
  for (int t = 1; t <= cfg.iterations; ++t) {
    const double lt = cfg.lambda_at(t);
    pass(u, c, e.wx, lt, true);
    pass(u, c, e.wy, lt, false);
  }
  return DisparityMap::dense(std::move(u));
}

DisparityMap fgs_solve_exact(const DisparityMap& f, const ConfidenceMap& h, const Image& guide, const FgsConfig& cfg,
                             const ExactSolveOptions& opts) {
  cfg.validate();
  check_inputs(f, h, guide);
  const int w = f.width();
  const int ht = f.height();
  const std::size_t n = f.values.size();
  if (static_cast<long long>(n) > opts.max_pixels) {
    throw SolverError("fgs_solve_exact: " + std::to_string(w) + "x" + std::to_string(ht) +
                      " exceeds the exact-solver size limit");
  }
  const auto c = data_weight(f, h);
  if (std::none_of(c.values().begin(), c.values().end(), [](double v) { return v > 0.0; })) {
    throw SolverError("fgs_solve_exact: confidence is zero everywhere; system is singular");
  }
  const auto e = edge_weights(guide, cfg.sigma_color);
  const double s = 2.0 * cfg.lambda;

  GridD diag(w, ht, 0.0);
  for (int y = 0; y < ht; ++y) {
    for (int x = 0; x < w; ++x) {
      double dsum = c(x, y);
      if (x > 0) dsum += s * e.wx(x - 1, y);
      if (x + 1 < w) dsum += s * e.wx(x, y);
      if (y > 0) dsum += s * e.wy(x, y - 1);
      if (y + 1 < ht) dsum += s * e.wy(x, y);
      diag(x, y) = dsum;
    }
  }
  auto apply = [&](const GridD& v, GridD& out) {
    for (int y = 0; y < ht; ++y) {
      for (int x = 0; x < w; ++x) {
        double r = diag(x, y) * v(x, y);
        if (x > 0) r -= s * e.wx(x - 1, y) * v(x - 1, y);
        if (x + 1 < w) r -= s * e.wx(x, y) * v(x + 1, y);
        if (y > 0) r -= s * e.wy(x, y - 1) * v(x, y - 1);
        if (y + 1 < ht) r -= s * e.wy(x, y) * v(x, y + 1);
        out(x, y) = r;
      }
    }
  };
  auto dot = [](const GridD& a, const GridD& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
  };

  GridD b(w, ht, 0.0);
  for (std::size_t i = 0; i < n; ++i) b[i] = c[i] > 0.0 ? c[i] * f.values[i] : 0.0;
  GridD x(w, ht, 0.0);
  GridD r = b;
  GridD z(w, ht), p(w, ht), ap(w, ht);
  // diag == 0 only happens at lambda = 0 on pixels without data; they are left undetermined.
  auto precondition = [&](std::size_t i) { return diag[i] > 0.0 ? r[i] / diag[i] : 0.0; };
  auto result = [&] {
    DisparityMap u = DisparityMap::dense(std::move(x));
    for (int y = 0; y < ht; ++y) {
      for (int xx = 0; xx < w; ++xx) {
        if (diag(xx, y) == 0.0) u.invalidate(xx, y);
      }
    }
    return u;
  };
  for (std::size_t i = 0; i < n; ++i) z[i] = precondition(i);
  p = z;
  double rz = dot(r, z);
  const double bnorm = std::sqrt(dot(b, b));
  const long long max_it = opts.max_iterations > 0 ? opts.max_iterations : 20LL * static_cast<long long>(n);
  if (bnorm == 0.0) return result();
  for (long long it = 0; it < max_it; ++it) {
    if (std::sqrt(dot(r, r)) <= opts.tolerance * bnorm) return result();
    apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) throw SolverError("fgs_solve_exact: conjugate gradient breakdown");
    const double a = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += a * p[i];
      r[i] -= a * ap[i];
      z[i] = precondition(i);
    }
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  if (std::sqrt(dot(r, r)) <= opts.tolerance * bnorm) return result();
  throw SolverError("fgs_solve_exact: no convergence within the iteration limit");
}

}  // namespace dpdisp
