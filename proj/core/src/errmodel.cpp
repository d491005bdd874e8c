#include "dpdisp/errmodel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <string>

#include "dpdisp/conversion.hpp"
#include "dpdisp/error.hpp"

namespace dpdisp {
namespace {

struct LogPoint {
  double z;
  double log_ratio;  // log(z / (F z_f))
  double y;          // log sigma
};

// log sigma = t0 + z exp(-t2) (t1 + log(z / (F z_f))),  t = log(c1, c2, c3)
double log_model(const std::array<double, 3>& t, const LogPoint& p) {
  return t[0] + p.z * std::exp(-t[2]) * (t[1] + p.log_ratio);
}

double sse(const std::array<double, 3>& t, const std::vector<LogPoint>& pts) {
  double s = 0.0;
  for (const auto& p : pts) {
    const double r = p.y - log_model(t, p);
    s += r * r;
  }
  return s;
}

bool solve3(std::array<std::array<double, 3>, 3> a, std::array<double, 3> b, std::array<double, 3>& x) {
  for (int c = 0; c < 3; ++c) {
    int piv = c;
    for (int r = c + 1; r < 3; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (std::abs(a[piv][c]) < 1e-300) return false;
    std::swap(a[c], a[piv]);
    std::swap(b[c], b[piv]);
    for (int r = c + 1; r < 3; ++r) {
      const double f = a[r][c] / a[c][c];
      for (int k = c; k < 3; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (int r = 2; r >= 0; --r) {
    double s = b[r];
    for (int k = r + 1; k < 3; ++k) s -= a[r][k] * x[k];
    x[r] = s / a[r][r];
  }
  return true;
}

}  // namespace

void ErrorModel::validate() const {
  for (double c : {c1, c2, c3}) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("error model constants must be positive and finite");
  }
}

double sigma_d(const ErrorModel& model, double z, double z_f, double f_number) {
  return model.c1 * std::pow(model.c2 * z / (f_number * z_f), z / model.c3);
}

void SweepConfig::validate() const {
  if (z.empty() || z_f.empty() || f_number.empty()) throw ConfigError("sweep: z, z_f and f_number must be non-empty");
  auto positive = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return x > 0.0 && std::isfinite(x); });
  };
  if (!positive(z) || !positive(z_f) || !positive(f_number)) {
    throw ConfigError("sweep: depths, focus distances and f-numbers must be positive");
  }
  if (!(focal_length > 0.0) || !(pixel_pitch > 0.0)) throw ConfigError("sweep: focal length and pitch must be > 0");
  if (width < match.window || height < match.window) throw ConfigError("sweep: image smaller than the match window");
  if (!(dot_density > 0.0 && dot_density < 1.0)) throw ConfigError("sweep: dot density must be in (0, 1)");
  match.validate();
}

SweepRecord measure_sweep_point(double z, double z_f, double f_number, const SweepConfig& cfg,
                                std::uint64_t seed) {
  const auto cam = CameraParams::from_f_number(cfg.focal_length, f_number, z_f, calibrated_alpha(cfg.pixel_pitch));
  const auto chart = render_random_dot_chart(cfg.width, cfg.height, cfg.dot_density, derive_seed(seed, 0));
  DepthMap depth = DepthMap::dense(GridD(cfg.width, cfg.height, z));

  SimConfig sim;
  sim.pixel_pitch = cfg.pixel_pitch;
  sim.noise_sigma = cfg.noise_sigma;
  sim.seed = derive_seed(seed, 1);
  const auto pair = simulate_dp(Image(chart), depth, cam, sim);

  auto mask = edge_mask(pair.left, cfg.match);
  const int margin = cfg.match.window / 2;
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      if (x < margin || y < margin || x >= cfg.width - margin || y >= cfg.height - margin) mask.values(x, y) = 0.0;
    }
  }
  const auto matched = template_match(pair, mask, cfg.match);
  const double d_true = disparity_from_depth(z, cam);

  double sum = 0.0;
  double sum2 = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < matched.values.size(); ++i) {
    if (!matched.valid[i]) continue;
    const double e = matched.values[i] - d_true;
    sum += e;
    sum2 += e * e;
    ++n;
  }
  if (n < 100) {
    throw SimulationError("sweep point z=" + std::to_string(z) + " yields only " + std::to_string(n) +
                          " matched pixels (need >= 100)");
  }
  const double mean = sum / n;
  SweepRecord rec;
  rec.z = z;
  rec.z_f = z_f;
  rec.f_number = f_number;
  rec.sigma_measured = std::sqrt(std::max(0.0, sum2 / n - mean * mean));
  rec.n_samples = n;
  return rec;
}

std::vector<SweepRecord> run_error_sweep(const SweepConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::vector<SweepRecord> out;
  std::uint64_t index = 0;
  for (double zf : cfg.z_f) {
    for (double fnum : cfg.f_number) {
      for (double z : cfg.z) {
        out.push_back(measure_sweep_point(z, zf, fnum, cfg, derive_seed(seed, index++)));
      }
    }
  }
  return out;
}

FitResult fit_error_model(std::span<const SweepRecord> records, const FitOptions& opts) {
  std::vector<LogPoint> pts;
  std::set<double> depths;
  for (const auto& r : records) {
    if (!(r.sigma_measured > 0.0) || !std::isfinite(r.sigma_measured)) continue;
    if (!(r.z > 0.0) || !(r.z_f > 0.0) || !(r.f_number > 0.0)) continue;
    pts.push_back({r.z, std::log(r.z / (r.f_number * r.z_f)), std::log(r.sigma_measured)});
    depths.insert(r.z);
  }
  if (pts.size() < 10 || depths.size() < 3) {
    throw FitError("degenerate sweep: need >= 10 records spanning >= 3 depths (got " + std::to_string(pts.size()) +
                   " records, " + std::to_string(depths.size()) + " depths)");
  }

  // Coarse grid over (t1, t2); t0 has a closed form for fixed (t1, t2).
  std::array<double, 3> t{0.0, 0.0, 0.0};
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 80; ++i) {
    for (int j = 0; j <= 70; ++j) {
      std::array<double, 3> c{0.0, -4.0 + 0.1 * i, -3.0 + 0.1 * j};
      double mean = 0.0;
      for (const auto& p : pts) mean += p.y - (log_model(c, p) - c[0]);
      c[0] = mean / static_cast<double>(pts.size());
      const double s = sse(c, pts);
      if (s < best) {
        best = s;
        t = c;
      }
    }
  }

  double mu = 1e-3;
  double cur = best;
  bool converged = false;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    std::array<std::array<double, 3>, 3> jtj{};
    std::array<double, 3> jtr{};
    for (const auto& p : pts) {
      const double e = std::exp(-t[2]);
      const std::array<double, 3> g{1.0, p.z * e, -p.z * e * (t[1] + p.log_ratio)};
      const double r = p.y - log_model(t, p);
      for (int a = 0; a < 3; ++a) {
        jtr[a] += g[a] * r;
        for (int b = 0; b < 3; ++b) jtj[a][b] += g[a] * g[b];
      }
    }
    bool improved = false;
    for (int attempt = 0; attempt < 60 && !improved; ++attempt) {
      auto a = jtj;
      for (int k = 0; k < 3; ++k) a[k][k] += mu * (jtj[k][k] + 1e-12);
      std::array<double, 3> step{};
      if (!solve3(a, jtr, step)) {
        mu *= 10.0;
        continue;
      }
      const std::array<double, 3> cand{t[0] + step[0], t[1] + step[1], t[2] + step[2]};
      const double s = sse(cand, pts);
      if (std::isfinite(s) && s <= cur) {
        const double gain = cur - s;
        const double step_norm = std::sqrt(step[0] * step[0] + step[1] * step[1] + step[2] * step[2]);
        t = cand;
        improved = true;
        mu = std::max(mu / 10.0, 1e-15);
        if (gain <= opts.tolerance * (cur + 1e-300) || step_norm < 1e-12 || s < 1e-28) converged = true;
        cur = s;
      } else {
        mu *= 10.0;
      }
    }
    if (!improved) {
      // No descent direction left: the current point is stationary to working precision.
      converged = true;
    }
    if (converged) break;
  }
  if (!converged) throw FitError("error-model fit did not converge in " + std::to_string(opts.max_iterations) +
                                 " iterations");

  FitResult res;
  res.model = ErrorModel{std::exp(t[0]), std::exp(t[1]), std::exp(t[2])};
  res.residual_rms = std::sqrt(cur / static_cast<double>(pts.size()));
  res.iterations = it + 1;
  return res;
}

double sample_disparity(double d, double sigma, Rng& rng) {
  if (!(sigma >= 0.0)) throw ConfigError("sample_disparity: sigma must be >= 0");
  if (sigma == 0.0) return d;
  const double b = sigma / std::numbers::sqrt2;
  for (;;) {
    const double u = uniform01(rng) - 0.5;
    const double tail = 1.0 - 2.0 * std::abs(u);
    if (tail <= 0.0) continue;
    return d - b * (u < 0.0 ? -1.0 : 1.0) * std::log(tail);
  }
}

CameraParams CameraSampler::sample(Rng& rng) const {
  const double z_f = std::exp(std::log(z_f_min) + uniform01(rng) * (std::log(z_f_max) - std::log(z_f_min)));
  const auto idx = std::min(f_numbers.size() - 1, static_cast<std::size_t>(uniform01(rng) * f_numbers.size()));
  const double focal = focal_min + uniform01(rng) * (focal_max - focal_min);
  return CameraParams::from_f_number(focal, f_numbers[idx], z_f, calibrated_alpha(pixel_pitch));
}

TrainingSample generate_training_sample(const Image& rgb, const DepthMap& depth, const CameraSampler& sampler,
                                        const ErrorModel& model, const MatchConfig& match_cfg, Rng& rng) {
  if (rgb.width() != depth.width() || rgb.height() != depth.height()) {
    throw ConfigError("training sample: rgb and depth dimensions differ");
  }
  for (double c : {model.c1, model.c2, model.c3}) {
    if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError("training sample: invalid error model");
  }

  TrainingSample s;
  s.camera = sampler.sample(rng);
  s.pseudo_gt = depth_to_disparity(depth, s.camera);
  const auto mask = edge_mask(rgb.gray(), match_cfg);
  s.sparse = DisparityMap(depth.width(), depth.height());
  for (std::size_t i = 0; i < s.sparse.values.size(); ++i) {
    if (mask.values[i] < 0.5 || !s.pseudo_gt.valid[i]) continue;
    const double sd = model.c1 == 0.0 ? 0.0 : sigma_d(model, depth.values[i], s.camera.focus_distance, s.camera.f_number);
    s.sparse.values[i] = sample_disparity(s.pseudo_gt.values[i], sd, rng);
    s.sparse.valid[i] = 1;
  }
  s.guide = rgb;
  return s;
}

}  // namespace dpdisp
