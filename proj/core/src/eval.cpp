#include "dpdisp/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dpdisp/error.hpp"

namespace dpdisp {
namespace {

constexpr double kIrlsEps = 1e-9;
constexpr double kIrlsTol = 1e-8;
constexpr int kIrlsMaxIterations = 1000;

double power_mean(std::span<const double> est, std::span<const double> gt, double b0, double b1, double p) {
  double acc = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) acc += std::pow(std::abs(gt[i] - (b0 + b1 * est[i])), p);
  return std::pow(acc / static_cast<double>(est.size()), 1.0 / p);
}

// Weighted least squares for gt ~ b0 + b1 est. Returns false if est has no
// weighted spread. Centered sums keep the normal equations well conditioned.
bool weighted_line(std::span<const double> est, std::span<const double> gt, std::span<const double> w, double& b0,
                   double& b1) {
  double sw = 0.0, mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    sw += w[i];
    mx += w[i] * est[i];
    my += w[i] * gt[i];
  }
  if (!(sw > 0.0)) return false;
  mx /= sw;
  my /= sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < est.size(); ++i) {
    const double dx = est[i] - mx;
    sxx += w[i] * dx * dx;
    sxy += w[i] * dx * (gt[i] - my);
  }
  if (!(sxx > 0.0)) return false;
  b1 = sxy / sxx;
  b0 = my - b1 * mx;
  return true;
}

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

double median_of(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  const std::size_t n = s.size();
  return n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
}

AffineFit degenerate_fit(std::span<const double> est, std::span<const double> gt, double p) {
  AffineFit fit;
  fit.n = est.size();
  fit.degenerate = true;
  if (est.empty()) return fit;
  fit.beta1 = 0.0;
  fit.beta0 = p == 2.0 ? std::accumulate(gt.begin(), gt.end(), 0.0) / static_cast<double>(gt.size()) : median_of(gt);
  fit.value = power_mean(est, gt, fit.beta0, 0.0, p);
  return fit;
}

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

void check_pair(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw EvalError("metric inputs have different lengths");
}

}  // namespace

AffineFit fit_affine_l2(std::span<const double> est, std::span<const double> gt) {
  check_pair(est, gt);
  if (est.size() < 2 || is_constant(est)) return degenerate_fit(est, gt, 2.0);
  std::vector<double> w(est.size(), 1.0);
  AffineFit fit;
  fit.n = est.size();
  weighted_line(est, gt, w, fit.beta0, fit.beta1);
  fit.value = power_mean(est, gt, fit.beta0, fit.beta1, 2.0);
  return fit;
}

AffineFit fit_affine_irls(std::span<const double> est, std::span<const double> gt, double p) {
  check_pair(est, gt);
  if (!(p >= 1.0 && p <= 2.0)) throw EvalError("IRLS exponent must be in [1, 2]");
  if (est.size() < 2 || is_constant(est)) return degenerate_fit(est, gt, p);
  AffineFit fit = fit_affine_l2(est, gt);
  if (p == 2.0) return fit;
  std::vector<double> w(est.size());
  for (int it = 0; it < kIrlsMaxIterations; ++it) {
    for (std::size_t i = 0; i < est.size(); ++i) {
      const double r = std::abs(gt[i] - (fit.beta0 + fit.beta1 * est[i]));
      w[i] = std::pow(std::max(r, kIrlsEps), p - 2.0);
    }
    double b0 = fit.beta0, b1 = fit.beta1;
    if (!weighted_line(est, gt, w, b0, b1)) break;
    const bool done = std::abs(b0 - fit.beta0) <= kIrlsTol * (1.0 + std::abs(b0)) &&
                      std::abs(b1 - fit.beta1) <= kIrlsTol * (1.0 + std::abs(b1));
    fit.beta0 = b0;
    fit.beta1 = b1;
    if (done) break;
  }
  fit.value = power_mean(est, gt, fit.beta0, fit.beta1, p);
  return fit;
}

SpearmanResult spearman_measure(std::span<const double> a, std::span<const double> b) {
  check_pair(a, b);
  SpearmanResult res;
  if (a.size() < 3 || is_constant(a) || is_constant(b)) {
    res.value = 1.0;
    res.degenerate = true;
    return res;
  }
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  res.rho = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
  res.value = 1.0 - std::abs(res.rho);
  return res;
}

Samples collect_samples(const DisparityMap& est, const GridD& gt, const Mask& gt_valid,
                        const std::optional<CropRect>& crop) {
  if (!est.values.same_shape(gt) || !gt.same_shape(gt_valid)) {
    throw EvalError("estimate and reference dimensions differ");
  }
  CropRect r{0, 0, est.width(), est.height()};
  if (crop) {
    r = *crop;
    if (r.width <= 0 || r.height <= 0 || r.x < 0 || r.y < 0 || r.x + r.width > est.width() ||
        r.y + r.height > est.height()) {
      throw EvalError("crop rectangle lies outside the image");
    }
  }
  Samples s;
  for (int y = r.y; y < r.y + r.height; ++y) {
    for (int x = r.x; x < r.x + r.width; ++x) {
      if (!est.is_valid(x, y) || !gt_valid(x, y)) continue;
      const double e = est.values(x, y);
      const double g = gt(x, y);
      if (!std::isfinite(e) || !std::isfinite(g)) continue;
      s.est.push_back(e);
      s.gt.push_back(g);
    }
  }
  return s;
}

AffineFit ai_metric(const DisparityMap& est, const GridD& gt, const Mask& gt_valid, int p) {
  if (p != 1 && p != 2) throw EvalError("AI(p) is defined for p = 1 or 2");
  const auto s = collect_samples(est, gt, gt_valid);
  return p == 2 ? fit_affine_l2(s.est, s.gt) : fit_affine_irls(s.est, s.gt, 1.0);
}

MetricReport evaluate(const DisparityMap& est, const GridD& gt, const Mask& gt_valid,
                      const std::optional<CropRect>& crop) {
  const auto s = collect_samples(est, gt, gt_valid, crop);
  const auto a1 = fit_affine_irls(s.est, s.gt, 1.0);
  const auto a2 = fit_affine_l2(s.est, s.gt);
  const auto sp = spearman_measure(s.est, s.gt);
  MetricReport rep;
  rep.ai1 = a1.value;
  rep.ai2 = a2.value;
  rep.spearman_one_minus_abs = sp.value;
  rep.beta0 = a1.beta0;
  rep.beta1 = a1.beta1;
  rep.n_pixels = s.est.size();
  rep.degenerate = a1.degenerate || a2.degenerate || sp.degenerate;
  return rep;
}

Reference inverse_depth_reference(const DepthMap& depth) {
  Reference r{GridD(depth.width(), depth.height(), kInvalidValue), Mask(depth.width(), depth.height(), 0)};
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    if (depth.valid[i] && depth.values[i] > 0.0 && std::isfinite(depth.values[i])) {
      r.values[i] = 1.0 / depth.values[i];
      r.valid[i] = 1;
    }
  }
  return r;
}

Reference disparity_reference(const DisparityMap& gt) { return Reference{gt.values, gt.valid}; }

double uncertainty_loss(const DisparityMap& est, const DisparityMap& gt, const GridD& sigma) {
  if (!est.values.same_shape(gt.values) || !est.values.same_shape(sigma)) {
    throw EvalError("uncertainty loss: input dimensions differ");
  }
  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (!est.valid[i] || !gt.valid[i]) continue;
    const double sg = sigma[i];
    if (!(sg > 0.0) || !std::isfinite(sg)) throw EvalError("uncertainty loss: sigma must be positive");
    const double s = 2.0 * std::log(sg);
    const double r = est.values[i] - gt.values[i];
    acc += std::sqrt(std::max(0.0, std::exp(-s) * r * r + 2.0 * s));
    ++n;
  }
  if (n == 0) throw EvalError("uncertainty loss: no pixel is valid in both maps");
  return acc / static_cast<double>(n);
}

GridD uncertainty_from_confidence(const ConfidenceMap& conf) {
  GridD s(conf.width(), conf.height());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::max(1.0 - conf.values[i], 1e-6);
  return s;
}

}  // namespace dpdisp
