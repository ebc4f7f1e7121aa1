#include "lzsc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "lzsc/conv.hpp"
#include "lzsc/error.hpp"
#include "lzsc/losses.hpp"

namespace lzsc {

namespace {

constexpr double kGammaG = 0.9994, kKappaG = -15.0, kSigmaG = 0.5;
constexpr double kGammaA = 0.9879, kKappaA = -22.0, kSigmaA = 0.8;

void check_single(const Tensor& a, const char* what) {
  require(a.channels() == 1, std::string(what) + ": images must be single-channel");
  require(!a.empty(), std::string(what) + ": empty image");
}

std::vector<int> quantize(const Tensor& a) {
  std::vector<int> q(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    q[i] = static_cast<int>(std::lround(std::clamp(a[i], 0.0, 1.0) * (kHistogramBins - 1)));
  return q;
}

double plogp_sum(const std::vector<double>& counts, double n) {
  double h = 0.0;
  for (double c : counts)
    if (c > 0.0) {
      const double p = c / n;
      h -= p * std::log2(p);
    }
  return h;
}

}  // namespace

double entropy(const Tensor& a) {
  check_single(a, "entropy");
  std::vector<double> hist(kHistogramBins, 0.0);
  for (int q : quantize(a)) hist[q] += 1.0;
  return plogp_sum(hist, static_cast<double>(a.size()));
}

double mutual_information(const Tensor& a, const Tensor& b) {
  check_single(a, "mutual_information");
  check_single(b, "mutual_information");
  require(a.shape() == b.shape(),
          "mutual_information: size mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
  const auto qa = quantize(a), qb = quantize(b);
  std::vector<double> joint(kHistogramBins * kHistogramBins, 0.0), ha(kHistogramBins, 0.0), hb(kHistogramBins, 0.0);
  for (std::size_t i = 0; i < qa.size(); ++i) {
    joint[qa[i] * kHistogramBins + qb[i]] += 1.0;
    ha[qa[i]] += 1.0;
    hb[qb[i]] += 1.0;
  }
  const double n = static_cast<double>(a.size());
  double mi = 0.0;
  for (int i = 0; i < kHistogramBins; ++i)
    for (int j = 0; j < kHistogramBins; ++j) {
      const double c = joint[i * kHistogramBins + j];
      if (c > 0.0) mi += c / n * std::log2(c * n / (ha[i] * hb[j]));
    }
  return std::max(0.0, mi);
}

double qabf(const Tensor& a, const Tensor& b, const Tensor& f) {
  check_single(a, "qabf");
  require(a.shape() == b.shape() && a.shape() == f.shape(), "qabf: size mismatch");
  const Tensor ax = channel_slice(sobel_components(a), 0), ay = channel_slice(sobel_components(a), 1);
  const Tensor bx = channel_slice(sobel_components(b), 0), by = channel_slice(sobel_components(b), 1);
  const Tensor fx = channel_slice(sobel_components(f), 0), fy = channel_slice(sobel_components(f), 1);

  // Preservation of one source edge at pixel i in the fused image.
  auto preservation = [&](const Tensor& sx, const Tensor& sy, std::size_t i, double gs, double gf) {
    double g_ratio;
    if (gs == gf)
      g_ratio = 1.0;
    else
      g_ratio = gs > gf ? gf / gs : gs / gf;
    // Angle between the (undirected) edge orientations, in [0, pi/2].
    double a_ratio = 1.0;
    if (gs > 0.0 && gf > 0.0) {
      const double c = std::min(1.0, std::abs(sx[i] * fx[i] + sy[i] * fy[i]) / (gs * gf));
      a_ratio = 1.0 - std::acos(c) / (std::numbers::pi / 2.0);
    }
    const double qg = kGammaG / (1.0 + std::exp(kKappaG * (g_ratio - kSigmaG)));
    const double qa = kGammaA / (1.0 + std::exp(kKappaA * (a_ratio - kSigmaA)));
    return qg * qa;
  };

  // Interior pixels only: the zero-padded Sobel response on the outer ring
  // reflects the padding, not image content.
  double num = 0.0, den = 0.0;
  const std::size_t H = a.height(), W = a.width();
  for (std::size_t y = 1; y + 1 < H; ++y)
    for (std::size_t x = 1; x + 1 < W; ++x) {
      const std::size_t i = y * W + x;
      const double ga = std::hypot(ax[i], ay[i]);
      const double gb = std::hypot(bx[i], by[i]);
      const double gf = std::hypot(fx[i], fy[i]);
      num += preservation(ax, ay, i, ga, gf) * ga + preservation(bx, by, i, gb, gf) * gb;
      den += ga + gb;
    }
  return den > 0.0 ? num / den : 0.0;
}

double ssim_metric(const Tensor& a, const Tensor& f) { return ssim(a, f); }

MetricReport fusion_metrics(const Tensor& i1, const Tensor& i2, const Tensor& fused) {
  MetricReport r;
  r.mi = mutual_information(i1, fused) + mutual_information(i2, fused);
  r.ssim = 0.5 * (ssim_metric(i1, fused) + ssim_metric(i2, fused));
  r.qabf = qabf(i1, i2, fused);
  return r;
}

}  // namespace lzsc
