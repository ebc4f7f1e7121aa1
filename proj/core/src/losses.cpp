#include "lzsc/losses.hpp"

#include <array>
#include <cmath>

#include "lzsc/conv.hpp"
#include "lzsc/error.hpp"

namespace lzsc {

namespace {

constexpr std::size_t kR = kSsimWindow / 2;

const std::array<double, kSsimWindow>& gaussian_taps() {
  static const std::array<double, kSsimWindow> taps = [] {
    std::array<double, kSsimWindow> g{};
    double s = 0.0;
    for (std::size_t i = 0; i < kSsimWindow; ++i) {
      const double d = static_cast<double>(i) - static_cast<double>(kR);
      g[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
      s += g[i];
    }
    for (double& v : g) v /= s;
    return g;
  }();
  return taps;
}

// Plain 2-D buffer for single-channel maps.
struct Map {
  std::size_t h = 0, w = 0;
  std::vector<double> v;
  Map(std::size_t h_, std::size_t w_) : h(h_), w(w_), v(h_ * w_, 0.0) {}
  double& operator()(std::size_t y, std::size_t x) { return v[y * w + x]; }
  double operator()(std::size_t y, std::size_t x) const { return v[y * w + x]; }
};

// Gaussian-weighted sums over every fully contained window of a*b.
Map valid_filter(const Tensor& a, const Tensor* b) {
  const auto& g = gaussian_taps();
  const std::size_t H = a.height(), W = a.width();
  const std::size_t oh = H - kSsimWindow + 1, ow = W - kSsimWindow + 1;
  Map tmp(H, ow);
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < ow; ++x) {
      double s = 0.0;
      for (std::size_t i = 0; i < kSsimWindow; ++i) {
        const std::size_t idx = y * W + x + i;
        s += g[i] * (b ? a[idx] * (*b)[idx] : a[idx]);
      }
      tmp(y, x) = s;
    }
  }
  Map out(oh, ow);
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t j = 0; j < kSsimWindow; ++j)
      for (std::size_t x = 0; x < ow; ++x) out(y, x) += g[j] * tmp(y + j, x);
  return out;
}

// Adjoint of valid_filter (without the product): scatters window weights back.
Tensor valid_filter_adjoint(const Map& m, std::size_t H, std::size_t W) {
  const auto& g = gaussian_taps();
  Map tmp(H, m.w);
  for (std::size_t y = 0; y < m.h; ++y)
    for (std::size_t j = 0; j < kSsimWindow; ++j)
      for (std::size_t x = 0; x < m.w; ++x) tmp(y + j, x) += g[j] * m(y, x);
  Tensor out(Shape{H, W, 1});
  for (std::size_t y = 0; y < H; ++y)
    for (std::size_t x = 0; x < m.w; ++x)
      for (std::size_t i = 0; i < kSsimWindow; ++i) out[y * W + x + i] += g[i] * tmp(y, x);
  return out;
}

void check_ssim_inputs(const Tensor& x, const Tensor& y) {
  require(x.shape() == y.shape(), "ssim: shape mismatch " + to_string(x.shape()) + " vs " + to_string(y.shape()));
  require(x.channels() == 1, "ssim: images must be single-channel");
  require(x.height() >= kSsimWindow && x.width() >= kSsimWindow, "ssim: images must be at least 11x11");
}

struct Moments {
  Map mx, my, mxx, myy, mxy;
};

Moments moments(const Tensor& x, const Tensor& y) {
  return {valid_filter(x, nullptr), valid_filter(y, nullptr), valid_filter(x, &x), valid_filter(y, &y),
          valid_filter(x, &y)};
}

}  // namespace

double ssim(const Tensor& x, const Tensor& y) {
  check_ssim_inputs(x, y);
  const Moments m = moments(x, y);
  double total = 0.0;
  for (std::size_t i = 0; i < m.mx.v.size(); ++i) {
    const double ux = m.mx.v[i], uy = m.my.v[i];
    const double vx = m.mxx.v[i] - ux * ux, vy = m.myy.v[i] - uy * uy, cxy = m.mxy.v[i] - ux * uy;
    total += (2 * ux * uy + kSsimC1) * (2 * cxy + kSsimC2) / ((ux * ux + uy * uy + kSsimC1) * (vx + vy + kSsimC2));
  }
  return total / static_cast<double>(m.mx.v.size());
}

SsimGrad ssim_grad(const Tensor& x, const Tensor& y, double upstream) {
  check_ssim_inputs(x, y);
  const Moments m = moments(x, y);
  const std::size_t n = m.mx.v.size();
  const double scale = upstream / static_cast<double>(n);
  // Per-window partials with respect to the raw moments mu, E[x^2], E[xy].
  Map d_mx(m.mx.h, m.mx.w), d_my(m.mx.h, m.mx.w), d_mxx(m.mx.h, m.mx.w), d_myy(m.mx.h, m.mx.w),
      d_mxy(m.mx.h, m.mx.w);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ux = m.mx.v[i], uy = m.my.v[i];
    const double vx = m.mxx.v[i] - ux * ux, vy = m.myy.v[i] - uy * uy, cxy = m.mxy.v[i] - ux * uy;
    const double P = 2 * ux * uy + kSsimC1, Q = 2 * cxy + kSsimC2;
    const double R = ux * ux + uy * uy + kSsimC1, T = vx + vy + kSsimC2;
    const double S = P * Q / (R * T);
    total += S;
    d_mxx.v[i] = -S / T * scale;
    d_myy.v[i] = -S / T * scale;
    d_mxy.v[i] = 2 * P / (R * T) * scale;
    d_mx.v[i] = (2 * uy * (Q - P) / (R * T) - 2 * ux * S / R + 2 * ux * S / T) * scale;
    d_my.v[i] = (2 * ux * (Q - P) / (R * T) - 2 * uy * S / R + 2 * uy * S / T) * scale;
  }
  const std::size_t H = x.height(), W = x.width();
  const Tensor a_mx = valid_filter_adjoint(d_mx, H, W);
  const Tensor a_my = valid_filter_adjoint(d_my, H, W);
  const Tensor a_mxx = valid_filter_adjoint(d_mxx, H, W);
  const Tensor a_myy = valid_filter_adjoint(d_myy, H, W);
  const Tensor a_mxy = valid_filter_adjoint(d_mxy, H, W);
  SsimGrad r;
  r.value = total / static_cast<double>(n);
  r.d_x = Tensor(x.shape());
  r.d_y = Tensor(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    r.d_x[i] = a_mx[i] + 2 * x[i] * a_mxx[i] + y[i] * a_mxy[i];
    r.d_y[i] = a_my[i] + 2 * y[i] * a_myy[i] + x[i] * a_mxy[i];
  }
  return r;
}

TapedStage1 tape_loss_stage1(GradientTape& tape, GradientTape::Var i1p, GradientTape::Var i1, GradientTape::Var i2p,
                             GradientTape::Var i2) {
  TapedStage1 r;
  r.intensity1 = tape.mean_abs_diff(i1p, i1);
  r.gradient1 = tape.mean_abs_diff(tape.sobel(i1p), tape.sobel(i1));
  r.intensity2 = tape.mean_abs_diff(i2p, i2);
  r.gradient2 = tape.mean_abs_diff(tape.sobel(i2p), tape.sobel(i2));
  r.total = tape.linear_combination({{1.0, r.intensity1}, {1.0, r.gradient1}, {1.0, r.intensity2}, {1.0, r.gradient2}});
  return r;
}

Stage1Loss loss_stage1(const Tensor& i1p, const Tensor& i1, const Tensor& i2p, const Tensor& i2) {
  require(i1p.shape() == i1.shape() && i2p.shape() == i2.shape(), "loss_stage1: shape mismatch");
  GradientTape t;
  const TapedStage1 v = tape_loss_stage1(t, t.constant(i1p), t.constant(i1), t.constant(i2p), t.constant(i2));
  return {t.scalar(v.total), t.scalar(v.intensity1), t.scalar(v.gradient1), t.scalar(v.intensity2),
          t.scalar(v.gradient2)};
}

std::pair<double, double> ssim_weights(const Tensor& i1, const Tensor& i2) {
  const double g1 = mean(sobel_gradient(i1));
  const double g2 = mean(sobel_gradient(i2));
  if (g1 + g2 <= 0.0) return {0.5, 0.5};
  return {g1 / (g1 + g2), g2 / (g1 + g2)};
}

namespace {

struct Stage2Graph {
  TapedStage2 vars;
  double w1, w2;
};

Stage2Graph build_stage2(GradientTape& tape, GradientTape::Var fused, const Tensor& i1, const Tensor& i2,
                         const LossWeights& beta) {
  require(i1.shape() == i2.shape() && tape.value(fused).shape() == i1.shape(), "loss_stage2: shape mismatch");
  require(i1.channels() == 1, "loss_stage2: images must be single-channel");
  const auto [w1, w2] = ssim_weights(i1, i2);
  const auto target = tape.constant(elementwise_max(i1, i2));
  const auto grad_target = tape.constant(elementwise_max(sobel_gradient(i1), sobel_gradient(i2)));
  TapedStage2 r;
  r.intensity = tape.mean_abs_diff(fused, target);
  r.gradient = tape.mean_abs_diff(tape.sobel(fused), grad_target);
  const auto s1 = tape.ssim(tape.constant(i1), fused);
  const auto s2 = tape.ssim(tape.constant(i2), fused);
  const auto one = tape.constant(Tensor(Shape{1, 1, 1}, 1.0));
  r.ssim = tape.linear_combination({{w1 + w2, one}, {-w1, s1}, {-w2, s2}});
  r.total = tape.linear_combination({{beta.intensity, r.intensity}, {beta.gradient, r.gradient}, {beta.ssim, r.ssim}});
  return {r, w1, w2};
}

}  // namespace

TapedStage2 tape_loss_stage2(GradientTape& tape, GradientTape::Var fused, const Tensor& i1, const Tensor& i2,
                             const LossWeights& beta) {
  return build_stage2(tape, fused, i1, i2, beta).vars;
}

Stage2Loss loss_stage2(const Tensor& fused, const Tensor& i1, const Tensor& i2, const LossWeights& beta) {
  GradientTape t;
  const Stage2Graph g = build_stage2(t, t.constant(fused), i1, i2, beta);
  return {t.scalar(g.vars.total), t.scalar(g.vars.intensity), t.scalar(g.vars.gradient), t.scalar(g.vars.ssim), g.w1,
          g.w2};
}

}  // namespace lzsc
