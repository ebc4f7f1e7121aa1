#pragma once

#include "lzsc/tape.hpp"
#include "lzsc/tensor.hpp"

namespace lzsc {

inline constexpr std::size_t kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

/// Mean SSIM over all fully contained 11x11 Gaussian windows (sigma 1.5),
/// C1 = 0.01^2, C2 = 0.03^2 for unit dynamic range.
double ssim(const Tensor& x, const Tensor& y);

struct SsimGrad {
  double value = 0.0;
  Tensor d_x;
  Tensor d_y;
};
/// SSIM and its gradient with respect to both images, scaled by `upstream`.
SsimGrad ssim_grad(const Tensor& x, const Tensor& y, double upstream = 1.0);

struct Stage1Loss {
  double total = 0.0;
  double intensity1 = 0.0, gradient1 = 0.0;  // mean |I1'-I1|, mean |grad I1' - grad I1|
  double intensity2 = 0.0, gradient2 = 0.0;
};

/// Sum over both modalities of mean|I'-I| + mean|sobel(I') - sobel(I)|.
Stage1Loss loss_stage1(const Tensor& i1p, const Tensor& i1, const Tensor& i2p, const Tensor& i2);

struct LossWeights {
  double intensity = 20.0;
  double gradient = 20.0;
  double ssim = 15.0;
};

struct Stage2Loss {
  double total = 0.0;
  double intensity = 0.0;  // mean |I_f - max(I1, I2)|
  double gradient = 0.0;   // mean |sobel(I_f) - max(sobel(I1), sobel(I2))|
  double ssim = 0.0;       // w1 (1 - ssim(I1, I_f)) + w2 (1 - ssim(I2, I_f))
  double w1 = 0.5, w2 = 0.5;
};

/// Scalar SSIM weights from mean Sobel magnitudes; 0.5 each when both are 0.
std::pair<double, double> ssim_weights(const Tensor& i1, const Tensor& i2);

Stage2Loss loss_stage2(const Tensor& fused, const Tensor& i1, const Tensor& i2, const LossWeights& beta);

struct TapedStage1 {
  GradientTape::Var total;
  GradientTape::Var intensity1, gradient1, intensity2, gradient2;
};
TapedStage1 tape_loss_stage1(GradientTape& tape, GradientTape::Var i1p, GradientTape::Var i1,
                             GradientTape::Var i2p, GradientTape::Var i2);

struct TapedStage2 {
  GradientTape::Var total;
  GradientTape::Var intensity, gradient, ssim;
};
/// i1 and i2 are treated as fixed data.
TapedStage2 tape_loss_stage2(GradientTape& tape, GradientTape::Var fused, const Tensor& i1, const Tensor& i2,
                             const LossWeights& beta);

}  // namespace lzsc
