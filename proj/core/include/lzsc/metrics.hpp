#pragma once

#include "lzsc/tensor.hpp"

namespace lzsc {

inline constexpr int kHistogramBins = 256;

/// Shannon entropy (bits) of the 256-level quantisation round(255 x) of a
/// single-channel image, values clamped to [0, 1].
double entropy(const Tensor& a);

/// Plug-in mutual information (bits) of the joint 256x256 histogram of the
/// quantised images; clamped at 0.
double mutual_information(const Tensor& a, const Tensor& b);

/// Xydeas-Petrovic edge-preservation score of fused image f with respect to
/// sources a and b, weighted by Sobel edge strength. Returns 0 when neither
/// source has any edge. The one-pixel border, where the zero-padded Sobel
/// response is dominated by the padding, is excluded.
double qabf(const Tensor& a, const Tensor& b, const Tensor& f);

/// SSIM between a source and the fused image (same computation as the
/// training loss).
double ssim_metric(const Tensor& a, const Tensor& f);

struct MetricReport {
  double mi = 0.0;    // MI(I1, F) + MI(I2, F)
  double ssim = 0.0;  // (ssim(I1, F) + ssim(I2, F)) / 2
  double qabf = 0.0;
};

MetricReport fusion_metrics(const Tensor& i1, const Tensor& i2, const Tensor& fused);

}  // namespace lzsc
