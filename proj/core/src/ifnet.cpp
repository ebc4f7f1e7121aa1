#include "lzsc/ifnet.hpp"

#include <cmath>

#include "lzsc/error.hpp"

namespace lzsc {

NetworkScale IFNetParams::scale() const {
  return {block_x1.feature_channels, block_x1.kernel_size, block_x1.iterations()};
}

void IFNetParams::validate() const {
  const NetworkScale s = scale();
  for (const auto* b : {&block_x1, &block_x2}) {
    require(b->input_channels == 1 && b->feature_channels == s.feature_channels && b->kernel_size == s.kernel_size &&
                b->iterations() == s.iterations,
            "IFNetParams: blocks disagree on the network scale");
    b->validate();
  }
  const KernelShape synth{1, s.feature_channels, s.kernel_size, s.kernel_size};
  require(d_x1.shape() == synth, "IFNetParams: kernel D_x1 has the wrong shape");
  require(d_x2.shape() == synth, "IFNetParams: kernel D_x2 has the wrong shape");
}

IFNetParams IFNetParams::random(const NetworkScale& scale, std::mt19937_64& rng) {
  const auto [k, ks, n] = scale;
  IFNetParams p;
  p.block_x1 = LzscBlockParams::random(1, k, ks, n, rng);
  p.block_x2 = LzscBlockParams::random(1, k, ks, n, rng);
  const KernelShape synth{1, k, ks, ks};
  const double bound = 1.0 / std::sqrt(static_cast<double>(k * ks * ks));
  std::uniform_real_distribution<double> dist(-bound, bound);
  p.d_x1 = ConvKernel(synth);
  p.d_x2 = ConvKernel(synth);
  for (double& w : p.d_x1.weights()) w = dist(rng);
  for (double& w : p.d_x2.weights()) w = dist(rng);
  return p;
}

InverseFusion ifnet_forward(const Tensor& fused, const IFNetParams& p) {
  require(fused.channels() == 1, "ifnet_forward: fused image must be single-channel, got " + to_string(fused.shape()));
  InverseFusion r;
  r.x1 = lzsc_forward(fused, p.block_x1);
  r.x2 = lzsc_forward(fused, p.block_x2);
  r.i1 = conv2d_same(r.x1, p.d_x1);
  r.i2 = conv2d_same(r.x2, p.d_x2);
  return r;
}

}  // namespace lzsc
