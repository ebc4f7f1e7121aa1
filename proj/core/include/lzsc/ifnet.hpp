#pragma once

#include <random>

#include "lzsc/conv.hpp"
#include "lzsc/lzsc_block.hpp"
#include "lzsc/tensor.hpp"

namespace lzsc {

/// Inverse-fusion network: two independent single-channel blocks read the
/// fused image and D_x1, D_x2 synthesise the source estimates.
struct IFNetParams {
  LzscBlockParams block_x1;
  LzscBlockParams block_x2;
  ConvKernel d_x1;  // K -> 1
  ConvKernel d_x2;

  NetworkScale scale() const;
  void validate() const;

  static IFNetParams random(const NetworkScale& scale, std::mt19937_64& rng);

  friend bool operator==(const IFNetParams&, const IFNetParams&) = default;
};

struct InverseFusion {
  Tensor i1;  // I1'
  Tensor i2;  // I2'
  Tensor x1;
  Tensor x2;
};

InverseFusion ifnet_forward(const Tensor& fused, const IFNetParams& p);

}  // namespace lzsc
