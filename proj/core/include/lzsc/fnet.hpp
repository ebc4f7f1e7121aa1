#pragma once

#include <filesystem>
#include <random>

#include "lzsc/conv.hpp"
#include "lzsc/lzsc_block.hpp"
#include "lzsc/tensor.hpp"

namespace lzsc {

/// Fusion network. Two single-channel blocks extract the unique features
/// u1, u2; the residuals I_i - D_ui(u_i) are stacked and a two-channel block
/// extracts the common feature c; G_c, G_u1, G_u2 map features back to the
/// image and their sum is the fused image.
struct FNetParams {
  LzscBlockParams block_u1;
  LzscBlockParams block_u2;
  LzscBlockParams block_c;
  ConvKernel d_u1;  // K -> 1
  ConvKernel d_u2;
  ConvKernel g_c;
  ConvKernel g_u1;
  ConvKernel g_u2;

  NetworkScale scale() const;
  void validate() const;

  static FNetParams random(const NetworkScale& scale, std::mt19937_64& rng);

  friend bool operator==(const FNetParams&, const FNetParams&) = default;
};

struct FusionTrace {
  Tensor u1, u2, c;
  Tensor i_hat1, i_hat2;
  Tensor part_common, part_u1, part_u2;
  Tensor fused;
};

/// I_f = G_c(c) + G_u1(u1) + G_u2(u2). No clipping is applied.
Tensor fnet_forward(const Tensor& i1, const Tensor& i2, const FNetParams& p);
FusionTrace fnet_forward_traced(const Tensor& i1, const Tensor& i2, const FNetParams& p);

struct FeatureSparsity {
  double u1 = 0.0, u2 = 0.0, c = 0.0;  // fraction of exact zeros
};
FeatureSparsity feature_sparsity(const FusionTrace& t);

/// Writes u1, u2, c (max |.| over channels), the three reconstruction parts
/// and the fused image as normalised 8-bit PNGs, plus each of those seven
/// tensors unnormalised as a single-entry f32 archive (.lzt). Returns the
/// written paths.
std::vector<std::filesystem::path> dump_intermediates(const FusionTrace& trace, const std::filesystem::path& dir);

/// max over channels of |t|, as a single-channel map.
Tensor channel_max_projection(const Tensor& t);

}  // namespace lzsc
