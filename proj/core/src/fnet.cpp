#include "lzsc/fnet.hpp"

#include <algorithm>
#include <cmath>

#include "lzsc/error.hpp"
#include "lzsc/image_io.hpp"
#include "lzsc/weights_io.hpp"

namespace lzsc {

namespace {

ConvKernel random_kernel(KernelShape shape, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(shape.in_channels * shape.kernel_h * shape.kernel_w));
  std::uniform_real_distribution<double> dist(-bound, bound);
  ConvKernel k(shape);
  for (double& w : k.weights()) w = dist(rng);
  return k;
}

void check_synthesis(const ConvKernel& k, const NetworkScale& s, const char* name) {
  require(k.shape() == KernelShape{1, s.feature_channels, s.kernel_size, s.kernel_size},
          std::string("FNetParams: kernel ") + name + " does not map K=" + std::to_string(s.feature_channels) +
              " features to one channel with kernel " + std::to_string(s.kernel_size));
}

void check_block(const LzscBlockParams& b, const NetworkScale& s, std::size_t channels, const char* name) {
  require(b.input_channels == channels && b.feature_channels == s.feature_channels &&
              b.kernel_size == s.kernel_size && b.iterations() == s.iterations,
          std::string("network block ") + name + " disagrees with the network scale");
  b.validate();
}

}  // namespace

NetworkScale FNetParams::scale() const {
  return {block_u1.feature_channels, block_u1.kernel_size, block_u1.iterations()};
}

void FNetParams::validate() const {
  const NetworkScale s = scale();
  check_block(block_u1, s, 1, "block_u1");
  check_block(block_u2, s, 1, "block_u2");
  check_block(block_c, s, 2, "block_c");
  check_synthesis(d_u1, s, "D_u1");
  check_synthesis(d_u2, s, "D_u2");
  check_synthesis(g_c, s, "G_c");
  check_synthesis(g_u1, s, "G_u1");
  check_synthesis(g_u2, s, "G_u2");
}

FNetParams FNetParams::random(const NetworkScale& scale, std::mt19937_64& rng) {
  const auto [k, ks, n] = scale;
  FNetParams p;
  p.block_u1 = LzscBlockParams::random(1, k, ks, n, rng);
  p.block_u2 = LzscBlockParams::random(1, k, ks, n, rng);
  p.block_c = LzscBlockParams::random(2, k, ks, n, rng);
  const KernelShape synth{1, k, ks, ks};
  p.d_u1 = random_kernel(synth, rng);
  p.d_u2 = random_kernel(synth, rng);
  p.g_c = random_kernel(synth, rng);
  p.g_u1 = random_kernel(synth, rng);
  p.g_u2 = random_kernel(synth, rng);
  return p;
}

FusionTrace fnet_forward_traced(const Tensor& i1, const Tensor& i2, const FNetParams& p) {
  require(i1.channels() == 1 && i2.channels() == 1, "fnet_forward: inputs must be single-channel");
  require(i1.shape() == i2.shape(),
          "fnet_forward: input sizes differ (" + to_string(i1.shape()) + " vs " + to_string(i2.shape()) + ")");
  FusionTrace t;
  t.u1 = lzsc_forward(i1, p.block_u1);
  t.u2 = lzsc_forward(i2, p.block_u2);
  t.i_hat1 = i1 - conv2d_same(t.u1, p.d_u1);
  t.i_hat2 = i2 - conv2d_same(t.u2, p.d_u2);
  t.c = lzsc_forward(channel_concat(t.i_hat1, t.i_hat2), p.block_c);
  t.part_common = conv2d_same(t.c, p.g_c);
  t.part_u1 = conv2d_same(t.u1, p.g_u1);
  t.part_u2 = conv2d_same(t.u2, p.g_u2);
  t.fused = t.part_common + t.part_u1;
  t.fused += t.part_u2;
  return t;
}

Tensor fnet_forward(const Tensor& i1, const Tensor& i2, const FNetParams& p) {
  return std::move(fnet_forward_traced(i1, i2, p).fused);
}

FeatureSparsity feature_sparsity(const FusionTrace& t) {
  auto frac = [](const Tensor& x) {
    return x.empty() ? 0.0 : static_cast<double>(count_zeros(x)) / static_cast<double>(x.size());
  };
  return {frac(t.u1), frac(t.u2), frac(t.c)};
}

Tensor channel_max_projection(const Tensor& t) {
  Tensor out(t.height(), t.width(), 1);
  const std::size_t c = t.channels();
  for (std::size_t p = 0; p < out.size(); ++p) {
    double m = 0.0;
    for (std::size_t k = 0; k < c; ++k) m = std::max(m, std::abs(t[p * c + k]));
    out[p] = m;
  }
  return out;
}

std::vector<std::filesystem::path> dump_intermediates(const FusionTrace& trace, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());

  const std::pair<const char*, const Tensor*> items[] = {
      {"u1", &trace.u1},
      {"u2", &trace.u2},
      {"c", &trace.c},
      {"part_common", &trace.part_common},
      {"part_u1", &trace.part_u1},
      {"part_u2", &trace.part_u2},
      {"fused", &trace.fused},
  };
  std::vector<std::filesystem::path> written;
  for (const auto& [name, tensor] : items) {
    const Tensor view = tensor->channels() == 1 ? *tensor : channel_max_projection(*tensor);
    const auto png = dir / (std::string(name) + ".png");
    write_image(png, normalize_for_display(view));
    written.push_back(png);
    const auto raw = dir / (std::string(name) + ".lzt");
    save_tensor(*tensor, name, raw);
    written.push_back(raw);
  }
  return written;
}

}  // namespace lzsc
