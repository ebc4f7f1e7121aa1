#include "lzsc/conv.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>

#include "lzsc/error.hpp"

namespace lzsc {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using StridedRows = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;

std::string kernel_str(const KernelShape& s) {
  return std::to_string(s.out_channels) + "x" + std::to_string(s.in_channels) + "x" +
         std::to_string(s.kernel_h) + "x" + std::to_string(s.kernel_w);
}

// Weights as a (kh*kw*C) x O matrix, row index (ky*kw + kx)*C + c.
RowMatrix weight_matrix(const ConvKernel& k) {
  const auto& s = k.shape();
  RowMatrix m(s.kernel_h * s.kernel_w * s.in_channels, s.out_channels);
  for (std::size_t o = 0; o < s.out_channels; ++o)
    for (std::size_t c = 0; c < s.in_channels; ++c)
      for (std::size_t ky = 0; ky < s.kernel_h; ++ky)
        for (std::size_t kx = 0; kx < s.kernel_w; ++kx)
          m((ky * s.kernel_w + kx) * s.in_channels + c, o) = k.at(o, c, ky, kx);
  return m;
}

// The input zero-padded by kh/2 rows and kw/2 columns. Output pixel (y, x)
// is computed at padded-grid position p = y*Wp + x; for kernel row ky its
// kw*C inputs are the contiguous values starting at (p + ky*Wp)*C. Rows of
// the padded grid with x >= W are scratch and are discarded.
struct PaddedGrid {
  std::size_t H, W, C, Wp, run, rows;
  std::vector<double> data;

  PaddedGrid(const Tensor& in, const KernelShape& s)
      : H(in.height()), W(in.width()), C(in.channels()), Wp(in.width() + s.kernel_w - 1),
        run(s.kernel_w * in.channels()), rows((in.height() - 1) * Wp + in.width()),
        data((in.height() + s.kernel_h - 1) * Wp * in.channels(), 0.0) {
    const std::size_t ph = s.kernel_h / 2, pw = s.kernel_w / 2;
    for (std::size_t y = 0; y < H; ++y)
      std::memcpy(data.data() + ((y + ph) * Wp + pw) * C, in.data() + y * W * C, W * C * sizeof(double));
  }

  // Patch values of kernel row ky for every grid position, as a rows x run
  // matrix whose rows overlap.
  StridedRows patches(std::size_t ky) const {
    return StridedRows(data.data() + ky * Wp * C, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(run),
                       Eigen::OuterStride<>(static_cast<Eigen::Index>(C)));
  }
};

}  // namespace

ConvKernel::ConvKernel(KernelShape shape) : ConvKernel(shape, std::vector<double>(shape.size(), 0.0)) {}

ConvKernel::ConvKernel(KernelShape shape, std::vector<double> weights) : shape_(shape), weights_(std::move(weights)) {
  require(shape_.kernel_h % 2 == 1 && shape_.kernel_w % 2 == 1,
          "ConvKernel: spatial extent must be odd, got " + kernel_str(shape_));
  require(weights_.size() == shape_.size(), "ConvKernel: weight count " + std::to_string(weights_.size()) +
                                                " does not match shape " + kernel_str(shape_));
}

Tensor conv2d_same(const Tensor& input, const ConvKernel& kernel) {
  const auto& s = kernel.shape();
  require(input.channels() == s.in_channels, "conv2d_same: input has " + std::to_string(input.channels()) +
                                                 " channels, kernel expects " + std::to_string(s.in_channels));
  const std::size_t H = input.height(), W = input.width(), O = s.out_channels;
  Tensor out(H, W, O);
  if (input.empty() || O == 0) return out;
  const RowMatrix wm = weight_matrix(kernel);
  const PaddedGrid grid(input, s);
  RowMatrix acc(static_cast<Eigen::Index>(grid.rows), static_cast<Eigen::Index>(O));
  for (std::size_t ky = 0; ky < s.kernel_h; ++ky) {
    const auto w = wm.middleRows(static_cast<Eigen::Index>(ky * grid.run), static_cast<Eigen::Index>(grid.run));
    if (ky == 0)
      acc.noalias() = grid.patches(ky) * w;
    else
      acc.noalias() += grid.patches(ky) * w;
  }
  for (std::size_t y = 0; y < H; ++y)
    std::memcpy(out.data() + y * W * O, acc.data() + y * grid.Wp * O, W * O * sizeof(double));
  return out;
}

Tensor conv2d_grad_input(const Tensor& output_grad, const ConvKernel& kernel) {
  const auto& s = kernel.shape();
  require(output_grad.channels() == s.out_channels,
          "conv2d_grad_input: gradient has " + std::to_string(output_grad.channels()) + " channels, kernel produces " +
              std::to_string(s.out_channels));
  return conv2d_same(output_grad, adjoint_kernel(kernel));
}

void conv2d_accumulate_grad_weights(const Tensor& input, const Tensor& output_grad, ConvKernel& grad) {
  const auto& s = grad.shape();
  require(input.channels() == s.in_channels && output_grad.channels() == s.out_channels &&
              input.shape().same_spatial(output_grad.shape()),
          "conv2d_grad_weights: input " + to_string(input.shape()) + " / output gradient " +
              to_string(output_grad.shape()) + " inconsistent with kernel " + kernel_str(s));
  const std::size_t H = input.height(), W = input.width(), O = s.out_channels;
  if (input.empty()) return;
  const PaddedGrid grid(input, s);
  // Output gradient on the padded grid; scratch positions stay zero.
  RowMatrix g = RowMatrix::Zero(static_cast<Eigen::Index>(grid.rows), static_cast<Eigen::Index>(O));
  for (std::size_t y = 0; y < H; ++y)
    std::memcpy(g.data() + y * grid.Wp * O, output_grad.data() + y * W * O, W * O * sizeof(double));
  RowMatrix wg(static_cast<Eigen::Index>(s.kernel_h * grid.run), static_cast<Eigen::Index>(O));
  for (std::size_t ky = 0; ky < s.kernel_h; ++ky)
    wg.middleRows(static_cast<Eigen::Index>(ky * grid.run), static_cast<Eigen::Index>(grid.run)).noalias() =
        grid.patches(ky).transpose() * g;
  for (std::size_t o = 0; o < O; ++o)
    for (std::size_t c = 0; c < s.in_channels; ++c)
      for (std::size_t ky = 0; ky < s.kernel_h; ++ky)
        for (std::size_t kx = 0; kx < s.kernel_w; ++kx)
          grad.at(o, c, ky, kx) += wg((ky * s.kernel_w + kx) * s.in_channels + c, o);
}

ConvKernel conv2d_grad_weights(const Tensor& input, const Tensor& output_grad, const KernelShape& shape) {
  ConvKernel grad(shape);
  conv2d_accumulate_grad_weights(input, output_grad, grad);
  return grad;
}

ConvKernel adjoint_kernel(const ConvKernel& kernel) {
  const auto& s = kernel.shape();
  ConvKernel adj(KernelShape{s.in_channels, s.out_channels, s.kernel_h, s.kernel_w});
  for (std::size_t o = 0; o < s.out_channels; ++o)
    for (std::size_t c = 0; c < s.in_channels; ++c)
      for (std::size_t ky = 0; ky < s.kernel_h; ++ky)
        for (std::size_t kx = 0; kx < s.kernel_w; ++kx)
          adj.at(c, o, s.kernel_h - 1 - ky, s.kernel_w - 1 - kx) = kernel.at(o, c, ky, kx);
  return adj;
}

double operator_norm_squared(const ConvKernel& kernel, const Shape& input_shape, int iterations) {
  require(input_shape.channels == kernel.in_channels(), "operator_norm_squared: channel mismatch");
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  Tensor x(input_shape);
  for (double& v : x.values()) v = normal(rng);
  x *= 1.0 / l2_norm(x);
  double lambda = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Tensor y = conv2d_grad_input(conv2d_same(x, kernel), kernel);
    lambda = dot(x, y);
    const double n = l2_norm(y);
    if (n == 0.0) return 0.0;
    x = (1.0 / n) * std::move(y);
  }
  return lambda;
}

const ConvKernel& sobel_kernel() {
  static const ConvKernel k(KernelShape{2, 1, 3, 3}, {
                                                         -1, 0, 1, -2, 0, 2, -1, 0, 1,   // d/dx
                                                         -1, -2, -1, 0, 0, 0, 1, 2, 1,   // d/dy
                                                     });
  return k;
}

Tensor sobel_components(const Tensor& image) {
  require(image.channels() == 1, "sobel: expected a single-channel image, got " + to_string(image.shape()));
  return conv2d_same(image, sobel_kernel());
}

Tensor sobel_gradient(const Tensor& image) {
  const Tensor g = sobel_components(image);
  Tensor mag(image.height(), image.width(), 1);
  for (std::size_t p = 0; p < mag.size(); ++p) mag[p] = std::abs(g[2 * p]) + std::abs(g[2 * p + 1]);
  return mag;
}

Tensor sobel_gradient_backward(const Tensor& image, const Tensor& magnitude_grad) {
  require(magnitude_grad.shape() == image.shape(), "sobel_gradient_backward: shape mismatch");
  Tensor g = sobel_components(image);
  auto sgn = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
  for (std::size_t p = 0; p < magnitude_grad.size(); ++p) {
    g[2 * p] = sgn(g[2 * p]) * magnitude_grad[p];
    g[2 * p + 1] = sgn(g[2 * p + 1]) * magnitude_grad[p];
  }
  return conv2d_grad_input(g, sobel_kernel());
}

}  // namespace lzsc
