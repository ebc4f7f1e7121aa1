#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lzsc/tensor.hpp"

namespace lzsc {

struct KernelShape {
  std::size_t out_channels = 0;
  std::size_t in_channels = 0;
  std::size_t kernel_h = 0;
  std::size_t kernel_w = 0;

  std::size_t size() const { return out_channels * in_channels * kernel_h * kernel_w; }
  friend bool operator==(const KernelShape&, const KernelShape&) = default;
};

/// Convolution weights laid out [out][in][kh][kw]. Both spatial extents must
/// be odd so that same-size zero padding is symmetric.
class ConvKernel {
 public:
  ConvKernel() = default;
  explicit ConvKernel(KernelShape shape);
  ConvKernel(KernelShape shape, std::vector<double> weights);

  const KernelShape& shape() const { return shape_; }
  std::size_t out_channels() const { return shape_.out_channels; }
  std::size_t in_channels() const { return shape_.in_channels; }
  std::size_t kernel_h() const { return shape_.kernel_h; }
  std::size_t kernel_w() const { return shape_.kernel_w; }
  std::size_t size() const { return weights_.size(); }

  double& at(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) {
    return weights_[((o * shape_.in_channels + i) * shape_.kernel_h + ky) * shape_.kernel_w + kx];
  }
  double at(std::size_t o, std::size_t i, std::size_t ky, std::size_t kx) const {
    return weights_[((o * shape_.in_channels + i) * shape_.kernel_h + ky) * shape_.kernel_w + kx];
  }

  std::span<double> weights() { return weights_; }
  std::span<const double> weights() const { return weights_; }

  friend bool operator==(const ConvKernel&, const ConvKernel&) = default;

 private:
  KernelShape shape_;
  std::vector<double> weights_;
};

/// Stride-1 correlation with zero padding of (kh-1)/2, (kw-1)/2; output keeps
/// the input's height and width and has kernel.out_channels channels.
Tensor conv2d_same(const Tensor& input, const ConvKernel& kernel);

/// Gradient of a loss with respect to conv2d_same's input, given the gradient
/// with respect to its output. This is the exact adjoint of conv2d_same.
Tensor conv2d_grad_input(const Tensor& output_grad, const ConvKernel& kernel);

/// Gradient with respect to the kernel weights, summed over all positions.
ConvKernel conv2d_grad_weights(const Tensor& input, const Tensor& output_grad, const KernelShape& shape);

/// Accumulating variant used by the gradient tape.
void conv2d_accumulate_grad_weights(const Tensor& input, const Tensor& output_grad, ConvKernel& grad);

/// Kernel whose forward convolution equals conv2d_grad_input of `kernel`:
/// spatially flipped with in/out channels swapped.
ConvKernel adjoint_kernel(const ConvKernel& kernel);

/// Largest eigenvalue of A^T A for the convolution operator A on inputs of
/// `input_shape`, estimated by power iteration.
double operator_norm_squared(const ConvKernel& kernel, const Shape& input_shape, int iterations = 100);

/// The horizontal and vertical 3x3 Sobel responses as a 2-channel tensor
/// (channel 0 = d/dx, channel 1 = d/dy), zero padded.
Tensor sobel_components(const Tensor& image);

/// Edge magnitude |d/dx| + |d/dy| of a single-channel image.
Tensor sobel_gradient(const Tensor& image);

/// Back-propagates a gradient on sobel_gradient's output to the image, using
/// sign(0) = 0 as the subgradient at kinks.
Tensor sobel_gradient_backward(const Tensor& image, const Tensor& magnitude_grad);

const ConvKernel& sobel_kernel();

}  // namespace lzsc
