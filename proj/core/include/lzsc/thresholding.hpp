#pragma once

#include "lzsc/tensor.hpp"

namespace lzsc {

/// Shape parameters of the sigmoidal threshold
///   T(x) = sgn(x) (|x| - alpha*theta) / (1 + exp(-gamma (|x| - theta))).
/// alpha = 1 approaches soft thresholding and alpha = 0 hard thresholding as
/// gamma grows.
struct SigmoidalParams {
  double alpha = 0.1;
  double gamma = 100.0;
  double theta = 1.0;

  void validate() const;
};

/// Exponent below which the sigmoidal threshold is clamped to exactly zero.
inline constexpr double kSigmoidClamp = -30.0;

/// The fixed transition shape used inside every iteration module.
inline constexpr double kLzscAlpha = 0.1;
inline constexpr double kLzscGamma = 100.0;

double hard_threshold(double x, double theta);
double soft_threshold(double x, double theta);
double sigmoidal_threshold(double x, const SigmoidalParams& p);

struct SigmoidalDerivative {
  double d_x = 0.0;
  double d_theta = 0.0;
};
SigmoidalDerivative sigmoidal_threshold_derivative(double x, const SigmoidalParams& p);

Tensor hard_threshold(const Tensor& x, double theta);
Tensor soft_threshold(const Tensor& x, double theta);
Tensor sigmoidal_threshold(const Tensor& x, const SigmoidalParams& p);

struct SigmoidalGrad {
  Tensor d_x;
  Tensor d_theta;
};
/// Elementwise partial derivatives of sigmoidal_threshold with respect to its
/// input and to theta. Both are zero inside the clamp region.
SigmoidalGrad sigmoidal_threshold_grad(const Tensor& x, const SigmoidalParams& p);

}  // namespace lzsc
