#include "lzsc/thresholding.hpp"

#include <cmath>

#include "lzsc/error.hpp"

namespace lzsc {

void SigmoidalParams::validate() const {
  require(alpha >= 0.0 && alpha <= 1.0, "sigmoidal threshold: alpha must lie in [0,1]");
  require(gamma > 0.0, "sigmoidal threshold: gamma must be positive");
  require(theta > 0.0, "sigmoidal threshold: theta must be positive");
}

double hard_threshold(double x, double theta) {
  require(theta >= 0.0, "hard_threshold: theta must be non-negative");
  return std::abs(x) <= theta ? 0.0 : x;
}

double soft_threshold(double x, double theta) {
  require(theta >= 0.0, "soft_threshold: theta must be non-negative");
  const double m = std::abs(x) - theta;
  if (m <= 0.0) return 0.0;
  return x > 0.0 ? m : -m;
}

double sigmoidal_threshold(double x, const SigmoidalParams& p) {
  p.validate();
  if (x == 0.0) return 0.0;
  const double a = std::abs(x);
  const double z = p.gamma * (a - p.theta);
  if (z < kSigmoidClamp) return 0.0;
  const double v = (a - p.alpha * p.theta) / (1.0 + std::exp(-z));
  return x > 0.0 ? v : -v;
}

SigmoidalDerivative sigmoidal_threshold_derivative(double x, const SigmoidalParams& p) {
  if (x == 0.0) return {};
  const double a = std::abs(x);
  const double z = p.gamma * (a - p.theta);
  if (z < kSigmoidClamp) return {};
  const double s = 1.0 / (1.0 + std::exp(-z));
  const double num = a - p.alpha * p.theta;
  const double ds = p.gamma * s * (1.0 - s);
  const double sign = x > 0.0 ? 1.0 : -1.0;
  // d|x|/dx = sign, and the outer sign factor squares away.
  return {s + num * ds, sign * (-p.alpha * s - num * ds)};
}

Tensor hard_threshold(const Tensor& x, double theta) {
  require(theta >= 0.0, "hard_threshold: theta must be non-negative");
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = hard_threshold(x[i], theta);
  return out;
}

Tensor soft_threshold(const Tensor& x, double theta) {
  require(theta >= 0.0, "soft_threshold: theta must be non-negative");
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = soft_threshold(x[i], theta);
  return out;
}

Tensor sigmoidal_threshold(const Tensor& x, const SigmoidalParams& p) {
  p.validate();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = sigmoidal_threshold(x[i], p);
  return out;
}

SigmoidalGrad sigmoidal_threshold_grad(const Tensor& x, const SigmoidalParams& p) {
  p.validate();
  SigmoidalGrad g{Tensor(x.shape()), Tensor(x.shape())};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto d = sigmoidal_threshold_derivative(x[i], p);
    g.d_x[i] = d.d_x;
    g.d_theta[i] = d.d_theta;
  }
  return g;
}

}  // namespace lzsc
