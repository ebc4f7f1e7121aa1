#include "lzsc/lzsc_block.hpp"

#include <algorithm>
#include <cmath>

#include "lzsc/error.hpp"
#include "lzsc/internal.hpp"
#include "lzsc/thresholding.hpp"

namespace lzsc {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus_inverse(double y) {
  require(y > 0.0, "softplus_inverse: argument must be positive");
  // log(exp(y) - 1) = y + log(1 - exp(-y))
  return y + std::log(-std::expm1(-y));
}

ScheduleParams ScheduleParams::from_targets(double theta0, double theta1, double rho1) {
  require(theta0 > theta1 && theta1 > 0.0, "ScheduleParams: need theta0 > theta1 > 0");
  require(rho1 > 0.0 && rho1 < 1.0, "ScheduleParams: need 0 < rho1 < 1");
  ScheduleParams s;
  s.b_theta = softplus_inverse(theta0);
  s.w_theta_raw = softplus_inverse(s.b_theta - softplus_inverse(theta1));
  s.b_rho = 0.0;
  s.w_rho_raw = softplus_inverse(softplus_inverse(softplus(0.0) / (1.0 - rho1)));
  return s;
}

double theta_k(const ScheduleParams& s, std::size_t k) {
  return softplus(s.w_theta() * static_cast<double>(k) + s.b_theta);
}

double rho_k(const ScheduleParams& s, std::size_t k) {
  const double top = softplus(s.w_rho() * static_cast<double>(k) + s.b_rho);
  return (top - softplus(s.b_rho)) / top;
}

ScheduleGrad schedule_partials(const ScheduleParams& s, std::size_t k) {
  const double kd = static_cast<double>(k);
  ScheduleGrad g;
  const double zt = s.w_theta() * kd + s.b_theta;
  const double st = logistic(zt);
  g.b_theta = st;
  g.w_theta_raw = st * kd * -logistic(s.w_theta_raw);

  // rho = 1 - sp(b) / sp(z), z = w k + b
  const double zr = s.w_rho() * kd + s.b_rho;
  const double spz = softplus(zr), spb = softplus(s.b_rho);
  const double d_z = spb * logistic(zr) / (spz * spz);
  g.b_rho = d_z - logistic(s.b_rho) / spz;
  g.w_rho_raw = d_z * kd * logistic(s.w_rho_raw);
  return g;
}

void validate_schedule(const ScheduleParams& s, std::size_t iterations) {
  const double values[] = {s.w_theta_raw, s.b_theta, s.w_rho_raw, s.b_rho};
  for (double v : values) require(std::isfinite(v), "schedule: non-finite raw parameter");
  require(s.w_theta() < 0.0, "schedule: realised w_theta must be negative");
  require(s.w_rho() > 0.0, "schedule: realised w_rho must be positive");
  require(rho_k(s, 0) == 0.0, "schedule: rho^0 must be exactly 0");
  double prev_theta = 0.0, prev_rho = 0.0;
  for (std::size_t k = 0; k < iterations; ++k) {
    const double t = theta_k(s, k), r = rho_k(s, k);
    require(t > 0.0, "schedule: theta^" + std::to_string(k) + " is not positive");
    require(r >= 0.0 && r < 1.0, "schedule: rho^" + std::to_string(k) + " outside [0,1)");
    if (k > 0) {
      require(t < prev_theta, "schedule: theta is not strictly decreasing at k=" + std::to_string(k));
      require(r >= prev_rho, "schedule: rho decreases at k=" + std::to_string(k));
    }
    prev_theta = t;
    prev_rho = r;
  }
}

namespace {

ConvKernel uniform_kernel(KernelShape shape, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(shape.in_channels * shape.kernel_h * shape.kernel_w));
  std::uniform_real_distribution<double> dist(-bound, bound);
  ConvKernel k(shape);
  for (double& w : k.weights()) w = dist(rng);
  return k;
}

void check_kernel(const ConvKernel& k, KernelShape expected, const std::string& what) {
  require(k.shape() == expected, "LzscBlockParams: kernel " + what + " has shape " +
                                     std::to_string(k.out_channels()) + "x" + std::to_string(k.in_channels()) + "x" +
                                     std::to_string(k.kernel_h()) + "x" + std::to_string(k.kernel_w()) +
                                     ", expected " + std::to_string(expected.out_channels) + "x" +
                                     std::to_string(expected.in_channels) + "x" + std::to_string(expected.kernel_h) +
                                     "x" + std::to_string(expected.kernel_w));
}

}  // namespace

LzscBlockParams LzscBlockParams::zeros(std::size_t input_channels, std::size_t feature_channels,
                                       std::size_t kernel_size, std::size_t iterations) {
  require(iterations >= 1, "LzscBlockParams: need at least one iteration module");
  LzscBlockParams p;
  p.input_channels = input_channels;
  p.feature_channels = feature_channels;
  p.kernel_size = kernel_size;
  const KernelShape up{feature_channels, input_channels, kernel_size, kernel_size};
  const KernelShape down{input_channels, feature_channels, kernel_size, kernel_size};
  for (std::size_t k = 0; k < iterations; ++k)
    p.modules.push_back({ConvKernel(up), ConvKernel(down), ConvKernel(up), ConvKernel(down), ConvKernel(up)});
  p.schedule = ScheduleParams::from_targets(0.1, 0.09, 0.2);
  return p;
}

LzscBlockParams LzscBlockParams::random(std::size_t input_channels, std::size_t feature_channels,
                                        std::size_t kernel_size, std::size_t iterations, std::mt19937_64& rng) {
  LzscBlockParams p = zeros(input_channels, feature_channels, kernel_size, iterations);
  for (auto& m : p.modules) {
    m.w_u = uniform_kernel(m.w_u.shape(), rng);
    m.w_d = uniform_kernel(m.w_d.shape(), rng);
    m.w_u_prev = uniform_kernel(m.w_u_prev.shape(), rng);
    m.w_d_prev = uniform_kernel(m.w_d_prev.shape(), rng);
    m.w_e = uniform_kernel(m.w_e.shape(), rng);
  }
  return p;
}

LzscBlockParams LzscBlockParams::from_dictionary(const ConvKernel& dictionary, double step, std::size_t iterations,
                                                 const ScheduleParams& schedule) {
  require(dictionary.kernel_h() == dictionary.kernel_w(), "from_dictionary: square kernels only");
  LzscBlockParams p = zeros(dictionary.out_channels(), dictionary.in_channels(), dictionary.kernel_h(), iterations);
  ConvKernel up = adjoint_kernel(dictionary);
  for (double& w : up.weights()) w *= step;
  for (auto& m : p.modules) m = {up, dictionary, up, dictionary, up};
  p.schedule = schedule;
  return p;
}

void LzscBlockParams::validate() const {
  require(!modules.empty(), "LzscBlockParams: need at least one iteration module");
  const KernelShape up{feature_channels, input_channels, kernel_size, kernel_size};
  const KernelShape down{input_channels, feature_channels, kernel_size, kernel_size};
  for (std::size_t k = 0; k < modules.size(); ++k) {
    const auto& m = modules[k];
    const std::string im = "im" + std::to_string(k) + ".";
    check_kernel(m.w_u, up, im + "W_u");
    check_kernel(m.w_d, down, im + "W_d");
    check_kernel(m.w_u_prev, up, im + "W_u_prev");
    check_kernel(m.w_d_prev, down, im + "W_d_prev");
    check_kernel(m.w_e, up, im + "W_e");
  }
  validate_schedule(schedule, modules.size());
}

namespace detail {

Tensor momentum_combine(const Tensor& a, const Tensor& b, double rho, const Tensor& e) {
  Tensor out(e.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 + rho) * a[i] - rho * b[i] + e[i];
  return out;
}

Tensor residual_step(const Tensor& u, const ConvKernel& w_u, const ConvKernel& w_d) {
  return u - conv2d_same(conv2d_same(u, w_d), w_u);
}

}  // namespace detail

Tensor im_forward(const Tensor& u_k, const Tensor& u_km1, const Tensor& input, const IterationModuleParams& m,
                  double theta, double rho) {
  require(u_k.shape() == u_km1.shape(), "im_forward: state shapes differ");
  require(u_k.shape().same_spatial(input.shape()), "im_forward: state and input sizes differ");
  require(u_k.channels() == m.w_u.out_channels() && input.channels() == m.w_e.in_channels(),
          "im_forward: channel mismatch between states/input and kernels");
  const Tensor a = detail::residual_step(u_k, m.w_u, m.w_d);
  const Tensor b = detail::residual_step(u_km1, m.w_u_prev, m.w_d_prev);
  const Tensor v = detail::momentum_combine(a, b, rho, conv2d_same(input, m.w_e));
  return sigmoidal_threshold(v, SigmoidalParams{kLzscAlpha, kLzscGamma, theta});
}

namespace {

Tensor run_block(const Tensor& input, const LzscBlockParams& p, std::vector<Tensor>* states) {
  require(input.channels() == p.input_channels, "lzsc_forward: input has " + std::to_string(input.channels()) +
                                                    " channels, block expects " + std::to_string(p.input_channels));
  require(!p.modules.empty(), "lzsc_forward: block has no iteration modules");
  const Shape feat{input.height(), input.width(), p.feature_channels};
  // Zero states contribute exactly zero through the linear convolutions, so
  // they are not convolved.
  Tensor prev(feat), cur(feat);
  bool prev_zero = true, cur_zero = true;
  for (std::size_t k = 0; k < p.modules.size(); ++k) {
    const auto& m = p.modules[k];
    const double theta = theta_k(p.schedule, k), rho = rho_k(p.schedule, k);
    const Tensor a = cur_zero ? Tensor(feat) : detail::residual_step(cur, m.w_u, m.w_d);
    const Tensor b = prev_zero ? Tensor(feat) : detail::residual_step(prev, m.w_u_prev, m.w_d_prev);
    const Tensor v = detail::momentum_combine(a, b, rho, conv2d_same(input, m.w_e));
    Tensor next = sigmoidal_threshold(v, SigmoidalParams{kLzscAlpha, kLzscGamma, theta});
    prev = std::move(cur);
    prev_zero = cur_zero;
    cur = std::move(next);
    cur_zero = false;
    if (states) states->push_back(cur);
  }
  return cur;
}

}  // namespace

LzscTrace lzsc_forward_traced(const Tensor& input, const LzscBlockParams& p) {
  LzscTrace trace;
  trace.output = run_block(input, p, &trace.states);
  return trace;
}

Tensor lzsc_forward(const Tensor& input, const LzscBlockParams& p) { return run_block(input, p, nullptr); }

}  // namespace lzsc
