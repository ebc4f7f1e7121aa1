#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "lzsc/conv.hpp"
#include "lzsc/tensor.hpp"

namespace lzsc {

double softplus(double x);
/// Derivative of softplus, the logistic sigmoid.
double logistic(double x);
/// Inverse of softplus for y > 0.
double softplus_inverse(double y);

/// Learned per-block threshold/momentum schedule. The stored values are the
/// unconstrained raws; the realised slopes are
///   w_theta = -softplus(w_theta_raw) < 0,  w_rho = softplus(w_rho_raw) > 0
/// so any raw values give a strictly decreasing theta^k > 0 and a momentum
/// weight rho^k in [0, 1) that starts at exactly 0 and never decreases.
struct ScheduleParams {
  double w_theta_raw = 0.0;
  double b_theta = 0.0;
  double w_rho_raw = 0.0;
  double b_rho = 0.0;

  double w_theta() const { return -softplus(w_theta_raw); }
  double w_rho() const { return softplus(w_rho_raw); }

  /// Raws realising theta^0 = theta0, theta^1 = theta1 and rho^1 = rho1.
  static ScheduleParams from_targets(double theta0, double theta1, double rho1);

  friend bool operator==(const ScheduleParams&, const ScheduleParams&) = default;
};

/// theta^k = softplus(w_theta * k + b_theta)
double theta_k(const ScheduleParams& s, std::size_t k);
/// rho^k = (softplus(w_rho * k + b_rho) - softplus(b_rho)) / softplus(w_rho * k + b_rho)
double rho_k(const ScheduleParams& s, std::size_t k);

struct ScheduleGrad {
  double w_theta_raw = 0.0;
  double b_theta = 0.0;
  double w_rho_raw = 0.0;
  double b_rho = 0.0;
};
/// Partial derivatives of theta^k (first two fields) and rho^k (last two)
/// with respect to the raw schedule scalars.
ScheduleGrad schedule_partials(const ScheduleParams& s, std::size_t k);

/// Checks the realised schedule over the first `iterations` steps and throws
/// ContractViolation naming the violated property.
void validate_schedule(const ScheduleParams& s, std::size_t iterations);

/// Width, kernel size and depth shared by every block of a network.
struct NetworkScale {
  std::size_t feature_channels = 8;
  std::size_t kernel_size = 5;
  std::size_t iterations = 4;

  static NetworkScale desk() { return {}; }
  static NetworkScale paper() { return {64, 9, 4}; }

  friend bool operator==(const NetworkScale&, const NetworkScale&) = default;
};

/// Convolutions of one unrolled iteration. C = block input channels,
/// K = feature channels.
struct IterationModuleParams {
  ConvKernel w_u;       // C -> K
  ConvKernel w_d;       // K -> C
  ConvKernel w_u_prev;  // C -> K, applied to the older state
  ConvKernel w_d_prev;  // K -> C
  ConvKernel w_e;       // C -> K, input injection

  friend bool operator==(const IterationModuleParams&, const IterationModuleParams&) = default;
};

struct LzscBlockParams {
  std::size_t input_channels = 1;
  std::size_t feature_channels = 8;
  std::size_t kernel_size = 5;
  std::vector<IterationModuleParams> modules;
  ScheduleParams schedule;

  std::size_t iterations() const { return modules.size(); }

  /// Zero kernels with a default schedule.
  static LzscBlockParams zeros(std::size_t input_channels, std::size_t feature_channels, std::size_t kernel_size,
                               std::size_t iterations);

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) kernels; schedule with
  /// theta^0 ~ 0.1 and rho^1 ~ 0.2.
  static LzscBlockParams random(std::size_t input_channels, std::size_t feature_channels, std::size_t kernel_size,
                                std::size_t iterations, std::mt19937_64& rng);

  /// Unrolled momentum-NIHTA for a fixed dictionary D (K -> C): W_d = W_d' = D,
  /// W_u = W_u' = W_e = step * D^T.
  static LzscBlockParams from_dictionary(const ConvKernel& dictionary, double step, std::size_t iterations,
                                         const ScheduleParams& schedule);

  /// Throws ContractViolation if any kernel disagrees with the declared
  /// channels/kernel size or the schedule invariants fail.
  void validate() const;

  friend bool operator==(const LzscBlockParams&, const LzscBlockParams&) = default;
};

/// One iteration module:
///   T_{0.1,100,theta}((1+rho)(u_k - W_u(W_d(u_k))) - rho(u_km1 - W_u'(W_d'(u_km1))) + W_e(I))
Tensor im_forward(const Tensor& u_k, const Tensor& u_km1, const Tensor& input, const IterationModuleParams& m,
                  double theta, double rho);

struct LzscTrace {
  Tensor output;
  std::vector<Tensor> states;  // u^1 ... u^N
};

/// Runs the N iteration modules from u^0 = u^-1 = 0 and returns u^N.
Tensor lzsc_forward(const Tensor& input, const LzscBlockParams& p);
LzscTrace lzsc_forward_traced(const Tensor& input, const LzscBlockParams& p);

}  // namespace lzsc
