#pragma once

#include <cstddef>
#include <vector>

#include "lzsc/parameters.hpp"

namespace lzsc {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam over a flat list of parameter tensors. Moments are
/// kept per scalar in the enumeration order of the refs passed to step().
class AdamState {
 public:
  AdamState() = default;
  AdamState(std::size_t scalar_count, AdamConfig config);

  /// Applies one update. Every gradient must be finite; otherwise nothing is
  /// modified and TrainingError names the first offending parameter.
  void step(const std::vector<ParamRef>& params, const std::vector<ConstParamRef>& grads);

  long t() const { return t_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }

 private:
  AdamConfig config_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

}  // namespace lzsc
