#include "lzsc/adam.hpp"

#include <cmath>

#include "lzsc/error.hpp"

namespace lzsc {

AdamState::AdamState(std::size_t scalar_count, AdamConfig config)
    : config_(config), m_(scalar_count, 0.0), v_(scalar_count, 0.0) {
  require(config.lr >= 0.0 && std::isfinite(config.lr), "adam: learning rate must be finite and >= 0");
  require(config.beta1 >= 0.0 && config.beta1 < 1.0 && config.beta2 >= 0.0 && config.beta2 < 1.0,
          "adam: betas must lie in [0, 1)");
  require(config.eps > 0.0, "adam: eps must be positive");
}

void AdamState::step(const std::vector<ParamRef>& params, const std::vector<ConstParamRef>& grads) {
  require(params.size() == grads.size(), "adam: parameter and gradient lists differ");
  std::size_t n = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    require(params[i].values.size() == grads[i].values.size(), "adam: gradient shape differs for " + params[i].name);
    for (double g : grads[i].values)
      if (!std::isfinite(g))
        throw TrainingError("non-finite gradient in " + grads[i].name + " at step " + std::to_string(t_ + 1), t_ + 1);
    n += params[i].values.size();
  }
  require(n == m_.size(), "adam: state holds " + std::to_string(m_.size()) + " scalars, step got " +
                              std::to_string(n));

  ++t_;
  const auto& c = config_;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t_));
  std::size_t j = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t k = 0; k < params[i].values.size(); ++k, ++j) {
      const double g = grads[i].values[k];
      m_[j] = c.beta1 * m_[j] + (1.0 - c.beta1) * g;
      v_[j] = c.beta2 * v_[j] + (1.0 - c.beta2) * g * g;
      if (c.lr == 0.0) continue;
      const double mhat = m_[j] / bc1;
      const double vhat = v_[j] / bc2;
      params[i].values[k] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
}

}  // namespace lzsc
