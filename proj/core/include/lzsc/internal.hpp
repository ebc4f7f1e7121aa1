#pragma once

// Building blocks shared by the plain forward passes and the gradient tape so
// that both evaluate the exact same floating-point expressions.

#include "lzsc/conv.hpp"
#include "lzsc/tensor.hpp"

namespace lzsc::detail {

/// (1 + rho) * a - rho * b + e, elementwise.
Tensor momentum_combine(const Tensor& a, const Tensor& b, double rho, const Tensor& e);

/// u - W_u(W_d(u))
Tensor residual_step(const Tensor& u, const ConvKernel& w_u, const ConvKernel& w_d);

}  // namespace lzsc::detail
