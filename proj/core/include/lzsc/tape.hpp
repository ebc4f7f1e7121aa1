#pragma once

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "lzsc/conv.hpp"
#include "lzsc/fnet.hpp"
#include "lzsc/ifnet.hpp"
#include "lzsc/lzsc_block.hpp"
#include "lzsc/tensor.hpp"

namespace lzsc {

enum class OpKind {
  constant,
  variable,
  conv,
  add,
  sub,
  concat,
  schedule_theta,
  schedule_rho,
  sigmoidal_threshold,
  momentum,
  sobel,
  mean_abs_diff,
  mean_squared_diff,
  ssim,
  linear_combination,
};

const char* to_string(OpKind k);

/// A learnable kernel and the accumulator its gradient is added to. A null
/// `grad` freezes the kernel.
struct KernelSlot {
  const ConvKernel* value = nullptr;
  ConvKernel* grad = nullptr;
};

struct ScheduleSlot {
  const ScheduleParams* value = nullptr;
  ScheduleParams* grad = nullptr;
};

/// Records a fixed computation graph as it is evaluated and replays it in
/// reverse to accumulate parameter gradients. Nodes are appended after their
/// inputs, so reverse index order is a reverse topological order.
class GradientTape {
 public:
  using Var = std::size_t;

  Var constant(Tensor value);
  /// Leaf whose gradient is tracked, so grad(v) is available after backward().
  Var variable(Tensor value);

  Var conv(Var x, KernelSlot w);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var concat(Var a, Var b);

  /// 1x1x1 nodes holding theta^k / rho^k of a schedule.
  Var schedule_theta(ScheduleSlot s, std::size_t k);
  Var schedule_rho(ScheduleSlot s, std::size_t k);

  Var sigmoidal_threshold(Var x, Var theta, double alpha, double gamma);
  /// (1 + rho) a - rho b + e
  Var momentum(Var a, Var b, Var rho, Var e);

  Var sobel(Var x);
  /// Scalar mean |a - b|.
  Var mean_abs_diff(Var a, Var b);
  /// Scalar mean (a - b)^2.
  Var mean_squared_diff(Var a, Var b);
  /// Scalar SSIM (11x11 Gaussian window, sigma 1.5, valid windows).
  Var ssim(Var x, Var y);
  /// sum_i c_i * v_i over equally shaped nodes.
  Var linear_combination(std::vector<std::pair<double, Var>> terms);

  const Tensor& value(Var v) const { return nodes_[v].value; }
  double scalar(Var v) const { return nodes_[v].value[0]; }
  OpKind kind(Var v) const { return nodes_[v].kind; }
  const std::vector<Var>& inputs(Var v) const { return nodes_[v].inputs; }
  /// Gradient of the last backward() target with respect to node v (zeros if
  /// v did not influence it).
  Tensor grad(Var v) const;
  std::size_t size() const { return nodes_.size(); }

  /// Seeds d(loss)/d(loss) = 1 and propagates to every node and parameter
  /// slot. `loss` must be a scalar node.
  void backward(Var loss);

  /// Node indices in the order the last backward() visited them.
  const std::vector<Var>& replay_order() const { return replay_; }

 private:
  struct Node {
    OpKind kind = OpKind::constant;
    std::vector<Var> inputs;
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool needs_grad = false;
    std::function<void(GradientTape&, Var)> backward;
  };

  Var push(OpKind kind, std::vector<Var> inputs, Tensor value, std::function<void(GradientTape&, Var)> backward,
           bool owns_parameters = false);
  void accumulate(Var v, Tensor g);
  const Tensor& upstream(Var v) const { return nodes_[v].grad; }

  std::vector<Node> nodes_;
  std::vector<Var> replay_;
};

/// Taped versions of the network forward passes. They evaluate exactly the
/// same expressions as lzsc_forward / fnet_forward / ifnet_forward. Parameter
/// gradients are added into `grad` (same structure as the parameters) during
/// backward(); a null `grad` freezes the network.
struct TapedBlock {
  GradientTape::Var output;
  std::vector<GradientTape::Var> states;
};
TapedBlock tape_lzsc_block(GradientTape& tape, GradientTape::Var input, const LzscBlockParams& p,
                           LzscBlockParams* grad);

struct TapedFusion {
  GradientTape::Var u1, u2, c;
  GradientTape::Var part_common, part_u1, part_u2;
  GradientTape::Var fused;
};
TapedFusion tape_fnet(GradientTape& tape, GradientTape::Var i1, GradientTape::Var i2, const FNetParams& p,
                      FNetParams* grad);

struct TapedInverse {
  GradientTape::Var i1, i2, x1, x2;
};
TapedInverse tape_ifnet(GradientTape& tape, GradientTape::Var fused, const IFNetParams& p, IFNetParams* grad);

}  // namespace lzsc
