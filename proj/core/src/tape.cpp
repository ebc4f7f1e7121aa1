#include "lzsc/tape.hpp"

#include <cmath>

#include "lzsc/error.hpp"
#include "lzsc/internal.hpp"
#include "lzsc/losses.hpp"
#include "lzsc/thresholding.hpp"

namespace lzsc {

const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::constant: return "constant";
    case OpKind::variable: return "variable";
    case OpKind::conv: return "conv";
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::concat: return "concat";
    case OpKind::schedule_theta: return "schedule_theta";
    case OpKind::schedule_rho: return "schedule_rho";
    case OpKind::sigmoidal_threshold: return "sigmoidal_threshold";
    case OpKind::momentum: return "momentum";
    case OpKind::sobel: return "sobel";
    case OpKind::mean_abs_diff: return "mean_abs_diff";
    case OpKind::mean_squared_diff: return "mean_squared_diff";
    case OpKind::ssim: return "ssim";
    case OpKind::linear_combination: return "linear_combination";
  }
  return "?";
}

namespace {

Tensor scalar_tensor(double v) { return Tensor(Shape{1, 1, 1}, v); }

}  // namespace

GradientTape::Var GradientTape::push(OpKind kind, std::vector<Var> inputs, Tensor value,
                                     std::function<void(GradientTape&, Var)> backward, bool owns_parameters) {
  Node n;
  n.kind = kind;
  n.needs_grad = owns_parameters;
  for (Var in : inputs) n.needs_grad = n.needs_grad || nodes_[in].needs_grad;
  n.inputs = std::move(inputs);
  n.value = std::move(value);
  if (n.needs_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return nodes_.size() - 1;
}

void GradientTape::accumulate(Var v, Tensor g) {
  Node& n = nodes_[v];
  if (!n.needs_grad) return;
  if (!n.has_grad) {
    n.grad = std::move(g);
    n.has_grad = true;
  } else {
    n.grad += g;
  }
}

Tensor GradientTape::grad(Var v) const {
  const Node& n = nodes_[v];
  return n.has_grad ? n.grad : Tensor(n.value.shape());
}

GradientTape::Var GradientTape::constant(Tensor value) { return push(OpKind::constant, {}, std::move(value), {}); }

GradientTape::Var GradientTape::variable(Tensor value) {
  return push(OpKind::variable, {}, std::move(value), [](GradientTape&, Var) {}, true);
}

GradientTape::Var GradientTape::conv(Var x, KernelSlot w) {
  require(w.value != nullptr, "tape conv: missing kernel");
  Tensor out = conv2d_same(value(x), *w.value);
  return push(
      OpKind::conv, {x}, std::move(out),
      [x, w](GradientTape& t, Var self) {
        const Tensor& g = t.upstream(self);
        if (w.grad) conv2d_accumulate_grad_weights(t.value(x), g, *w.grad);
        if (t.nodes_[x].needs_grad) t.accumulate(x, conv2d_grad_input(g, *w.value));
      },
      w.grad != nullptr);
}

GradientTape::Var GradientTape::add(Var a, Var b) {
  return push(OpKind::add, {a, b}, value(a) + value(b), [a, b](GradientTape& t, Var self) {
    t.accumulate(a, t.upstream(self));
    t.accumulate(b, t.upstream(self));
  });
}

GradientTape::Var GradientTape::sub(Var a, Var b) {
  return push(OpKind::sub, {a, b}, value(a) - value(b), [a, b](GradientTape& t, Var self) {
    t.accumulate(a, t.upstream(self));
    if (t.nodes_[b].needs_grad) t.accumulate(b, -1.0 * t.upstream(self));
  });
}

GradientTape::Var GradientTape::concat(Var a, Var b) {
  const std::size_t ca = value(a).channels(), cb = value(b).channels();
  return push(OpKind::concat, {a, b}, channel_concat(value(a), value(b)), [a, b, ca, cb](GradientTape& t, Var self) {
    const Tensor& g = t.upstream(self);
    if (t.nodes_[a].needs_grad) t.accumulate(a, channel_slice(g, 0, ca));
    if (t.nodes_[b].needs_grad) t.accumulate(b, channel_slice(g, ca, cb));
  });
}

GradientTape::Var GradientTape::schedule_theta(ScheduleSlot s, std::size_t k) {
  return push(
      OpKind::schedule_theta, {}, scalar_tensor(theta_k(*s.value, k)),
      [s, k](GradientTape& t, Var self) {
        const double g = t.upstream(self)[0];
        const ScheduleGrad d = schedule_partials(*s.value, k);
        s.grad->w_theta_raw += g * d.w_theta_raw;
        s.grad->b_theta += g * d.b_theta;
      },
      s.grad != nullptr);
}

GradientTape::Var GradientTape::schedule_rho(ScheduleSlot s, std::size_t k) {
  return push(
      OpKind::schedule_rho, {}, scalar_tensor(rho_k(*s.value, k)),
      [s, k](GradientTape& t, Var self) {
        const double g = t.upstream(self)[0];
        const ScheduleGrad d = schedule_partials(*s.value, k);
        s.grad->w_rho_raw += g * d.w_rho_raw;
        s.grad->b_rho += g * d.b_rho;
      },
      s.grad != nullptr);
}

GradientTape::Var GradientTape::sigmoidal_threshold(Var x, Var theta, double alpha, double gamma) {
  const SigmoidalParams p{alpha, gamma, scalar(theta)};
  p.validate();
  const Tensor& xv = value(x);
  // Same expression as the scalar threshold; the logistic gate is kept for
  // the backward pass.
  Tensor out(xv.shape()), gate(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    const double a = std::abs(xv[i]);
    const double z = gamma * (a - p.theta);
    if (xv[i] == 0.0 || z < kSigmoidClamp) continue;
    const double e = 1.0 + std::exp(-z);
    const double v = (a - alpha * p.theta) / e;
    out[i] = xv[i] > 0.0 ? v : -v;
    gate[i] = 1.0 / e;
  }
  return push(OpKind::sigmoidal_threshold, {x, theta}, std::move(out),
              [x, theta, p, gate = std::move(gate)](GradientTape& t, Var self) {
                const Tensor& g = t.upstream(self);
                const Tensor& xv = t.value(x);
                Tensor gx(xv.shape());
                double gt = 0.0;
                for (std::size_t i = 0; i < xv.size(); ++i) {
                  const double s = gate[i];
                  if (s == 0.0) continue;
                  const double num = std::abs(xv[i]) - p.alpha * p.theta;
                  const double ds = p.gamma * s * (1.0 - s);
                  const double sign = xv[i] > 0.0 ? 1.0 : -1.0;
                  gx[i] = g[i] * (s + num * ds);
                  gt += g[i] * (sign * (-p.alpha * s - num * ds));
                }
                t.accumulate(x, std::move(gx));
                t.accumulate(theta, scalar_tensor(gt));
              });
}

GradientTape::Var GradientTape::momentum(Var a, Var b, Var rho, Var e) {
  const double r = scalar(rho);
  return push(OpKind::momentum, {a, b, rho, e}, detail::momentum_combine(value(a), value(b), r, value(e)),
              [a, b, rho, e, r](GradientTape& t, Var self) {
                const Tensor& g = t.upstream(self);
                if (t.nodes_[a].needs_grad) t.accumulate(a, (1.0 + r) * Tensor(g));
                if (t.nodes_[b].needs_grad) t.accumulate(b, -r * Tensor(g));
                t.accumulate(e, g);
                if (t.nodes_[rho].needs_grad) {
                  const Tensor& av = t.value(a);
                  const Tensor& bv = t.value(b);
                  double gr = 0.0;
                  for (std::size_t i = 0; i < g.size(); ++i) gr += g[i] * (av[i] - bv[i]);
                  t.accumulate(rho, scalar_tensor(gr));
                }
              });
}

GradientTape::Var GradientTape::sobel(Var x) {
  return push(OpKind::sobel, {x}, sobel_gradient(value(x)), [x](GradientTape& t, Var self) {
    t.accumulate(x, sobel_gradient_backward(t.value(x), t.upstream(self)));
  });
}

GradientTape::Var GradientTape::mean_abs_diff(Var a, Var b) {
  return push(OpKind::mean_abs_diff, {a, b}, scalar_tensor(lzsc::mean_abs_diff(value(a), value(b))),
              [a, b](GradientTape& t, Var self) {
                const Tensor& av = t.value(a);
                const Tensor& bv = t.value(b);
                const double scale = t.upstream(self)[0] / static_cast<double>(av.size());
                Tensor g(av.shape());
                for (std::size_t i = 0; i < g.size(); ++i) {
                  const double d = av[i] - bv[i];
                  g[i] = d > 0.0 ? scale : (d < 0.0 ? -scale : 0.0);
                }
                if (t.nodes_[b].needs_grad) t.accumulate(b, -1.0 * Tensor(g));
                t.accumulate(a, g);
              });
}

GradientTape::Var GradientTape::mean_squared_diff(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  require(av.shape() == bv.shape(), "mean_squared_diff: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) s += (av[i] - bv[i]) * (av[i] - bv[i]);
  return push(OpKind::mean_squared_diff, {a, b}, scalar_tensor(av.empty() ? 0.0 : s / static_cast<double>(av.size())),
              [a, b](GradientTape& t, Var self) {
                const Tensor& av = t.value(a);
                const Tensor& bv = t.value(b);
                const double scale = 2.0 * t.upstream(self)[0] / static_cast<double>(av.size());
                Tensor g(av.shape());
                for (std::size_t i = 0; i < g.size(); ++i) g[i] = scale * (av[i] - bv[i]);
                if (t.nodes_[b].needs_grad) t.accumulate(b, -1.0 * Tensor(g));
                t.accumulate(a, g);
              });
}

GradientTape::Var GradientTape::ssim(Var x, Var y) {
  return push(OpKind::ssim, {x, y}, scalar_tensor(lzsc::ssim(value(x), value(y))), [x, y](GradientTape& t, Var self) {
    const SsimGrad g = ssim_grad(t.value(x), t.value(y), t.upstream(self)[0]);
    t.accumulate(x, g.d_x);
    t.accumulate(y, g.d_y);
  });
}

GradientTape::Var GradientTape::linear_combination(std::vector<std::pair<double, Var>> terms) {
  require(!terms.empty(), "linear_combination: no terms");
  Tensor out(value(terms.front().second).shape());
  std::vector<Var> inputs;
  for (const auto& [c, v] : terms) {
    out.add_scaled(value(v), c);
    inputs.push_back(v);
  }
  return push(OpKind::linear_combination, std::move(inputs), std::move(out),
              [terms = std::move(terms)](GradientTape& t, Var self) {
                for (const auto& [c, v] : terms)
                  if (t.nodes_[v].needs_grad) t.accumulate(v, c * Tensor(t.upstream(self)));
              });
}

void GradientTape::backward(Var loss) {
  require(loss < nodes_.size() && nodes_[loss].value.size() == 1, "backward: target must be a scalar node");
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad = Tensor();
  }
  replay_.clear();
  if (!nodes_[loss].needs_grad) return;
  nodes_[loss].grad = scalar_tensor(1.0);
  nodes_[loss].has_grad = true;
  for (Var v = loss + 1; v-- > 0;) {
    Node& n = nodes_[v];
    if (!n.has_grad || !n.backward) continue;
    replay_.push_back(v);
    n.backward(*this, v);
  }
}

TapedBlock tape_lzsc_block(GradientTape& tape, GradientTape::Var input, const LzscBlockParams& p,
                           LzscBlockParams* grad) {
  const Tensor& in = tape.value(input);
  require(in.channels() == p.input_channels, "lzsc_forward: input has " + std::to_string(in.channels()) +
                                                 " channels, block expects " + std::to_string(p.input_channels));
  const Shape feat{in.height(), in.width(), p.feature_channels};
  auto slot = [grad](const ConvKernel& w, ConvKernel* g) { return KernelSlot{&w, grad ? g : nullptr}; };
  const ScheduleSlot sched{&p.schedule, grad ? &grad->schedule : nullptr};

  TapedBlock out;
  const GradientTape::Var zero = tape.constant(Tensor(feat));
  GradientTape::Var prev = zero, cur = zero;
  bool prev_zero = true, cur_zero = true;
  for (std::size_t k = 0; k < p.modules.size(); ++k) {
    const auto& m = p.modules[k];
    IterationModuleParams* gm = grad ? &grad->modules[k] : nullptr;
    const GradientTape::Var theta = tape.schedule_theta(sched, k);
    const GradientTape::Var rho = tape.schedule_rho(sched, k);
    GradientTape::Var a = zero, b = zero;
    if (!cur_zero) {
      const auto down = tape.conv(cur, slot(m.w_d, gm ? &gm->w_d : nullptr));
      a = tape.sub(cur, tape.conv(down, slot(m.w_u, gm ? &gm->w_u : nullptr)));
    }
    if (!prev_zero) {
      const auto down = tape.conv(prev, slot(m.w_d_prev, gm ? &gm->w_d_prev : nullptr));
      b = tape.sub(prev, tape.conv(down, slot(m.w_u_prev, gm ? &gm->w_u_prev : nullptr)));
    }
    const auto e = tape.conv(input, slot(m.w_e, gm ? &gm->w_e : nullptr));
    const auto v = tape.momentum(a, b, rho, e);
    prev = cur;
    prev_zero = cur_zero;
    cur = tape.sigmoidal_threshold(v, theta, kLzscAlpha, kLzscGamma);
    cur_zero = false;
    out.states.push_back(cur);
  }
  out.output = cur;
  return out;
}

TapedFusion tape_fnet(GradientTape& tape, GradientTape::Var i1, GradientTape::Var i2, const FNetParams& p,
                      FNetParams* grad) {
  require(tape.value(i1).channels() == 1 && tape.value(i2).channels() == 1,
          "fnet_forward: inputs must be single-channel");
  require(tape.value(i1).shape() == tape.value(i2).shape(), "fnet_forward: input sizes differ");
  auto slot = [grad](const ConvKernel& w, ConvKernel* g) { return KernelSlot{&w, grad ? g : nullptr}; };
  TapedFusion f;
  f.u1 = tape_lzsc_block(tape, i1, p.block_u1, grad ? &grad->block_u1 : nullptr).output;
  f.u2 = tape_lzsc_block(tape, i2, p.block_u2, grad ? &grad->block_u2 : nullptr).output;
  const auto hat1 = tape.sub(i1, tape.conv(f.u1, slot(p.d_u1, grad ? &grad->d_u1 : nullptr)));
  const auto hat2 = tape.sub(i2, tape.conv(f.u2, slot(p.d_u2, grad ? &grad->d_u2 : nullptr)));
  f.c = tape_lzsc_block(tape, tape.concat(hat1, hat2), p.block_c, grad ? &grad->block_c : nullptr).output;
  f.part_common = tape.conv(f.c, slot(p.g_c, grad ? &grad->g_c : nullptr));
  f.part_u1 = tape.conv(f.u1, slot(p.g_u1, grad ? &grad->g_u1 : nullptr));
  f.part_u2 = tape.conv(f.u2, slot(p.g_u2, grad ? &grad->g_u2 : nullptr));
  f.fused = tape.add(tape.add(f.part_common, f.part_u1), f.part_u2);
  return f;
}

TapedInverse tape_ifnet(GradientTape& tape, GradientTape::Var fused, const IFNetParams& p, IFNetParams* grad) {
  require(tape.value(fused).channels() == 1, "ifnet_forward: fused image must be single-channel");
  auto slot = [grad](const ConvKernel& w, ConvKernel* g) { return KernelSlot{&w, grad ? g : nullptr}; };
  TapedInverse r;
  r.x1 = tape_lzsc_block(tape, fused, p.block_x1, grad ? &grad->block_x1 : nullptr).output;
  r.x2 = tape_lzsc_block(tape, fused, p.block_x2, grad ? &grad->block_x2 : nullptr).output;
  r.i1 = tape.conv(r.x1, slot(p.d_x1, grad ? &grad->d_x1 : nullptr));
  r.i2 = tape.conv(r.x2, slot(p.d_x2, grad ? &grad->d_x2 : nullptr));
  return r;
}

}  // namespace lzsc
