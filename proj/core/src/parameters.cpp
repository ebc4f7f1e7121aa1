#include "lzsc/parameters.hpp"

#include "lzsc/error.hpp"

namespace lzsc {

namespace {

template <class Block, class Ref>
void collect_block(Block& p, const std::string& prefix, std::vector<Ref>& out) {
  auto kernel = [&](auto& k, const std::string& name) {
    out.push_back(Ref{name, {k.out_channels(), k.in_channels(), k.kernel_h(), k.kernel_w()}, k.weights()});
  };
  for (std::size_t i = 0; i < p.modules.size(); ++i) {
    auto& m = p.modules[i];
    const std::string im = prefix + ".im" + std::to_string(i) + ".";
    kernel(m.w_u, im + "W_u");
    kernel(m.w_d, im + "W_d");
    kernel(m.w_u_prev, im + "W_u_prev");
    kernel(m.w_d_prev, im + "W_d_prev");
    kernel(m.w_e, im + "W_e");
  }
  auto& s = p.schedule;
  const std::string sp = prefix + ".schedule.";
  out.push_back(Ref{sp + "w_theta_raw", {}, {&s.w_theta_raw, 1}});
  out.push_back(Ref{sp + "b_theta", {}, {&s.b_theta, 1}});
  out.push_back(Ref{sp + "w_rho_raw", {}, {&s.w_rho_raw, 1}});
  out.push_back(Ref{sp + "b_rho", {}, {&s.b_rho, 1}});
}

template <class Ref, class K>
void collect_kernel(K& k, const std::string& name, std::vector<Ref>& out) {
  out.push_back(Ref{name, {k.out_channels(), k.in_channels(), k.kernel_h(), k.kernel_w()}, k.weights()});
}

template <class Net, class Ref>
std::vector<Ref> collect_fnet(Net& p, const std::string& prefix) {
  std::vector<Ref> out;
  collect_block(p.block_u1, prefix + ".block_u1", out);
  collect_block(p.block_u2, prefix + ".block_u2", out);
  collect_block(p.block_c, prefix + ".block_c", out);
  collect_kernel(p.d_u1, prefix + ".D_u1", out);
  collect_kernel(p.d_u2, prefix + ".D_u2", out);
  collect_kernel(p.g_c, prefix + ".G_c", out);
  collect_kernel(p.g_u1, prefix + ".G_u1", out);
  collect_kernel(p.g_u2, prefix + ".G_u2", out);
  return out;
}

template <class Net, class Ref>
std::vector<Ref> collect_ifnet(Net& p, const std::string& prefix) {
  std::vector<Ref> out;
  collect_block(p.block_x1, prefix + ".block_x1", out);
  collect_block(p.block_x2, prefix + ".block_x2", out);
  collect_kernel(p.d_x1, prefix + ".D_x1", out);
  collect_kernel(p.d_x2, prefix + ".D_x2", out);
  return out;
}

template <class T>
T zeroed(const T& p) {
  T z = p;
  for (auto& r : parameters(z, "x"))
    for (double& v : r.values) v = 0.0;
  return z;
}

template <class T>
void accumulate_impl(T& dst, const T& src, double scale) {
  auto d = parameters(dst, "x");
  const auto s = parameters(src, "x");
  require(d.size() == s.size(), "accumulate: parameter structures differ");
  for (std::size_t i = 0; i < d.size(); ++i) {
    require(d[i].values.size() == s[i].values.size(), "accumulate: parameter " + d[i].name + " differs in size");
    for (std::size_t j = 0; j < d[i].values.size(); ++j) d[i].values[j] += scale * s[i].values[j];
  }
}

template <class T>
void round_impl(T& p) {
  for (auto& r : parameters(p))
    for (double& v : r.values) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace

std::vector<ParamRef> parameters(LzscBlockParams& p, const std::string& prefix) {
  std::vector<ParamRef> out;
  collect_block(p, prefix, out);
  return out;
}

std::vector<ConstParamRef> parameters(const LzscBlockParams& p, const std::string& prefix) {
  std::vector<ConstParamRef> out;
  collect_block(p, prefix, out);
  return out;
}

std::vector<ParamRef> parameters(FNetParams& p, const std::string& prefix) {
  return collect_fnet<FNetParams, ParamRef>(p, prefix);
}
std::vector<ConstParamRef> parameters(const FNetParams& p, const std::string& prefix) {
  return collect_fnet<const FNetParams, ConstParamRef>(p, prefix);
}
std::vector<ParamRef> parameters(IFNetParams& p, const std::string& prefix) {
  return collect_ifnet<IFNetParams, ParamRef>(p, prefix);
}
std::vector<ConstParamRef> parameters(const IFNetParams& p, const std::string& prefix) {
  return collect_ifnet<const IFNetParams, ConstParamRef>(p, prefix);
}

std::size_t parameter_count(const std::vector<ConstParamRef>& refs) {
  std::size_t n = 0;
  for (const auto& r : refs) n += r.values.size();
  return n;
}

LzscBlockParams zeros_like(const LzscBlockParams& p) { return zeroed(p); }
FNetParams zeros_like(const FNetParams& p) { return zeroed(p); }
IFNetParams zeros_like(const IFNetParams& p) { return zeroed(p); }

void accumulate(FNetParams& dst, const FNetParams& src, double scale) { accumulate_impl(dst, src, scale); }
void accumulate(IFNetParams& dst, const IFNetParams& src, double scale) { accumulate_impl(dst, src, scale); }
void accumulate(LzscBlockParams& dst, const LzscBlockParams& src, double scale) { accumulate_impl(dst, src, scale); }

void round_to_float(FNetParams& p) { round_impl(p); }
void round_to_float(IFNetParams& p) { round_impl(p); }

}  // namespace lzsc
