#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lzsc/fnet.hpp"
#include "lzsc/ifnet.hpp"
#include "lzsc/lzsc_block.hpp"

namespace lzsc {

/// A named, shaped window onto the scalars of one learnable tensor. Kernels
/// have dims [out, in, kh, kw]; schedule scalars have no dims.
template <class T>
struct BasicParamRef {
  std::string name;
  std::vector<std::size_t> dims;
  std::span<T> values;
};
using ParamRef = BasicParamRef<double>;
using ConstParamRef = BasicParamRef<const double>;

/// Canonical enumeration order. Names follow
///   <prefix>.im<k>.{W_u,W_d,W_u_prev,W_d_prev,W_e}
///   <prefix>.schedule.{w_theta_raw,b_theta,w_rho_raw,b_rho}
std::vector<ParamRef> parameters(LzscBlockParams& p, const std::string& prefix);
std::vector<ConstParamRef> parameters(const LzscBlockParams& p, const std::string& prefix);

/// fnet.block_u1.*, fnet.block_u2.*, fnet.block_c.*, fnet.{D_u1,D_u2,G_c,G_u1,G_u2}
std::vector<ParamRef> parameters(FNetParams& p, const std::string& prefix = "fnet");
std::vector<ConstParamRef> parameters(const FNetParams& p, const std::string& prefix = "fnet");

/// ifnet.block_x1.*, ifnet.block_x2.*, ifnet.{D_x1,D_x2}
std::vector<ParamRef> parameters(IFNetParams& p, const std::string& prefix = "ifnet");
std::vector<ConstParamRef> parameters(const IFNetParams& p, const std::string& prefix = "ifnet");

std::size_t parameter_count(const std::vector<ConstParamRef>& refs);

/// Same structure with every learnable scalar set to zero; used as gradient
/// accumulators and optimizer moments.
LzscBlockParams zeros_like(const LzscBlockParams& p);
FNetParams zeros_like(const FNetParams& p);
IFNetParams zeros_like(const IFNetParams& p);

/// dst += scale * src over every scalar. Structures must match.
void accumulate(FNetParams& dst, const FNetParams& src, double scale = 1.0);
void accumulate(IFNetParams& dst, const IFNetParams& src, double scale = 1.0);
void accumulate(LzscBlockParams& dst, const LzscBlockParams& src, double scale = 1.0);

/// Rounds every scalar to the nearest float, as stored by the f32 archive.
void round_to_float(FNetParams& p);
void round_to_float(IFNetParams& p);

}  // namespace lzsc
