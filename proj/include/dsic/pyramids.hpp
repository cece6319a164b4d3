#pragma once

#include <array>

#include "dsic/csg.hpp"

namespace dsic {

// Fixed reference connectors: the classic top-down pyramid and its
// fully-connected counterpart. Both serve as oracles for the gated connector
// and as trainable baseline arms.

struct FpnParams {
  std::array<Conv, 4> lateral;  // 1x1 c_i -> d
  // post-merge 3x3 smoothing is off by default so the gated-connector
  // equivalence is exact; the flag restores the conventional form
  bool smooth = false;
  std::array<Conv, 4> smooth_conv;
};

FpnParams make_fpn_params(ParamStore& store, const std::array<int, 4>& in_channels, int d,
                          bool smooth, Rng& rng);

// P_5 = L_5; P_k = L_k + up2(P_{k+1}).
std::array<Var, 4> fpn_forward(const std::array<Var, 4>& pyramid, const FpnParams& params,
                               const BoundParams& p);

// P_k = sum_i resample_to_k(L_i), sharing the lattice resampling rules (and,
// when the caller passes the same LatticeParams, the exact weights) of the
// cross-scale gate.
std::array<Var, 4> fc_fpn_forward(const std::array<Var, 4>& pyramid,
                                  const LatticeParams& lattice, const BoundParams& p);

// Top-down merge over an externally produced pyramid (all levels already at
// width d); used by the "inside" placement variant.
std::array<Var, 4> top_down_merge(const std::array<Var, 4>& laterals);

}  // namespace dsic
