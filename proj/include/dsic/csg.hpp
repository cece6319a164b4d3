#pragma once

#include <array>

#include "dsic/gate.hpp"

namespace dsic {

// Resampling lattice parameters shared by the cross-scale gate and the
// fully-connected reference pyramid: per-level 1x1 projections to a common
// width d, and one stack of stride-2 3x3 convolutions per down path (i, k),
// i < k, each stack owning its weights.
struct LatticeParams {
  int d = 0;
  std::array<Conv, 4> proj;
  std::array<std::array<std::vector<Conv>, 4>, 4> down;  // down[i][k], indices 0..3 = levels 2..5
};

LatticeParams make_lattice_params(ParamStore& store, const std::string& prefix,
                                  const std::array<int, 4>& in_channels, int d, Rng& rng);

// Per-target-level control head. The w path reduces pooled statistics of the
// column to one scalar signal per source; the s path turns spatially
// normalized maps into single-channel selection maps.
struct CcuHeadParams {
  Conv w_reduce;              // 1x1: 4d -> d
  Conv w_out;                 // 1x1: d -> 4
  std::array<Conv, 4> s_conv; // 3x3: d -> 1, one per source level
  Conv s_shared;              // 3x3: d -> 1 on the target's own normalized map
};

// Test/ablation override for the 4x4 path gates.
enum class WForce {
  None,
  AllOpen,    // w_ik = 1 everywhere
  AllClosed,  // w_ik = 0 everywhere
  Diagonal,   // w_ik = 1{i == k}
  TopDown,    // w_ik = 1{i >= k}
};

struct CsgOptions {
  GateMode mode = GateMode::RectifiedTanh;
  GatePlacement placement = GatePlacement::Signal;
  double norm_eps = 1e-6;
  WForce w_force = WForce::None;
  bool s_force_open = false;
};

struct CsgParams {
  LatticeParams lattice;
  std::array<CcuHeadParams, 4> heads;
  CsgOptions opts;
};

CsgParams make_csg_params(ParamStore& store, const std::array<int, 4>& in_channels, int d,
                          const CsgOptions& opts, Rng& rng, double gate_head_scale);

// 1x1-project each pyramid level to d channels.
std::array<Var, 4> project_inputs(const std::array<Var, 4>& pyramid,
                                  const LatticeParams& lattice, const BoundParams& p);

// lattice[i][k]: level-i features resampled to level-k resolution. i < k uses
// the (k - i)-step down stack, i > k bilinear upsampling by 2^(i-k).
std::array<std::array<Var, 4>, 4> build_lattice(const std::array<Var, 4>& projected,
                                                const LatticeParams& lattice,
                                                const BoundParams& p);

struct CcuColumnOutput {
  std::array<Var, 4> w;      // squashed scalars (n, 1, 1, 1) per source
  std::array<Var, 4> w_raw;  // pre-squash signals (for the literal placement)
  std::array<Var, 4> s;      // squashed maps (n, 1, h_k, w_k) per source
};

// column = {M_ik}_i at level-k resolution; target_index identifies M_kk, whose
// normalized map feeds the shared selection conv.
CcuColumnOutput ccu(const std::array<Var, 4>& column, int target_index,
                    const CcuHeadParams& head, const CsgOptions& opts, const BoundParams& p);

struct CsgOutput {
  std::array<Var, 4> pyramid;                 // P'_2..P'_5
  std::array<std::array<Var, 4>, 4> w;        // [i][k] squashed path gates
  std::array<std::array<Var, 4>, 4> s;        // [i][k] squashed selection maps
};

// P'_k = sum_i w_ik (.) M_ik (.) s_ik, with w scalar per path and s broadcast
// over channels.
CsgOutput csg_forward(const std::array<Var, 4>& pyramid, const CsgParams& params,
                      const BoundParams& p);

}  // namespace dsic
