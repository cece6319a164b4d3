#pragma once

#include <array>
#include <optional>

#include "dsic/gate.hpp"

namespace dsic {

// One backbone stage's block outputs bound to a tape. Blocks share one shape;
// the last block is the stage output in the conventional pyramid.
struct StageBlocksV {
  int stage = 0;  // 2..5
  std::vector<Var> blocks;
};

// Per-stage selection parameters (non-shared across stages): a 1x1 trunk over
// the concatenated former blocks and one 1x1 projection per former block that
// emits its gate control signal.
struct IsgStageParams {
  Conv trunk;
  std::vector<Conv> proj;
};

struct IsgOptions {
  GateMode mode = GateMode::RectifiedTanh;
  GatePlacement placement = GatePlacement::Signal;
  bool fine_selection = true;
  int sampling_stride = 1;  // 1: all former blocks; 2: every second, counting back from the last
  GateForce force_coarse = GateForce::None;
  GateForce force_fine = GateForce::None;
};

struct IsgParams {
  std::array<IsgStageParams, 4> stages;
  IsgOptions opts;
};

// Former-block indices (0-based, ascending, excluding the last block) kept by
// the sampling stride.
std::vector<int> former_block_indices(int n_blocks, int sampling_stride);

IsgParams make_isg_params(ParamStore& store, const std::array<int, 4>& stage_channels,
                          const std::array<int, 4>& blocks_per_stage, const IsgOptions& opts,
                          Rng& rng, double gate_head_scale);

struct CoarseResultV {
  std::vector<Var> squashed;      // per kept former block
  std::vector<int> block_index;   // 0-based indices the signals refer to
  Var fused;                      // zero tensor when no former blocks
};

CoarseResultV coarse_select(const StageBlocksV& blocks, const IsgStageParams& params,
                            const IsgOptions& opts, const BoundParams& p);

struct FineResultV {
  Var a;         // null when bypassed
  Var selected;
};

// selected = a (.) fused + (1 - a) (.) last, with a from pooled statistics of
// fused + last.
FineResultV fine_select(Var fused, Var last, const IsgOptions& opts);

struct IsgStageOutput {
  Var selected;
  std::vector<Var> b_squashed;
  std::vector<int> b_block_index;
  Var a_squashed;  // null when fine selection was bypassed or disabled
};

struct IsgOutput {
  std::array<IsgStageOutput, 4> stage;
  std::array<Var, 4> selected;
};

// Full intra-scale selection over the four stages. Stages with no usable
// former blocks, and stages under force_coarse == Closed, degenerate exactly
// to the last-block input.
IsgOutput isg_forward(const std::array<StageBlocksV, 4>& stages, const IsgParams& params,
                      const BoundParams& p);

}  // namespace dsic
