#pragma once

#include "dsic/isg.hpp"

namespace dsic {

// Small four-stage convolutional backbone for desk-scale experiments. A
// stride-2 stem plus a stride-2 entry conv per stage put stage i at 1/2^i of
// the input resolution (i in 2..5); each stage then runs n stride-1 blocks of
// one 3x3 conv + relu. Every block output is retained for intra-scale
// selection.
struct BackboneStageParams {
  Conv entry;
  std::vector<Conv> blocks;
};

struct BackboneParams {
  Conv stem;
  std::array<BackboneStageParams, 4> stages;
  std::array<int, 4> stage_channels{8, 16, 32, 64};
};

BackboneParams make_backbone_params(ParamStore& store, int in_channels,
                                    const std::array<int, 4>& blocks_per_stage, Rng& rng);

// image must be square, a power of two, and at least 32 px; BadInputSize
// otherwise.
std::array<StageBlocksV, 4> backbone_forward(Var image, const BackboneParams& params,
                                             const BoundParams& p);

}  // namespace dsic
