#include "dsic/backbone.hpp"

#include <cmath>

namespace dsic {

BackboneParams make_backbone_params(ParamStore& store, int in_channels,
                                    const std::array<int, 4>& blocks_per_stage, Rng& rng) {
  BackboneParams params;
  // rectifier gain: uniform bounds sqrt(6 / fan_in) keep feature magnitudes
  // stable through the conv + relu chain
  const ConvInit relu_init{std::sqrt(6.0), true};
  params.stem = make_conv(store, "backbone.stem", params.stage_channels[0], in_channels, 3, 2,
                          1, rng, relu_init);
  int prev_c = params.stage_channels[0];
  for (int s = 0; s < 4; ++s) {
    const int c = params.stage_channels[static_cast<std::size_t>(s)];
    const std::string base = "backbone.s" + std::to_string(s + 2);
    BackboneStageParams& sp = params.stages[static_cast<std::size_t>(s)];
    sp.entry = make_conv(store, base + ".entry", c, prev_c, 3, 2, 1, rng, relu_init);
    const int n_blocks = blocks_per_stage[static_cast<std::size_t>(s)];
    if (n_blocks < 1 || n_blocks > 4) {
      throw ConfigError("blocks per stage must be in 1..4");
    }
    for (int b = 0; b < n_blocks; ++b) {
      sp.blocks.push_back(make_conv(store, base + ".block" + std::to_string(b + 1), c, c, 3, 1,
                                    1, rng, relu_init));
    }
    prev_c = c;
  }
  return params;
}

std::array<StageBlocksV, 4> backbone_forward(Var image, const BackboneParams& params,
                                             const BoundParams& p) {
  const Shape4& s = image.tape->value(image).shape();
  if (s.h != s.w || s.h < 32 || (s.h & (s.h - 1)) != 0) {
    throw BadInputSize("backbone: image must be square, power-of-two, >= 32, got " +
                       to_string(s));
  }
  Var x = activation(Act::Relu, apply_conv(params.stem, p, image));
  std::array<StageBlocksV, 4> out;
  for (int st = 0; st < 4; ++st) {
    const BackboneStageParams& sp = params.stages[static_cast<std::size_t>(st)];
    x = activation(Act::Relu, apply_conv(sp.entry, p, x));
    StageBlocksV& blocks = out[static_cast<std::size_t>(st)];
    blocks.stage = st + 2;
    for (const Conv& block : sp.blocks) {
      x = activation(Act::Relu, apply_conv(block, p, x));
      blocks.blocks.push_back(x);
    }
  }
  return out;
}

}  // namespace dsic
