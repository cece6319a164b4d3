#include "dsic/isg.hpp"

#include <algorithm>

namespace dsic {

std::vector<int> former_block_indices(int n_blocks, int sampling_stride) {
  std::vector<int> idx;
  if (sampling_stride == 1) {
    for (int j = 0; j < n_blocks - 1; ++j) idx.push_back(j);
    return idx;
  }
  if (sampling_stride != 2) {
    throw ConfigError("sampling_stride must be 1 or 2");
  }
  for (int j = n_blocks - 1 - 2; j >= 0; j -= 2) idx.push_back(j);
  std::reverse(idx.begin(), idx.end());
  return idx;
}

IsgParams make_isg_params(ParamStore& store, const std::array<int, 4>& stage_channels,
                          const std::array<int, 4>& blocks_per_stage, const IsgOptions& opts,
                          Rng& rng, double gate_head_scale) {
  IsgParams params;
  params.opts = opts;
  for (int s = 0; s < 4; ++s) {
    const int c = stage_channels[static_cast<std::size_t>(s)];
    const auto formers =
        former_block_indices(blocks_per_stage[static_cast<std::size_t>(s)], opts.sampling_stride);
    if (formers.empty()) continue;
    const std::string base = "isg.s" + std::to_string(s + 2);
    IsgStageParams& sp = params.stages[static_cast<std::size_t>(s)];
    sp.trunk = make_conv(store, base + ".trunk", c, static_cast<int>(formers.size()) * c, 1, 1,
                         0, rng, ConvInit{gate_head_scale, true});
    for (std::size_t j = 0; j < formers.size(); ++j) {
      sp.proj.push_back(make_conv(store, base + ".b" + std::to_string(formers[j] + 1), c, c, 1,
                                  1, 0, rng, ConvInit{gate_head_scale, true}));
    }
  }
  return params;
}

CoarseResultV coarse_select(const StageBlocksV& blocks, const IsgStageParams& params,
                            const IsgOptions& opts, const BoundParams& p) {
  if (blocks.blocks.empty()) throw ShapeMismatch("coarse_select: stage with no blocks");
  Tape& t = *blocks.blocks.front().tape;
  const Shape4 shape = t.value(blocks.blocks.front()).shape();
  for (Var b : blocks.blocks) {
    if (t.value(b).shape() != shape) {
      throw ShapeMismatch("coarse_select: inconsistent block shapes in stage " +
                          std::to_string(blocks.stage));
    }
  }

  CoarseResultV result;
  result.block_index =
      former_block_indices(static_cast<int>(blocks.blocks.size()), opts.sampling_stride);
  if (result.block_index.empty()) {
    result.fused = t.constant(Tensor4(shape));
    return result;
  }

  std::vector<Var> formers;
  for (int j : result.block_index) formers.push_back(blocks.blocks[static_cast<std::size_t>(j)]);

  // signal path: concat -> 1x1 trunk -> GAP -> per-block 1x1 projections
  Var cat = concat_channels(formers);
  Var trunk = apply_conv(params.trunk, p, cat);
  Var pooled = global_pool(PoolKind::Avg, trunk);
  std::vector<Var> raw;
  raw.reserve(formers.size());
  for (std::size_t j = 0; j < formers.size(); ++j) {
    raw.push_back(apply_conv(params.proj[j], p, pooled));
  }

  Var fused;
  if (opts.placement == GatePlacement::Signal) {
    std::vector<Var> squashed = squash_group(opts.mode, raw);
    for (std::size_t j = 0; j < formers.size(); ++j) {
      Var s = apply_force(squashed[j], opts.force_coarse);
      result.squashed.push_back(s);
      Var gated = gate(s, formers[j]);
      fused = fused ? add(fused, gated) : gated;
    }
  } else {
    for (std::size_t j = 0; j < formers.size(); ++j) {
      Var forced = apply_force(raw[j], opts.force_coarse);
      // state export uses the would-be squashed signal in either placement
      result.squashed.push_back(apply_force(squash_signal(opts.mode, raw[j]), opts.force_coarse));
      Var gated = squash_signal(opts.mode, gate(forced, formers[j]));
      fused = fused ? add(fused, gated) : gated;
    }
  }
  result.fused = fused;
  return result;
}

FineResultV fine_select(Var fused, Var last, const IsgOptions& opts) {
  Tape& t = *last.tape;
  if (t.value(fused).shape() != t.value(last).shape()) {
    throw ShapeMismatch("fine_select: " + to_string(t.value(fused).shape()) + " vs " +
                        to_string(t.value(last).shape()));
  }
  FineResultV result;
  // the signal sees both branches it arbitrates
  Var z = add(fused, last);
  Var raw = add(global_pool(PoolKind::Avg, z), global_pool(PoolKind::Max, z));
  Var a;
  if (opts.mode == GateMode::SoftmaxGroup) {
    // two-way choice: softmax over {raw, 0}
    a = softmax_over_group({raw, constant_like(raw, 0.0)})[0];
  } else {
    a = squash_signal(opts.mode, raw);
  }
  a = apply_force(a, opts.force_fine);
  result.a = a;
  result.selected = add(gate(a, fused), gate(one_minus(a), last));
  return result;
}

IsgOutput isg_forward(const std::array<StageBlocksV, 4>& stages, const IsgParams& params,
                      const BoundParams& p) {
  IsgOutput out;
  const IsgOptions& opts = params.opts;
  Shape4 prev{};
  for (int s = 0; s < 4; ++s) {
    const StageBlocksV& stage = stages[static_cast<std::size_t>(s)];
    Tape& t = *stage.blocks.front().tape;
    const Shape4 shape = t.value(stage.blocks.front()).shape();
    if (s > 0 && (prev.h != shape.h * 2 || prev.w != shape.w * 2)) {
      throw ShapeMismatch("isg_forward: stages must be octave-spaced, got " + to_string(prev) +
                          " then " + to_string(shape));
    }
    prev = shape;

    Var last = stage.blocks.back();
    IsgStageOutput& so = out.stage[static_cast<std::size_t>(s)];

    CoarseResultV cs = coarse_select(stage, params.stages[static_cast<std::size_t>(s)], opts, p);
    so.b_squashed = cs.squashed;
    so.b_block_index = cs.block_index;

    // no former contribution (structurally or by forcing): the stage input is
    // exactly the last block
    if (cs.block_index.empty() || opts.force_coarse == GateForce::Closed) {
      so.selected = last;
    } else if (!opts.fine_selection) {
      so.selected = add(cs.fused, last);
    } else {
      FineResultV fs = fine_select(cs.fused, last, opts);
      so.a_squashed = fs.a;
      so.selected = fs.selected;
    }
    out.selected[static_cast<std::size_t>(s)] = so.selected;
  }
  return out;
}

}  // namespace dsic
