#include "dsic/model.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace dsic {

void write_gate_records_csv(std::ostream& os, std::span<const GateRecordRow> rows) {
  os << "sample_id,kind,i,j_or_k,value\n";
  char buf[32];
  for (const GateRecordRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.value);
    os << r.sample_id << ',' << r.kind << ',' << r.i << ',' << r.j_or_k << ',' << buf << '\n';
  }
}

ModelParams build_model(const RunConfig& config) {
  config.validate();
  ModelParams model;
  model.config = config;
  model.connector = parse_connector(config.connector);

  Rng rng(config.seed * 0x9e3779b97f4a7c15ull + 0x6a09e667f3bcc909ull);
  const double head_scale = config.gate_init == "zero" ? 0.0 : 0.5;
  const int d = config.channels;

  model.backbone = make_backbone_params(model.store, 1, config.blocks, rng);
  const std::array<int, 4>& sc = model.backbone.stage_channels;

  if (config.isg) {
    IsgOptions opts;
    opts.mode = parse_gate_mode(config.isg_mode);
    opts.placement = config.placement == "outer" ? GatePlacement::Outer : GatePlacement::Signal;
    opts.fine_selection = config.fine_selection;
    opts.sampling_stride = config.sampling_stride;
    model.isg = make_isg_params(model.store, sc, config.blocks, opts, rng, head_scale);
  }

  CsgOptions csg_opts;
  csg_opts.mode = parse_gate_mode(config.csg_mode);
  csg_opts.placement = config.placement == "outer" ? GatePlacement::Outer : GatePlacement::Signal;

  switch (model.connector) {
    case Connector::Fpn:
      model.fpn = make_fpn_params(model.store, sc, d, config.fpn_smoothing, rng);
      break;
    case Connector::FcFpn:
      model.fc = make_lattice_params(model.store, "fc", sc, d, rng);
      break;
    case Connector::Dsic:
    case Connector::DsicInsideFpn:
      model.csg = make_csg_params(model.store, sc, d, csg_opts, rng, head_scale);
      break;
    case Connector::DsicAfterFpn:
      model.fpn = make_fpn_params(model.store, sc, d, config.fpn_smoothing, rng);
      model.csg = make_csg_params(model.store, {d, d, d, d}, d, csg_opts, rng, head_scale);
      break;
  }

  const ConvInit head_init{std::sqrt(3.0), true};
  for (int k = 0; k < 4; ++k) {
    model.heads[static_cast<std::size_t>(k)] =
        make_conv(model.store, "head" + std::to_string(k + 2), 1, d, 1, 1, 0, rng, head_init);
  }
  return model;
}

namespace {

Tensor4 stack_images(std::span<const SynthSample> batch) {
  const Shape4 s = batch.front().image.shape();
  Tensor4 out(static_cast<int>(batch.size()), s.c, s.h, s.w);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Tensor4& img = batch[b].image;
    for (long long i = 0; i < img.size(); ++i) {
      out[static_cast<std::size_t>(static_cast<long long>(b) * img.size() + i)] =
          img[static_cast<std::size_t>(i)];
    }
  }
  return out;
}

Tensor4 stack_targets(std::span<const SynthSample> batch, int level_idx) {
  const Shape4 s = batch.front().targets[static_cast<std::size_t>(level_idx)].shape();
  Tensor4 out(static_cast<int>(batch.size()), s.c, s.h, s.w);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const Tensor4& t = batch[b].targets[static_cast<std::size_t>(level_idx)];
    for (long long i = 0; i < t.size(); ++i) {
      out[static_cast<std::size_t>(static_cast<long long>(b) * t.size() + i)] =
          t[static_cast<std::size_t>(i)];
    }
  }
  return out;
}

}  // namespace

ModelForward model_forward(Tape& tape, const BoundParams& p, const ModelParams& model,
                           std::span<const SynthSample> batch) {
  if (batch.empty()) throw std::invalid_argument("model_forward: empty batch");
  ModelForward fwd;

  Var image = tape.constant(stack_images(batch));
  auto stages = backbone_forward(image, model.backbone, p);

  std::array<Var, 4> inputs;
  if (model.isg) {
    IsgOutput isg_out = isg_forward(stages, *model.isg, p);
    inputs = isg_out.selected;
    fwd.isg = std::move(isg_out);
  } else {
    for (int s = 0; s < 4; ++s) {
      inputs[static_cast<std::size_t>(s)] = stages[static_cast<std::size_t>(s)].blocks.back();
    }
  }

  switch (model.connector) {
    case Connector::Fpn:
      fwd.pyramid = fpn_forward(inputs, *model.fpn, p);
      break;
    case Connector::FcFpn:
      fwd.pyramid = fc_fpn_forward(inputs, *model.fc, p);
      break;
    case Connector::Dsic: {
      CsgOutput csg_out = csg_forward(inputs, *model.csg, p);
      fwd.pyramid = csg_out.pyramid;
      fwd.csg = std::move(csg_out);
      break;
    }
    case Connector::DsicInsideFpn: {
      // gated lateral set, conventional top-down merge on top
      CsgOutput csg_out = csg_forward(inputs, *model.csg, p);
      fwd.pyramid = top_down_merge(csg_out.pyramid);
      fwd.csg = std::move(csg_out);
      break;
    }
    case Connector::DsicAfterFpn: {
      std::array<Var, 4> merged = fpn_forward(inputs, *model.fpn, p);
      CsgOutput csg_out = csg_forward(merged, *model.csg, p);
      fwd.pyramid = csg_out.pyramid;
      fwd.csg = std::move(csg_out);
      break;
    }
  }

  Var loss;
  for (int k = 0; k < 4; ++k) {
    Var logits = apply_conv(model.heads[static_cast<std::size_t>(k)], p,
                            fwd.pyramid[static_cast<std::size_t>(k)]);
    Var pred = activation(Act::Sigmoid, logits);
    fwd.preds[static_cast<std::size_t>(k)] = pred;
    Var target = tape.constant(stack_targets(batch, k));
    Var diff = sub(pred, target);
    Var level_mse = mean_all(hadamard(diff, diff));
    loss = loss ? add(loss, level_mse) : level_mse;
  }
  fwd.loss = scale(loss, 0.25);
  return fwd;
}

namespace {

double sample_mean(const Tensor4& t, int n) {
  const Shape4& s = t.shape();
  double acc = 0.0;
  for (int c = 0; c < s.c; ++c)
    for (int y = 0; y < s.h; ++y)
      for (int x = 0; x < s.w; ++x) acc += t.at(n, c, y, x);
  return acc / (static_cast<double>(s.c) * s.h * s.w);
}

}  // namespace

std::vector<GateRecordRow> extract_gate_records(const ModelForward& fwd,
                                                long long first_sample_id) {
  std::vector<GateRecordRow> rows;
  int batch = 0;
  if (fwd.preds[0]) batch = fwd.preds[0].tape->value(fwd.preds[0]).shape().n;

  for (int n = 0; n < batch; ++n) {
    const long long sid = first_sample_id + n;
    if (fwd.isg) {
      for (int s = 0; s < 4; ++s) {
        const IsgStageOutput& st = fwd.isg->stage[static_cast<std::size_t>(s)];
        for (std::size_t j = 0; j < st.b_squashed.size(); ++j) {
          const Var v = st.b_squashed[j];
          rows.push_back({sid, "isg_b", s + 2, st.b_block_index[j] + 1,
                          sample_mean(v.tape->value(v), n)});
        }
        if (st.a_squashed) {
          rows.push_back({sid, "isg_a", s + 2, 0,
                          sample_mean(st.a_squashed.tape->value(st.a_squashed), n)});
        }
      }
    }
    if (fwd.csg) {
      for (int i = 0; i < 4; ++i) {
        for (int k = 0; k < 4; ++k) {
          const Var w = fwd.csg->w[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
          const Var s = fwd.csg->s[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
          rows.push_back({sid, "csg_w", i + 2, k + 2, sample_mean(w.tape->value(w), n)});
          rows.push_back({sid, "csg_s", i + 2, k + 2, sample_mean(s.tape->value(s), n)});
        }
      }
    }
  }
  return rows;
}

std::array<std::array<double, 4>, 4> csg_state_matrix(const ModelForward& fwd, int sample) {
  std::array<std::array<double, 4>, 4> m{};
  if (!fwd.csg) return m;
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 4; ++k) {
      const Var w = fwd.csg->w[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
      m[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
          sample_mean(w.tape->value(w), sample);
    }
  }
  return m;
}

}  // namespace dsic
