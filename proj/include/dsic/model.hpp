#pragma once

#include <optional>
#include <span>

#include "dsic/backbone.hpp"
#include "dsic/config.hpp"
#include "dsic/pyramids.hpp"
#include "dsic/synth.hpp"

namespace dsic {

// One exported gate-state value. kind: isg_b (i = stage, j_or_k = block),
// isg_a (i = stage), csg_w / csg_s (i = source level, j_or_k = target level).
struct GateRecordRow {
  long long sample_id = 0;
  std::string kind;
  int i = 0;
  int j_or_k = 0;
  double value = 0.0;
};

void write_gate_records_csv(std::ostream& os, std::span<const GateRecordRow> rows);

// Full experiment model: backbone + selected connector + per-level heads,
// with every trainable tensor owned by one store.
struct ModelParams {
  RunConfig config;
  Connector connector = Connector::Dsic;
  ParamStore store;
  BackboneParams backbone;
  std::optional<IsgParams> isg;
  std::optional<CsgParams> csg;        // dsic and placement variants
  std::optional<FpnParams> fpn;        // fpn baseline and after/inside variants
  std::optional<LatticeParams> fc;     // fc_fpn baseline
  std::array<Conv, 4> heads;
};

ModelParams build_model(const RunConfig& config);

struct ModelForward {
  std::array<Var, 4> pyramid;  // connector outputs P'_2..P'_5
  std::array<Var, 4> preds;    // per-level head outputs (n, 1, h_k, w_k), in (0, 1)
  Var loss;                    // mean over levels of per-level MSE
  std::optional<IsgOutput> isg;
  std::optional<CsgOutput> csg;
};

// Builds the graph for one batch of samples on the given tape. All samples
// must share the configured image size.
ModelForward model_forward(Tape& tape, const BoundParams& p, const ModelParams& model,
                           std::span<const SynthSample> batch);

// Per-sample openness values from a completed forward.
std::vector<GateRecordRow> extract_gate_records(const ModelForward& fwd, long long first_sample_id);

// 4x4 matrix of squashed path gates (source level x target level) for one
// sample of a completed forward; zero matrix when the connector has no
// cross-scale gate.
std::array<std::array<double, 4>, 4> csg_state_matrix(const ModelForward& fwd, int sample);

}  // namespace dsic
