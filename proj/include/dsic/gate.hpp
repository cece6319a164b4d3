#pragma once

#include "dsic/params.hpp"

namespace dsic {

// Mode selection for the gate squashing function.
enum class GateMode { RectifiedTanh, Sigmoid, SoftmaxGroup };

// Where the squash is applied. Signal (default) squashes the control signal
// and multiplies it into the adapted features; Outer is the literal reading
// that squashes the product itself. Kept for ablation.
enum class GatePlacement { Signal, Outer };

// Test/ablation override of the squashed signal.
enum class GateForce { None, Closed, Open };

GateMode parse_gate_mode(const std::string& s);      // "tanh" | "sigmoid" | "softmax"
std::string gate_mode_name(GateMode m);

// Squash one raw signal under a non-group mode. SoftmaxGroup requires group
// context and throws ConfigError here.
Var squash_signal(GateMode mode, Var raw);

// Squash a family of raw signals that gate competing paths: softmax couples
// them across the group, other modes act per-signal.
std::vector<Var> squash_group(GateMode mode, const std::vector<Var>& raws);

// Replace the squashed signal with an exact constant when forced.
Var apply_force(Var squashed, GateForce force);

// Adapters making the incoming flow compatible with the gate; results are
// summed. Empty list means identity.
struct AdapterSet {
  std::vector<Conv> convs;
};

Var apply_adapters(const AdapterSet& adapters, const BoundParams& p, Var x);

// Core gating: channel-broadcast Hadamard of a squashed signal (n, m, 1, 1)
// with the adapted flow; m must equal the flow's channels or be 1.
Var gate(Var squashed, Var x);

// Full gate operator for the non-group modes: squashes per placement and
// gates the adapted flow. A path is closed iff its squashed signal is
// identically zero.
Var gate_apply(Var raw_signal, Var x, const AdapterSet& adapters, const BoundParams& p,
               GateMode mode, GatePlacement placement, GateForce force = GateForce::None);

// Mean squashed value per channel, flattened over the batch: the openness
// scalar(s) exported to gate-state records.
std::vector<double> gate_openness(const Tensor4& squashed);

// Per-sample mean of a squashed signal (over channels and positions).
std::vector<double> gate_openness_per_sample(const Tensor4& squashed);

}  // namespace dsic
