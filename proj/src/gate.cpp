#include "dsic/gate.hpp"

namespace dsic {

GateMode parse_gate_mode(const std::string& s) {
  if (s == "tanh") return GateMode::RectifiedTanh;
  if (s == "sigmoid") return GateMode::Sigmoid;
  if (s == "softmax") return GateMode::SoftmaxGroup;
  throw ConfigError("unknown gate mode: " + s);
}

std::string gate_mode_name(GateMode m) {
  switch (m) {
    case GateMode::RectifiedTanh: return "tanh";
    case GateMode::Sigmoid: return "sigmoid";
    case GateMode::SoftmaxGroup: return "softmax";
  }
  return "?";
}

Var squash_signal(GateMode mode, Var raw) {
  switch (mode) {
    case GateMode::RectifiedTanh: return activation(Act::RectifiedTanh, raw);
    case GateMode::Sigmoid: return activation(Act::Sigmoid, raw);
    case GateMode::SoftmaxGroup:
      throw ConfigError("softmax gate mode needs a signal group");
  }
  throw ConfigError("unreachable gate mode");
}

std::vector<Var> squash_group(GateMode mode, const std::vector<Var>& raws) {
  if (mode == GateMode::SoftmaxGroup) return softmax_over_group(raws);
  std::vector<Var> out;
  out.reserve(raws.size());
  for (Var r : raws) out.push_back(squash_signal(mode, r));
  return out;
}

Var apply_force(Var squashed, GateForce force) {
  if (force == GateForce::None) return squashed;
  return constant_like(squashed, force == GateForce::Open ? 1.0 : 0.0);
}

Var apply_adapters(const AdapterSet& adapters, const BoundParams& p, Var x) {
  if (adapters.convs.empty()) return x;
  Var acc = apply_conv(adapters.convs.front(), p, x);
  for (std::size_t i = 1; i < adapters.convs.size(); ++i) {
    acc = add(acc, apply_conv(adapters.convs[i], p, x));
  }
  return acc;
}

Var gate(Var squashed, Var x) {
  const Shape4& ss = x.tape->value(squashed).shape();
  const Shape4& xs = x.tape->value(x).shape();
  if (ss.h != 1 || ss.w != 1 || (ss.c != xs.c && ss.c != 1)) {
    throw ShapeMismatch("gate: signal " + to_string(ss) + " against flow " + to_string(xs));
  }
  return hadamard(x, squashed);
}

Var gate_apply(Var raw_signal, Var x, const AdapterSet& adapters, const BoundParams& p,
               GateMode mode, GatePlacement placement, GateForce force) {
  Var adapted = apply_adapters(adapters, p, x);
  if (placement == GatePlacement::Signal) {
    Var s = apply_force(squash_signal(mode, raw_signal), force);
    return gate(s, adapted);
  }
  // literal form: squash the gated product itself
  Var raw = apply_force(raw_signal, force);
  return squash_signal(mode, gate(raw, adapted));
}

std::vector<double> gate_openness(const Tensor4& squashed) {
  const Shape4& s = squashed.shape();
  std::vector<double> per_channel(static_cast<std::size_t>(s.c), 0.0);
  for (int c = 0; c < s.c; ++c) {
    double acc = 0.0;
    for (int n = 0; n < s.n; ++n)
      for (int y = 0; y < s.h; ++y)
        for (int x = 0; x < s.w; ++x) acc += squashed.at(n, c, y, x);
    per_channel[static_cast<std::size_t>(c)] =
        acc / (static_cast<double>(s.n) * s.h * s.w);
  }
  return per_channel;
}

std::vector<double> gate_openness_per_sample(const Tensor4& squashed) {
  const Shape4& s = squashed.shape();
  std::vector<double> per_sample(static_cast<std::size_t>(s.n), 0.0);
  const double denom = static_cast<double>(s.c) * s.h * s.w;
  for (int n = 0; n < s.n; ++n) {
    double acc = 0.0;
    for (int c = 0; c < s.c; ++c)
      for (int y = 0; y < s.h; ++y)
        for (int x = 0; x < s.w; ++x) acc += squashed.at(n, c, y, x);
    per_sample[static_cast<std::size_t>(n)] = acc / denom;
  }
  return per_sample;
}

}  // namespace dsic
