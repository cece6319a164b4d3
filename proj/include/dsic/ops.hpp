#pragma once

#include <vector>

#include "dsic/tape.hpp"

namespace dsic {

// Elementwise binary ops. `b` may share a's shape or broadcast as a signal:
// (1, c, 1, 1) or (n, c, 1, 1). hadamard additionally accepts the gating
// patterns (1|n, 1, 1, 1) (scalar gate over all channels) and (n, 1, h, w)
// (pixel-wise map over all channels). Anything else is a ShapeMismatch.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var hadamard(Var a, Var b);

enum class Act { Tanh, Sigmoid, Relu, RectifiedTanh };

// rectified_tanh(v) = max(tanh(v), 0); subgradient at 0 is 0, so fully
// clamped paths are dead in backward as well.
Var activation(Act kind, Var x);

// Elementwise softmax across the group: at every (n,c,h,w) index the outputs
// are positive and sum to 1. All tensors must share one shape.
std::vector<Var> softmax_over_group(const std::vector<Var>& values);

Var concat_channels(const std::vector<Var>& parts);
Var slice_channels(Var x, int first, int count);

Var sum_all(Var x);   // -> (1,1,1,1)
Var mean_all(Var x);  // -> (1,1,1,1)
Var scale(Var x, double k);

// x / (||x||_channels + eps) at every spatial position; the modulus guard eps
// keeps the zero-feature case finite.
Var channel_l2_normalize(Var x, double eps);

Var constant_like(Var x, double fill);
Var one_minus(Var a);  // 1 - a, elementwise

}  // namespace dsic
