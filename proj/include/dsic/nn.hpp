#pragma once

#include "dsic/ops.hpp"

namespace dsic {

// Cross-correlation with bias, differentiable w.r.t. input, weights and bias.
// weight: (out_c, in_c, kh, kw) with kh == kw in {1, 3}; bias: (1, out_c, 1, 1)
// or a default Var for none. Throws ShapeMismatch on channel disagreement and
// DegenerateOutput when an output dim would be < 1.
Var conv2d(Var x, Var weight, Var bias, int stride, int padding);

// Upsampling by a power-of-two factor in {2, 4, 8}, built from x2 bilinear
// stages (align-corners=false, edge-clamped). Staging keeps one-shot and
// stepwise top-down pathways numerically interchangeable, which the pyramid
// equivalences rely on.
Var bilinear_upsample(Var x, int factor);

// t stacked x2 stages, t in {1, 2, 3}; identical to bilinear_upsample(x, 2^t).
Var f_up(Var x, int t);

enum class PoolKind { Avg, Max };

// Per-channel spatial reduction to (n, c, 1, 1). Max routes its gradient to
// the first maximal position in row-major order.
Var global_pool(PoolKind kind, Var x);

}  // namespace dsic
